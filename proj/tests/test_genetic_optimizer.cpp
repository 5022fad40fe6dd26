#include <doctest.h>

#include <Eigen/Geometry>
#include <algorithm>
#include <numbers>
#include <random>
#include <sstream>

#include "qtnet/error.hpp"
#include "qtnet/genetic_optimizer.hpp"
#include "qtnet/io.hpp"

using namespace qtnet;

namespace {

// Two strongly coupled end sites and two distant sites: P ≈ 1 already.
DipoleNetwork near_two_level() {
    std::vector<DipoleSite> s = {{3, Vec3::Zero(), Vec3::UnitZ()},
                                 {8, Vec3(1.0, 0.0, 0.0), Vec3::UnitZ()},
                                 {1, Vec3(40.0, 30.0, 0.0), Vec3::UnitX()},
                                 {2, Vec3(-30.0, 40.0, 10.0), Vec3::UnitY()}};
    return DipoleNetwork(s);
}

GAConfig quick(std::uint64_t seed) {
    GAConfig c;
    c.perturbations_per_generation = 12;
    c.max_generations = 6;
    c.sigma0 = 0.2;
    c.master_seed = seed;
    return c;
}

std::string trajectory_csv(const GATrajectory& t) {
    std::ostringstream s;
    io::write_trajectory_csv(s, t);
    return s.str();
}

}  // namespace

TEST_CASE("perturb_dipole basics") {
    Stream rng(1);
    const Vec3 d = Vec3(1.0, 2.0, -0.5).normalized();
    CHECK(perturb_dipole(d, 0.0, 0.1, rng) == d);
    for (int k = 0; k < 1000; ++k) {
        const Vec3 p = perturb_dipole(d, 0.7, 0.1, rng);
        CHECK(std::abs(p.norm() - 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(perturb_dipole(d, 0.01, 1.5, rng), NumericalFailure);
}

TEST_CASE("perturb_dipole angular spread matches a direct Monte-Carlo of the recipe") {
    const double sigma = 0.005;
    const Vec3 d = Vec3::UnitX();
    Stream rng(2);
    double mean = 0.0;
    for (int k = 0; k < 100000; ++k) mean += std::acos(std::clamp(perturb_dipole(d, sigma, 0.1, rng).dot(d), -1.0, 1.0));
    mean /= 1e5;

    // Independent oracle with std distributions: b = d + r·n̂, n̂ from a normalized Gaussian.
    std::mt19937_64 gen(3);
    std::normal_distribution<double> g(0.0, 1.0), r(0.0, sigma);
    double oracle = 0.0;
    for (int k = 0; k < 100000; ++k) {
        Vec3 n(g(gen), g(gen), g(gen));
        n.normalize();
        const Vec3 b = (d + r(gen) * n).normalized();
        oracle += std::acos(std::clamp(b.dot(d), -1.0, 1.0));
    }
    oracle /= 1e5;
    CHECK(mean < 0.01);
    CHECK(mean == doctest::Approx(oracle).epsilon(0.02));
    // E|r|·E[sin angle to d] = σ√(2/π)·π/4.
    CHECK(mean == doctest::Approx(sigma * std::sqrt(2.0 / std::numbers::pi) * std::numbers::pi / 4.0).epsilon(0.02));
}

TEST_CASE("random_unit_vector is uniform on the sphere") {
    Stream rng(4);
    Vec3 mean = Vec3::Zero();
    double zz = 0.0;
    for (int k = 0; k < 100000; ++k) {
        const Vec3 v = random_unit_vector(rng);
        CHECK(std::abs(v.norm() - 1.0) < 1e-12);
        mean += v;
        zz += v.z() * v.z();
    }
    CHECK(mean.norm() / 1e5 < 0.01);
    CHECK(zz / 1e5 == doctest::Approx(1.0 / 3.0).epsilon(0.02));
}

TEST_CASE("GA config validation") {
    const DipoleNetwork net = bundled_fmo_network();
    GAConfig c;
    CHECK_NOTHROW(validate(c, net));
    c.free_site_labels = {1, 3};
    CHECK_THROWS_AS(validate(c, net), InvalidArgument);
    c.free_site_labels = {1, 9};
    CHECK_THROWS_AS(validate(c, net), InvalidArgument);
    c = GAConfig{};
    c.target_shortfall = 0.0;
    CHECK_THROWS_AS(validate(c, net), InvalidArgument);
    c = GAConfig{};
    c.perturbations_per_generation = 0;
    CHECK_THROWS_AS(validate(c, net), InvalidArgument);
}

TEST_CASE("converged seed stops after one generation") {
    const DipoleNetwork net = near_two_level();
    GAConfig c = quick(1);
    c.free_site_labels = {1};
    const GATrajectory t = run_ga(net, c);
    CHECK(t.seed_p >= 0.99);
    CHECK(t.converged);
    CHECK(t.generations_used == 1);
    CHECK(t.generations.size() == 1);
}

TEST_CASE("GA invariants on the bundled network") {
    const DipoleNetwork net = bundled_fmo_network();
    const GAConfig c = quick(7);
    const GATrajectory t = run_ga(net, c);
    REQUIRE_FALSE(t.generations.empty());
    double prev = t.seed_p;
    for (const auto& g : t.generations) {
        CHECK(g.best_p >= prev);
        prev = g.best_p;
        CHECK(g.sigma_k * static_cast<double>(g.k) == doctest::Approx(c.sigma0).epsilon(1e-15));
        CHECK(g.alpha >= 0.0);
        CHECK(g.alpha <= 1.0);
        CHECK(g.epsilon >= 0.0);
    }
    CHECK(t.final_network.dipole(3) == net.dipole(3));
    CHECK(t.final_network.dipole(8) == net.dipole(8));
    CHECK(t.final_p() > t.seed_p);
    CHECK(t.final_p() == doctest::Approx(fmo_transport(t.final_network).p_max).epsilon(1e-12));

    CHECK(trajectory_csv(run_ga(net, c)) == trajectory_csv(t));
    GAConfig parallel = c;
    parallel.workers = 3;
    CHECK(trajectory_csv(run_ga(net, parallel)) == trajectory_csv(t));
}

TEST_CASE("always_adopt follows each generation's best") {
    const DipoleNetwork net = bundled_fmo_network();
    GAConfig c = quick(9);
    c.always_adopt = true;
    c.max_generations = 4;
    const GATrajectory t = run_ga(net, c);
    CHECK(t.generations.size() == 4);
    for (const auto& g : t.generations) CHECK(g.best_p <= 1.0 + 1e-9);
}

TEST_CASE("seed generators") {
    const DipoleNetwork net = bundled_fmo_network();
    const std::vector<int> free = {1, 2, 4, 5, 6, 7};
    const auto same = fmo_vicinity_seeds(net, free, 3, 0.0, 1);
    for (const auto& s : same) {
        CHECK(s.kind == SeedKind::FmoPerturbed);
        for (const auto& site : net.sites()) CHECK((s.network.dipole(site.label) - site.dipole).norm() < 1e-15);
    }
    const auto near = fmo_vicinity_seeds(net, free, 5, 0.05, 2);
    const auto rnd = random_orientation_seeds(net, free, 5, 3);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(rnd[i].kind == SeedKind::Random);
        for (int fixed : {3, 8}) {
            CHECK(near[i].network.dipole(fixed) == net.dipole(fixed));
            CHECK(rnd[i].network.dipole(fixed) == net.dipole(fixed));
        }
        for (int f : free) {
            CHECK(near[i].network.dipole(f).dot(net.dipole(f)) > 0.9);
            CHECK(rnd[i].network.dipole(f) != net.dipole(f));
        }
    }
    CHECK(to_string(SeedKind::FmoPerturbed) == "fmo-perturbed");
    CHECK(to_string(SeedKind::Random) == "random");
}

TEST_CASE("scatter_ensemble") {
    const DipoleNetwork net = bundled_fmo_network();
    const std::vector<int> free = {1, 2, 4, 5, 6, 7};
    auto seeds = fmo_vicinity_seeds(net, free, 2, 0.05, 4);
    auto rnd = random_orientation_seeds(net, free, 2, 5);
    seeds.insert(seeds.end(), rnd.begin(), rnd.end());
    GAConfig c = quick(11);
    c.max_generations = 3;
    const ScatterResult r = scatter_ensemble(seeds, c);
    REQUIRE(r.points.size() == 4);
    CHECK(r.points[0].kind == SeedKind::FmoPerturbed);
    CHECK(r.points[3].kind == SeedKind::Random);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(r.points[i].p >= r.points[i].seed_p);
        CHECK(r.points[i].p == r.trajectories[i].final_p());
        CHECK(r.points[i].alpha == fmo_diagnostics(r.trajectories[i].final_network).alpha);
    }
    GAConfig par = c;
    par.workers = 2;
    const ScatterResult r2 = scatter_ensemble(seeds, par);
    for (std::size_t i = 0; i < 4; ++i) CHECK(r2.points[i].p == r.points[i].p);
    CHECK_THROWS_AS(scatter_ensemble(std::vector<GASeed>{}, c), InvalidArgument);
}

TEST_CASE("orientation_statistics") {
    const DipoleNetwork net = bundled_fmo_network();
    const std::vector<int> free = {1, 2, 4, 5, 6, 7};
    GATrajectory same;
    same.final_network = net;
    GATrajectory flipped;
    flipped.final_network = net;
    for (int f : free) flipped.final_network.set_dipole(f, -net.dipole(f));
    const std::vector<GATrajectory> trajs = {same, flipped};
    const OrientationStatistics s = orientation_statistics(trajs, net, free, 10);
    REQUIRE(s.samples.size() == 12);
    for (const auto& o : s.samples) {
        CHECK(o.angular_deviation == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
        CHECK(std::abs(o.phi_offset) < 1e-7);
        CHECK(std::abs(o.theta_offset) < 1e-7);
    }
    REQUIRE(s.sites.size() == 6);
    for (const auto& site : s.sites) {
        CHECK(site.deviation_counts[0] == 2);
        CHECK(site.mean_deviation < 1e-7);
    }

    GATrajectory tilted;
    tilted.final_network = net;
    const Vec3 d = net.dipole(4);
    const Vec3 axis = d.cross(Vec3::UnitZ()).normalized();
    tilted.final_network.set_dipole(4, Eigen::AngleAxisd(0.3, axis) * d);
    const std::vector<GATrajectory> one = {tilted};
    const OrientationStatistics t = orientation_statistics(one, net, free, 10);
    CHECK(t.sites[2].label == 4);
    CHECK(t.sites[2].mean_deviation == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(t.sites[0].mean_deviation < 1e-7);
}
