#include <doctest.h>

#include <random>

#include <fstream>
#include <numbers>
#include <sstream>

#include "qtnet/doublet_analysis.hpp"
#include "qtnet/error.hpp"
#include "qtnet/fmo_network.hpp"
#include "qtnet/io.hpp"

using namespace qtnet;

namespace {

DipoleNetwork pair_network(const Vec3& d1, const Vec3& d2, const Vec3& r) {
    std::vector<DipoleSite> s = {{1, Vec3::Zero(), d1}, {2, r, d2}};
    return DipoleNetwork(s, 1, 2);
}

DipoleNetwork parse(const std::string& text, int in = 8, int out = 3) {
    std::istringstream s(text);
    return load_sites(s, in, out);
}

// Inversion-symmetric 8-site geometry: sites 8↔3, 1↔7, 2↔6, 4↔5 are mirror
// images through the origin with equal dipoles.
DipoleNetwork inversion_symmetric_network() {
    const std::vector<std::pair<int, int>> mirror = {{8, 3}, {1, 7}, {2, 6}, {4, 5}};
    const std::vector<Vec3> pos = {{10.0, 2.0, -1.0}, {3.0, 7.0, 2.0}, {-4.0, 5.0, 6.0}, {6.0, -3.0, 4.0}};
    const std::vector<Vec3> dip = {{1.0, 2.0, 0.5}, {-0.3, 1.0, 0.2}, {0.7, -0.1, 0.9}, {0.2, 0.4, -1.0}};
    std::vector<DipoleSite> s;
    for (std::size_t k = 0; k < mirror.size(); ++k) {
        s.push_back({mirror[k].first, pos[k], dip[k].normalized()});
        s.push_back({mirror[k].second, -pos[k], dip[k].normalized()});
    }
    return DipoleNetwork(s);
}

}  // namespace

TEST_CASE("bundled dataset") {
    const DipoleNetwork net = bundled_fmo_network();
    REQUIRE(net.size() == 8);
    CHECK(net.in_label() == 8);
    CHECK(net.out_label() == 3);
    const auto& s1 = net.sites()[0];
    CHECK(s1.label == 1);
    CHECK(s1.position.x() == 26.51);
    CHECK(s1.position.y() == 2.597);
    CHECK(s1.position.z() == -11.349);
    CHECK(s1.dipole.x() == doctest::Approx(0.741006).epsilon(1e-5));
    CHECK(s1.dipole.y() == doctest::Approx(0.560602).epsilon(1e-5));
    CHECK(s1.dipole.z() == doctest::Approx(0.369644).epsilon(1e-5));
    for (const auto& s : net.sites()) CHECK(std::abs(s.dipole.norm() - 1.0) < 1e-12);
}

TEST_CASE("load_sites formats and errors") {
    const DipoleNetwork a = parse("label x y z sx sy sz\n3 0 0 0 1 0 0\n8 0 0 5 0 1 0\n");
    CHECK(a.size() == 2);
    const DipoleNetwork b = parse("# comment\n8,0,0,5,0,1,0\n\n3,0,0,0,1,0,0\n");
    CHECK(b.sites()[0].label == 3);

    auto fails_at = [](const std::string& text, std::size_t line) {
        try {
            parse(text);
        } catch (const ParseError& e) {
            CHECK(e.line() == line);
            return;
        }
        FAIL("expected ParseError");
    };
    fails_at("", 0);
    fails_at("3,0,0,0,1,0,0\n8,0,0,5,0.5,0,0\n", 2);
    fails_at("3,0,0,0,1,0,0\n8,0,0,5,0,1\n", 2);
    fails_at("3,0,0,0,1,0,0\n8,0,zero,5,0,1,0\n", 2);
    fails_at("3,0,0,0,1,0,0\n3,0,0,5,0,1,0\n", 2);
    CHECK_THROWS_AS(parse("3,0,0,0,1,0,0\n7,0,0,5,0,1,0\n"), InvalidArgument);
    CHECK_THROWS_AS(parse("3,0,0,0,1,0,0\n8,0,0,0,0,1,0\n"), InvalidArgument);
    CHECK_THROWS_AS(load_sites_file("/nonexistent/sites.csv"), Error);

    // Within 1e-3 of unit norm the dipole is renormalized.
    const DipoleNetwork c = parse("3,0,0,0,1.0005,0,0\n8,0,0,5,0,1,0\n");
    CHECK(c.dipole(3).norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("dipole_hamiltonian closed forms") {
    const DipoleNetwork par = pair_network(Vec3::UnitZ(), Vec3::UnitZ(), Vec3::UnitX());
    CHECK(dipole_hamiltonian(par)(0, 1) == doctest::Approx(1.0));
    const DipoleNetwork col = pair_network(Vec3::UnitX(), Vec3::UnitX(), Vec3::UnitX());
    CHECK(dipole_hamiltonian(col)(0, 1) == doctest::Approx(-2.0));
    const DipoleNetwork far = pair_network(Vec3::UnitZ(), Vec3::UnitZ(), 2.0 * Vec3::UnitX());
    CHECK(dipole_hamiltonian(far)(0, 1) == doctest::Approx(0.125));
    DipoleNetwork scaled = par;
    scaled.set_coupling_constant(3.0);
    CHECK(dipole_hamiltonian(scaled)(0, 1) == doctest::Approx(3.0));
}

TEST_CASE("bundled Hamiltonian reproduces the reference bit-for-bit") {
    const DipoleNetwork net = bundled_fmo_network();
    const Hamiltonian h = dipole_hamiltonian(net);
    std::vector<int> labels;
    for (const auto& s : net.sites()) labels.push_back(s.label);
    std::ostringstream got;
    io::write_hamiltonian_csv(got, h, labels);
    std::ifstream f(QTNET_TEST_DATA_DIR "/fmo_hamiltonian.csv");
    REQUIRE(f.good());
    std::stringstream ref;
    ref << f.rdbuf();
    CHECK(got.str() == ref.str());

    // Independent evaluation of the point-dipole formula.
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK(h(i, i) == 0.0);
        for (std::size_t j = 0; j < 8; ++j) {
            if (i == j) continue;
            const auto& a = net.sites()[i];
            const auto& b = net.sites()[j];
            const double dx = b.position.x() - a.position.x();
            const double dy = b.position.y() - a.position.y();
            const double dz = b.position.z() - a.position.z();
            const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
            const double pa = (a.dipole.x() * dx + a.dipole.y() * dy + a.dipole.z() * dz) / r;
            const double pb = (b.dipole.x() * dx + b.dipole.y() * dy + b.dipole.z() * dz) / r;
            const double expect = (a.dipole.dot(b.dipole) - 3.0 * pa * pb) / (r * r * r);
            CHECK(h(i, j) == doctest::Approx(expect).epsilon(1e-12));
            CHECK(h(i, j) == h(j, i));
        }
    }
}

TEST_CASE("dipole_hamiltonian is invariant under rigid motions") {
    const DipoleNetwork net = bundled_fmo_network();
    const Hamiltonian h = dipole_hamiltonian(net);
    const Eigen::Matrix3d rot =
        (Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()) * Eigen::AngleAxisd(-1.3, Vec3::UnitY())).toRotationMatrix();
    std::vector<DipoleSite> rotated, moved;
    for (const auto& s : net.sites()) {
        rotated.push_back({s.label, rot * s.position, (rot * s.dipole).normalized()});
        moved.push_back({s.label, s.position + Vec3(100.0, -3.0, 7.5), s.dipole});
    }
    const double scale = h.matrix().cwiseAbs().maxCoeff();
    CHECK((dipole_hamiltonian(DipoleNetwork(rotated)).matrix() - h.matrix()).cwiseAbs().maxCoeff() < 1e-10 * scale);
    CHECK((dipole_hamiltonian(DipoleNetwork(moved)).matrix() - h.matrix()).cwiseAbs().maxCoeff() < 1e-10 * scale);

    // Flipping a dipole flips its row but not the transport physics.
    DipoleNetwork flipped = net;
    flipped.set_dipole(5, -net.dipole(5));
    CHECK(fmo_transport(flipped).p_max == doctest::Approx(fmo_transport(net).p_max).epsilon(1e-9));
}

TEST_CASE("fmo_transport on the bundled network") {
    const DipoleNetwork net = bundled_fmo_network();
    const TransportRecord t = fmo_transport(net);
    CHECK(t.p_max > 0.0);
    CHECK(t.p_max < 0.5);
    CHECK(t.t_peak <= t.window_factor * t.t_r);
    const Hamiltonian h = dipole_hamiltonian(net);
    const SitePair p = fmo_site_pair(net, h);
    CHECK(p.in_index == 7);
    CHECK(p.out_index == 2);
    CHECK(p.t_r == doctest::Approx(std::numbers::pi / (2.0 * std::abs(h(7, 2)))));

    DipoleNetwork strong = net;
    strong.set_coupling_constant(250.0);
    const TransportRecord s = fmo_transport(strong);
    CHECK(s.p_max == doctest::Approx(t.p_max).epsilon(1e-9));
    CHECK(s.t_peak * 250.0 == doctest::Approx(t.t_peak).epsilon(1e-6));
    CHECK(s.t_r * 250.0 == doctest::Approx(t.t_r).epsilon(1e-12));
}

TEST_CASE("fmo_transport rejects a vanishing 8-3 coupling") {
    std::vector<DipoleSite> s = {{3, Vec3::Zero(), Vec3::UnitZ()}, {8, Vec3::UnitY(), Vec3::UnitX()},
                                 {1, Vec3(1, 1, 1), Vec3::UnitX()}};
    const DipoleNetwork net(s);
    CHECK(dipole_hamiltonian(net)(1, 2) == 0.0);
    CHECK_THROWS_AS(fmo_transport(net), DegeneratePair);
}

TEST_CASE("fmo_diagnostics") {
    const FmoDiagnostics d = fmo_diagnostics(bundled_fmo_network());
    CHECK(d.alpha >= 0.0);
    CHECK(d.alpha < 0.5);
    CHECK(d.epsilon > 0.0);

    const DipoleNetwork sym = inversion_symmetric_network();
    const FmoDiagnostics ds = fmo_diagnostics(sym);
    CHECK(ds.epsilon <= 1e-12);
    CHECK(ds.alpha >= 0.0);
    CHECK(ds.alpha <= 1.0);
}

TEST_CASE("DipoleNetwork accessors") {
    DipoleNetwork net = bundled_fmo_network();
    CHECK(net.index_of(8) == 7);
    CHECK_THROWS_AS(static_cast<void>(net.index_of(9)), InvalidArgument);
    net.set_dipole(1, Vec3(0.0, 0.0, 2.0));
    CHECK(net.dipole(1) == Vec3::UnitZ());
    CHECK_THROWS_AS(net.set_dipole(1, Vec3::Zero()), InvalidArgument);
    std::vector<DipoleSite> s = {{3, Vec3::Zero(), Vec3::UnitZ()}, {8, Vec3::UnitY(), Vec3(0.0, 0.0, 0.5)}};
    CHECK_THROWS_AS(static_cast<void>(DipoleNetwork(s)), InvalidArgument);
    CHECK_THROWS_AS(DipoleNetwork(std::vector<DipoleSite>{{3, Vec3::Zero(), Vec3::UnitZ()}, {8, Vec3::UnitY(), Vec3::UnitZ()}}, 3, 3),
                    InvalidArgument);
}
