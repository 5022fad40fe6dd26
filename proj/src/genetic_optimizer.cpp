#include "qtnet/genetic_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_on_sphere.hpp>

#include "qtnet/error.hpp"
#include "qtnet/parallel.hpp"

namespace qtnet {

void validate(const GAConfig& c, const DipoleNetwork& net) {
    if (c.perturbations_per_generation < 1) throw InvalidArgument("ga: need >= 1 perturbation");
    if (!(c.sigma0 >= 0.0)) throw InvalidArgument("ga: sigma0 must be non-negative");
    if (!(c.min_vector_norm >= 0.0 && c.min_vector_norm < 1.0)) {
        throw InvalidArgument("ga: min_vector_norm must lie in [0, 1)");
    }
    if (!(c.target_shortfall > 0.0 && c.target_shortfall < 1.0)) {
        throw InvalidArgument("ga: target_shortfall must lie in (0, 1)");
    }
    if (c.max_generations < 1) throw InvalidArgument("ga: max_generations must be >= 1");
    for (int label : c.free_site_labels) {
        if (label == net.in_label() || label == net.out_label()) {
            throw InvalidArgument("ga: free sites must exclude the input and output sites");
        }
        (void)net.index_of(label);
    }
}

Vec3 random_unit_vector(Stream& rng) {
    boost::random::uniform_on_sphere<double> sphere(3);
    const auto v = sphere(rng);
    return Vec3(v[0], v[1], v[2]);
}

Vec3 perturb_dipole(const Vec3& d, double sigma, double min_norm, Stream& rng) {
    if (sigma == 0.0) return d;
    boost::random::normal_distribution<double> normal(0.0, sigma);
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        const double r = normal(rng);
        const Vec3 b = d + r * random_unit_vector(rng);
        const double norm = b.norm();
        if (norm >= min_norm) return b / norm;
    }
    throw NumericalFailure("perturb_dipole: redraw cap exhausted");
}

namespace {

double efficiency(const DipoleNetwork& net, const GAConfig& c) {
    return fmo_transport(net, c.window_factor, c.grid_points).p_max;
}

}  // namespace

GATrajectory run_ga(const DipoleNetwork& seed_network, const GAConfig& config) {
    validate(config, seed_network);
    GATrajectory traj;
    DipoleNetwork incumbent = seed_network;
    double incumbent_p = efficiency(incumbent, config);
    traj.seed_p = incumbent_p;
    FmoDiagnostics diag{};
    if (config.track_diagnostics) {
        diag = fmo_diagnostics(incumbent);
        traj.seed_diagnostics = diag;
    }

    const std::size_t cands = config.perturbations_per_generation;
    std::vector<DipoleNetwork> candidates(cands);
    std::vector<double> scores(cands);
    for (std::size_t k = 1; k <= config.max_generations; ++k) {
        const double sigma = config.sigma0 / static_cast<double>(k);
        parallel_for(cands, config.workers, [&](std::size_t c) {
            try {
                Stream rng(derive_seed(config.master_seed, k, c));
                DipoleNetwork cand = incumbent;
                for (int label : config.free_site_labels) {
                    cand.set_dipole(label, perturb_dipole(cand.dipole(label), sigma,
                                                          config.min_vector_norm, rng));
                }
                scores[c] = efficiency(cand, config);
                candidates[c] = std::move(cand);
            } catch (const Error& e) {
                throw NumericalFailure(std::string(e.what()) + " [generation " + std::to_string(k) +
                                       ", candidate " + std::to_string(c) + "]");
            }
        });
        const auto best = static_cast<std::size_t>(
            std::max_element(scores.begin(), scores.end()) - scores.begin());
        const bool adopt = config.always_adopt || scores[best] > incumbent_p;
        if (adopt) {
            incumbent = candidates[best];
            incumbent_p = scores[best];
            if (config.track_diagnostics) diag = fmo_diagnostics(incumbent);
        }
        traj.generations.push_back(GenerationRecord{k, incumbent_p, diag.alpha, diag.epsilon, sigma});
        traj.generations_used = k;
        if (incumbent_p >= 1.0 - config.target_shortfall) {
            traj.converged = true;
            break;
        }
    }
    traj.final_network = std::move(incumbent);
    return traj;
}

std::string_view to_string(SeedKind kind) noexcept {
    return kind == SeedKind::FmoPerturbed ? "fmo-perturbed" : "random";
}

std::vector<GASeed> fmo_vicinity_seeds(const DipoleNetwork& reference, std::span<const int> free_labels,
                                       std::size_t count, double spread, std::uint64_t seed) {
    std::vector<GASeed> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        Stream rng(derive_seed(seed, s));
        DipoleNetwork net = reference;
        for (int label : free_labels) {
            net.set_dipole(label, perturb_dipole(net.dipole(label), spread, 0.1, rng));
        }
        out.push_back(GASeed{std::move(net), SeedKind::FmoPerturbed});
    }
    return out;
}

std::vector<GASeed> random_orientation_seeds(const DipoleNetwork& reference,
                                             std::span<const int> free_labels, std::size_t count,
                                             std::uint64_t seed) {
    std::vector<GASeed> out;
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        Stream rng(derive_seed(seed, s));
        DipoleNetwork net = reference;
        for (int label : free_labels) net.set_dipole(label, random_unit_vector(rng));
        out.push_back(GASeed{std::move(net), SeedKind::Random});
    }
    return out;
}

ScatterResult scatter_ensemble(std::span<const GASeed> seeds, const GAConfig& config) {
    if (seeds.empty()) throw InvalidArgument("scatter_ensemble: empty seed list");
    ScatterResult result;
    result.points.resize(seeds.size());
    result.trajectories.resize(seeds.size());
    GAConfig inner = config;
    inner.track_diagnostics = false;
    inner.workers = 1;
    parallel_for(seeds.size(), config.workers, [&](std::size_t s) {
        GAConfig run = inner;
        run.master_seed = derive_seed(config.master_seed, s);
        GATrajectory traj = run_ga(seeds[s].network, run);
        const FmoDiagnostics before = fmo_diagnostics(seeds[s].network);
        const FmoDiagnostics after = fmo_diagnostics(traj.final_network);
        traj.seed_diagnostics = before;
        ScatterPoint& pt = result.points[s];
        pt.kind = seeds[s].kind;
        pt.seed_p = traj.seed_p;
        pt.seed_alpha = before.alpha;
        pt.seed_epsilon = before.epsilon;
        pt.p = traj.final_p();
        pt.alpha = after.alpha;
        pt.epsilon = after.epsilon;
        pt.generations_used = traj.generations_used;
        pt.converged = traj.converged;
        result.trajectories[s] = std::move(traj);
    });
    return result;
}

OrientationStatistics orientation_statistics(std::span<const GATrajectory> trajectories,
                                             const DipoleNetwork& reference,
                                             std::span<const int> free_labels, std::size_t bins) {
    OrientationStatistics out;
    const double max_dev = std::numbers::pi / 2.0;
    for (int label : free_labels) {
        SiteOrientationSummary summary;
        summary.label = label;
        summary.deviation_edges.resize(bins + 1);
        for (std::size_t b = 0; b <= bins; ++b) {
            summary.deviation_edges[b] = max_dev * static_cast<double>(b) / static_cast<double>(bins);
        }
        summary.deviation_counts.assign(bins, 0);
        const Vec3& ref = reference.dipole(label);
        const double ref_theta = std::acos(std::clamp(ref.z(), -1.0, 1.0));
        const double ref_phi = std::atan2(ref.y(), ref.x());
        double sum = 0.0;
        for (const auto& traj : trajectories) {
            Vec3 d = traj.final_network.dipole(label);
            if (d.dot(ref) < 0.0) d = -d;
            OrientationSample s;
            s.label = label;
            s.angular_deviation = std::acos(std::clamp(std::abs(d.dot(ref)), 0.0, 1.0));
            s.theta_offset = std::acos(std::clamp(d.z(), -1.0, 1.0)) - ref_theta;
            s.phi_offset = std::remainder(std::atan2(d.y(), d.x()) - ref_phi, 2.0 * std::numbers::pi);
            sum += s.angular_deviation;
            auto b = static_cast<std::size_t>(s.angular_deviation / max_dev * static_cast<double>(bins));
            ++summary.deviation_counts[std::min(b, bins - 1)];
            out.samples.push_back(s);
        }
        summary.mean_deviation =
            trajectories.empty() ? 0.0 : sum / static_cast<double>(trajectories.size());
        out.sites.push_back(std::move(summary));
    }
    return out;
}

}  // namespace qtnet
