#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "qtnet/fmo_network.hpp"
#include "qtnet/rng.hpp"

namespace qtnet {

struct GAConfig {
    std::size_t perturbations_per_generation = 100;
    double sigma0 = 0.005;
    double min_vector_norm = 0.1;
    double target_shortfall = 0.01;
    std::size_t max_generations = 100;
    std::vector<int> free_site_labels = {1, 2, 4, 5, 6, 7};
    double window_factor = kDefaultWindowFactor;
    std::size_t grid_points = kDefaultGridPoints;
    std::uint64_t master_seed = 0;
    // false: the incumbent is replaced only by a strictly better candidate.
    // true: each generation's best candidate is adopted unconditionally.
    bool always_adopt = false;
    // Evaluate α and ε for every generation (ε costs (n−2)! per call).
    bool track_diagnostics = true;
    std::size_t workers = 1;
};

void validate(const GAConfig& config, const DipoleNetwork& net);

struct GenerationRecord {
    std::size_t k = 0;
    double best_p = 0.0;
    double alpha = 0.0;
    double epsilon = 0.0;
    double sigma_k = 0.0;
};

struct GATrajectory {
    double seed_p = 0.0;
    FmoDiagnostics seed_diagnostics;
    std::vector<GenerationRecord> generations;
    DipoleNetwork final_network;
    bool converged = false;
    std::size_t generations_used = 0;

    [[nodiscard]] double final_p() const noexcept {
        return generations.empty() ? seed_p : generations.back().best_p;
    }
};

inline constexpr int kMaxRedraws = 1000;

// b = d + r·n̂ with r ~ N(0, σ) and n̂ uniform on the sphere, redrawn while
// |b| < min_norm; returns b/|b|.
Vec3 perturb_dipole(const Vec3& d, double sigma, double min_norm, Stream& rng);

Vec3 random_unit_vector(Stream& rng);

// Candidate c of generation k draws from Stream(derive_seed(master_seed, k, c)).
GATrajectory run_ga(const DipoleNetwork& seed_network, const GAConfig& config);

enum class SeedKind { FmoPerturbed, Random };
std::string_view to_string(SeedKind kind) noexcept;

struct GASeed {
    DipoleNetwork network;
    SeedKind kind = SeedKind::FmoPerturbed;
};

inline constexpr double kDefaultVicinitySpread = 0.05;

// The reference network with every free dipole perturbed once at `spread`.
std::vector<GASeed> fmo_vicinity_seeds(const DipoleNetwork& reference, std::span<const int> free_labels,
                                       std::size_t count, double spread, std::uint64_t seed);

// The reference network with every free dipole replaced by a uniform random
// orientation.
std::vector<GASeed> random_orientation_seeds(const DipoleNetwork& reference,
                                             std::span<const int> free_labels, std::size_t count,
                                             std::uint64_t seed);

struct ScatterPoint {
    SeedKind kind = SeedKind::FmoPerturbed;
    double seed_p = 0.0;
    double seed_alpha = 0.0;
    double seed_epsilon = 0.0;
    double p = 0.0;
    double alpha = 0.0;
    double epsilon = 0.0;
    std::size_t generations_used = 0;
    bool converged = false;
};

struct ScatterResult {
    std::vector<ScatterPoint> points;
    std::vector<GATrajectory> trajectories;
};

// Run s uses master seed derive_seed(config.master_seed, s). α/ε are only
// evaluated for the seed and the final network of each run.
ScatterResult scatter_ensemble(std::span<const GASeed> seeds, const GAConfig& config);

struct OrientationSample {
    int label = 0;
    double phi_offset = 0.0;
    double theta_offset = 0.0;
    double angular_deviation = 0.0;  // radians, axis-like (sign-insensitive)
};

struct SiteOrientationSummary {
    int label = 0;
    double mean_deviation = 0.0;
    std::vector<double> deviation_edges;
    std::vector<std::size_t> deviation_counts;
};

struct OrientationStatistics {
    std::vector<OrientationSample> samples;
    std::vector<SiteOrientationSummary> sites;
};

OrientationStatistics orientation_statistics(std::span<const GATrajectory> trajectories,
                                             const DipoleNetwork& reference,
                                             std::span<const int> free_labels,
                                             std::size_t bins = 20);

}  // namespace qtnet
