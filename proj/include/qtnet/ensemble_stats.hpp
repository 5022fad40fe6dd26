#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qtnet/doublet_analysis.hpp"
#include "qtnet/dynamics.hpp"
#include "qtnet/error.hpp"
#include "qtnet/network_model.hpp"

namespace qtnet {

enum class EnsembleKind { Goe, Centro, CentroDoublet };

std::string_view to_string(EnsembleKind kind) noexcept;
EnsembleKind parse_ensemble_kind(std::string_view text);

struct EnsembleConfig {
    EnsembleKind kind = EnsembleKind::CentroDoublet;
    std::size_t n = 10;
    double xi = 2.0;
    double alpha_threshold = 0.95;
    std::size_t num_samples = 1000;
    double window_factor = kDefaultWindowFactor;
    std::size_t grid_points = kDefaultGridPoints;
    std::uint64_t master_seed = 0;
    // Maximum number of attempts; 0 selects the per-kind default
    // (num_samples for goe/centro, kDefaultDoubletAttemptsPerSample × num_samples
    // for centro-doublet).
    std::uint64_t attempt_cap = 0;
    std::size_t workers = 1;
};

// Joint post-selection probability at n = 10, ξ = 2, α = 0.95 is ≈ 2×10⁻⁵.
inline constexpr std::uint64_t kDefaultDoubletAttemptsPerSample = 1'000'000;

void validate(const EnsembleConfig& config);
std::uint64_t effective_attempt_cap(const EnsembleConfig& config);

struct RealizationRecord {
    std::size_t index = 0;
    std::uint64_t attempt = 0;
    std::uint64_t seed = 0;
    TransportRecord transport;
    std::optional<DoubletRecord> doublet;
    bool accepted = false;
    bool degenerate = false;  // zero direct coupling: excluded from time statistics
};

struct CampaignResult {
    std::vector<RealizationRecord> records;
    std::uint64_t attempts = 0;  // attempts consumed to produce `records`
    std::uint64_t screened_out = 0;  // rejected before full analysis (centro-doublet)
    [[nodiscard]] double acceptance_fraction() const noexcept {
        return attempts == 0 ? 0.0 : static_cast<double>(records.size()) / static_cast<double>(attempts);
    }
};

class PartialCampaign : public Error {
public:
    PartialCampaign(const std::string& what, CampaignResult partial)
        : Error(what), partial_(std::move(partial)) {}
    [[nodiscard]] const CampaignResult& partial() const noexcept { return partial_; }

private:
    CampaignResult partial_;
};

// Realization seeds are derive_seed(master_seed, attempt). Output is ordered by
// attempt index and does not depend on `workers`.
CampaignResult run_campaign(const EnsembleConfig& config);

// One realization from its attempt index, bypassing any screening.
RealizationRecord evaluate_realization(const EnsembleConfig& config, std::uint64_t attempt);

std::vector<RealizationRecord> accepted_only(std::span<const RealizationRecord> records);

double estimate_vbar2(std::span<const RealizationRecord> records);

struct AnalyticParams {
    double vbar2 = 0.0;
    double s0 = 0.0;
    double x0 = 0.0;
    double v_mean = 0.0;
};

AnalyticParams analytic_params(double vbar2, double xi, std::size_t n);

// Symmetric in x; integrates to 1 over [0, ∞).
double analytic_ratio_density(double x, const AnalyticParams& params);

// ∫₀ˣ of the density (odd in x).
double analytic_ratio_cdf(double x, const AnalyticParams& params);

// Exact cell averages over consecutive edges; with `renormalize` the cells
// carry unit total mass.
std::vector<double> analytic_bin_density(std::span<const double> edges, const AnalyticParams& params,
                                         bool renormalize);

struct Histogram {
    std::vector<double> bin_edges;
    std::vector<std::size_t> counts;
    std::vector<double> density;

    [[nodiscard]] std::size_t bins() const noexcept { return counts.size(); }
    [[nodiscard]] std::size_t total() const noexcept;
};

// Left-closed bins, final bin closed; values outside [lo, hi] do not contribute.
Histogram make_histogram(std::span<const double> values, std::size_t bins, double lo, double hi);

Histogram ratio_histogram(std::span<const RealizationRecord> records, std::size_t bins, double lo,
                          double hi);
Histogram efficiency_histogram(std::span<const RealizationRecord> records, std::size_t bins);

// Total variation distance ½Σ|h_i − f_i| between the histogram's bin masses and
// the density's bin masses (composite midpoint rule, renormalized over the
// histogram range). A density with zero mass on the range has distance 1.
double distribution_distance(const Histogram& hist, const std::function<double(double)>& density,
                             std::size_t subdivisions = 16);

}  // namespace qtnet
