#include "qtnet/ensemble_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qtnet/parallel.hpp"
#include "screen.hpp"

namespace qtnet {

std::string_view to_string(EnsembleKind kind) noexcept {
    switch (kind) {
        case EnsembleKind::Goe: return "goe";
        case EnsembleKind::Centro: return "centro";
        case EnsembleKind::CentroDoublet: return "centro-doublet";
    }
    return "goe";
}

EnsembleKind parse_ensemble_kind(std::string_view text) {
    if (text == "goe") return EnsembleKind::Goe;
    if (text == "centro") return EnsembleKind::Centro;
    if (text == "centro-doublet") return EnsembleKind::CentroDoublet;
    throw InvalidArgument("unknown ensemble kind '" + std::string(text) +
                          "' (expected goe, centro or centro-doublet)");
}

void validate(const EnsembleConfig& c) {
    if (c.n < 4 || c.n % 2 != 0) {
        throw InvalidDimension("ensemble: n must be even and >= 4, got " + std::to_string(c.n));
    }
    if (!(c.xi > 0.0)) throw InvalidArgument("ensemble: xi must be positive");
    if (!(c.alpha_threshold > 0.0 && c.alpha_threshold < 1.0)) {
        throw InvalidArgument("ensemble: alpha threshold must lie in (0, 1)");
    }
    if (c.num_samples < 1) throw InvalidArgument("ensemble: num_samples must be >= 1");
    if (!(c.window_factor > 0.0)) throw InvalidArgument("ensemble: window factor must be positive");
    if (c.grid_points < 100) throw InvalidArgument("ensemble: grid_points must be >= 100");
}

std::uint64_t effective_attempt_cap(const EnsembleConfig& c) {
    if (c.attempt_cap != 0) return c.attempt_cap;
    if (c.kind == EnsembleKind::CentroDoublet) {
        return kDefaultDoubletAttemptsPerSample * static_cast<std::uint64_t>(c.num_samples);
    }
    return c.num_samples;
}

RealizationRecord evaluate_realization(const EnsembleConfig& config, std::uint64_t attempt) {
    RealizationRecord rec;
    rec.attempt = attempt;
    rec.index = static_cast<std::size_t>(attempt);
    rec.seed = derive_seed(config.master_seed, attempt);
    Stream rng(rec.seed);

    Hamiltonian h;
    SitePair pair;
    if (config.kind == EnsembleKind::Goe) {
        h = sample_goe(config.n, config.xi, rng);
        pair = select_io_pair(h, PairMode::GlobalWeakest);
    } else {
        CentroSample sample = sample_centro_symmetric(config.n, config.xi, rng);
        h = std::move(sample.h);
        pair = select_io_pair(h, PairMode::CentroPairWeakest);
        rec.doublet = analyze_doublet(h, pair);
        rec.accepted = rec.doublet->alpha > config.alpha_threshold;
    }
    if (pair.degenerate) {
        rec.degenerate = true;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        rec.transport = TransportRecord{nan, nan, pair.t_r, nan, config.window_factor};
        return rec;
    }
    if (config.kind == EnsembleKind::CentroDoublet && !rec.accepted) {
        return rec;
    }
    rec.transport = transfer_efficiency(h, pair, config.window_factor, config.grid_points);
    return rec;
}

namespace {

constexpr std::uint64_t kChunk = 1 << 15;

struct ChunkResult {
    std::vector<RealizationRecord> accepted;
    std::vector<std::uint64_t> evaluated;  // attempts that went through full analysis
};

CampaignResult run_unselected(const EnsembleConfig& config) {
    const std::uint64_t cap = effective_attempt_cap(config);
    const std::uint64_t count = std::min<std::uint64_t>(cap, config.num_samples);
    CampaignResult result;
    result.records.resize(static_cast<std::size_t>(count));
    parallel_for(static_cast<std::size_t>(count), config.workers, [&](std::size_t i) {
        result.records[i] = evaluate_realization(config, i);
    });
    result.attempts = count;
    if (count < config.num_samples) {
        throw PartialCampaign("ensemble: attempt cap reached before num_samples", std::move(result));
    }
    return result;
}

CampaignResult run_post_selected(const EnsembleConfig& config) {
    const std::uint64_t cap = effective_attempt_cap(config);
    const std::size_t wanted = config.num_samples;
    const std::uint64_t chunks_total = (cap + kChunk - 1) / kChunk;
    const std::size_t wave = std::max<std::size_t>(1, config.workers);

    CampaignResult result;
    std::uint64_t evaluated_in_prefix = 0;
    std::uint64_t next = 0;
    while (result.records.size() < wanted && next < chunks_total) {
        const std::size_t this_wave =
            static_cast<std::size_t>(std::min<std::uint64_t>(wave, chunks_total - next));
        std::vector<ChunkResult> parts(this_wave);
        parallel_for(this_wave, config.workers, [&](std::size_t w) {
            const std::uint64_t begin = (next + w) * kChunk;
            const std::uint64_t end = std::min(cap, begin + kChunk);
            detail::DoubletScreen screen(config.n, config.xi, config.alpha_threshold);
            for (std::uint64_t a = begin; a < end; ++a) {
                if (!screen.may_accept(derive_seed(config.master_seed, a))) continue;
                parts[w].evaluated.push_back(a);
                RealizationRecord rec = evaluate_realization(config, a);
                if (rec.accepted) parts[w].accepted.push_back(std::move(rec));
            }
        });
        for (std::size_t w = 0; w < this_wave && result.records.size() < wanted; ++w) {
            const std::uint64_t begin = (next + w) * kChunk;
            const std::uint64_t end = std::min(cap, begin + kChunk);
            std::uint64_t stop = end;
            for (auto& rec : parts[w].accepted) {
                rec.index = result.records.size();
                const std::uint64_t at = rec.attempt;
                result.records.push_back(std::move(rec));
                if (result.records.size() == wanted) {
                    stop = at + 1;
                    break;
                }
            }
            for (std::uint64_t a : parts[w].evaluated) {
                if (a < stop) ++evaluated_in_prefix;
            }
            result.attempts = stop;
        }
        next += this_wave;
    }
    result.screened_out = result.attempts - evaluated_in_prefix;
    if (result.records.size() < wanted) {
        throw PartialCampaign("ensemble: attempt cap reached after " +
                                  std::to_string(result.records.size()) + " of " +
                                  std::to_string(wanted) + " accepted realizations",
                              std::move(result));
    }
    return result;
}

}  // namespace

CampaignResult run_campaign(const EnsembleConfig& config) {
    validate(config);
    if (config.kind == EnsembleKind::CentroDoublet) return run_post_selected(config);
    return run_unselected(config);
}

std::vector<RealizationRecord> accepted_only(std::span<const RealizationRecord> records) {
    std::vector<RealizationRecord> out;
    for (const auto& r : records) {
        if (r.accepted) out.push_back(r);
    }
    return out;
}

double estimate_vbar2(std::span<const RealizationRecord> records) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& r : records) {
        if (!r.accepted || !r.doublet) continue;
        sum += r.doublet->vnorm2_plus + r.doublet->vnorm2_minus;
        count += 2;
    }
    if (count == 0) throw InvalidArgument("estimate_vbar2: no accepted records");
    return sum / static_cast<double>(count);
}

AnalyticParams analytic_params(double vbar2, double xi, std::size_t n) {
    if (!(xi > 0.0)) throw InvalidArgument("analytic_params: xi must be positive");
    if (n < 4) throw InvalidDimension("analytic_params: n must be >= 4");
    if (!(vbar2 >= 0.0) || !std::isfinite(vbar2)) {
        throw InvalidArgument("analytic_params: vbar2 must be finite and non-negative");
    }
    const double nn = static_cast<double>(n);
    const double xi2 = xi * xi;
    AnalyticParams p;
    p.vbar2 = vbar2;
    p.s0 = vbar2 * nn * std::numbers::e * std::sqrt(1.0 - 2.0 / nn) / (4.0 * std::numbers::pi * xi2);
    p.x0 = vbar2 / (2.0 * xi2);
    p.v_mean = 2.0 * std::numbers::pi * std::numbers::sqrt2 * xi / std::numbers::e / std::pow(nn, 1.5);
    return p;
}

double analytic_ratio_density(double x, const AnalyticParams& p) {
    const double s0 = p.s0;
    const double a = 1.0 + p.x0 + x;
    const double b = 1.0 + p.x0 - x;
    if (s0 == 0.0) {
        // point masses at ±(1 + x0)
        return (a == 0.0 || b == 0.0) ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return (s0 / (s0 * s0 + a * a) + s0 / (s0 * s0 + b * b)) / std::numbers::pi;
}

double analytic_ratio_cdf(double x, const AnalyticParams& p) {
    const double c = 1.0 + p.x0;
    if (p.s0 == 0.0) {
        auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
        return 0.5 * (sgn(x + c) + sgn(x - c));
    }
    return (std::atan((x + c) / p.s0) + std::atan((x - c) / p.s0)) / std::numbers::pi;
}

std::vector<double> analytic_bin_density(std::span<const double> edges, const AnalyticParams& p,
                                         bool renormalize) {
    if (edges.size() < 2) throw InvalidArgument("analytic_bin_density: need at least two edges");
    std::vector<double> out(edges.size() - 1);
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double w = edges[i + 1] - edges[i];
        if (!(w > 0.0)) throw InvalidArgument("analytic_bin_density: edges must increase");
        const double m = analytic_ratio_cdf(edges[i + 1], p) - analytic_ratio_cdf(edges[i], p);
        out[i] = m / w;
        mass += m;
    }
    if (renormalize && mass > 0.0) {
        for (auto& v : out) v /= mass;
    }
    return out;
}

std::size_t Histogram::total() const noexcept {
    std::size_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

Histogram make_histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
    if (bins < 1 || !(hi > lo)) throw InvalidArgument("histogram: need bins >= 1 and hi > lo");
    Histogram h;
    h.bin_edges.resize(bins + 1);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.bin_edges[i] = lo + width * static_cast<double>(i);
    h.bin_edges[bins] = hi;
    h.counts.assign(bins, 0);
    for (double v : values) {
        if (!(v >= lo && v <= hi)) continue;
        auto idx = static_cast<std::size_t>((v - lo) / width);
        if (idx >= bins) idx = bins - 1;
        // Guard against rounding in the division at bin edges.
        while (idx > 0 && v < h.bin_edges[idx]) --idx;
        while (idx + 1 < bins && v >= h.bin_edges[idx + 1]) ++idx;
        ++h.counts[idx];
    }
    const double total = static_cast<double>(h.total());
    h.density.assign(bins, 0.0);
    if (total > 0.0) {
        for (std::size_t i = 0; i < bins; ++i) {
            const double w = h.bin_edges[i + 1] - h.bin_edges[i];
            h.density[i] = static_cast<double>(h.counts[i]) / (total * w);
        }
    }
    return h;
}

Histogram ratio_histogram(std::span<const RealizationRecord> records, std::size_t bins, double lo,
                          double hi) {
    if (bins < 5) throw InvalidArgument("ratio_histogram: bins must be >= 5");
    std::vector<double> values;
    for (const auto& r : records) {
        if (r.degenerate || !(r.transport.t_peak > 0.0)) continue;
        values.push_back(r.transport.ratio);
    }
    if (values.empty()) throw InvalidArgument("ratio_histogram: no usable records");
    return make_histogram(values, bins, lo, hi);
}

Histogram efficiency_histogram(std::span<const RealizationRecord> records, std::size_t bins) {
    if (bins < 5) throw InvalidArgument("efficiency_histogram: bins must be >= 5");
    std::vector<double> values;
    for (const auto& r : records) {
        if (r.degenerate || !std::isfinite(r.transport.p_max)) continue;
        values.push_back(std::clamp(r.transport.p_max, 0.0, 1.0));
    }
    if (values.empty()) throw InvalidArgument("efficiency_histogram: no usable records");
    return make_histogram(values, bins, 0.0, 1.0);
}

double distribution_distance(const Histogram& hist, const std::function<double(double)>& density,
                             std::size_t subdivisions) {
    const std::size_t bins = hist.bins();
    if (bins == 0 || hist.total() == 0) throw InvalidArgument("distribution_distance: empty histogram");
    subdivisions = std::max<std::size_t>(1, subdivisions);
    std::vector<double> model(bins, 0.0);
    double model_total = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        const double lo = hist.bin_edges[i];
        const double w = (hist.bin_edges[i + 1] - lo) / static_cast<double>(subdivisions);
        double mass = 0.0;
        for (std::size_t s = 0; s < subdivisions; ++s) {
            mass += density(lo + (static_cast<double>(s) + 0.5) * w) * w;
        }
        model[i] = mass;
        model_total += mass;
    }
    if (!(model_total > 0.0)) return 1.0;
    const double hist_total = static_cast<double>(hist.total());
    double tv = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        tv += std::abs(static_cast<double>(hist.counts[i]) / hist_total - model[i] / model_total);
    }
    return 0.5 * tv;
}

}  // namespace qtnet
