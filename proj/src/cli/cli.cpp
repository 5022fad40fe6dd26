#include "qtnet/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config_file.hpp"
#include "qtnet/ensemble_stats.hpp"
#include "qtnet/error.hpp"
#include "qtnet/fmo_network.hpp"
#include "qtnet/genetic_optimizer.hpp"
#include "qtnet/io.hpp"

#ifndef QTNET_VERSION
#define QTNET_VERSION "0.0.0"
#endif

namespace qtnet::cli {

std::string tool_version() { return QTNET_VERSION; }

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Thrown for bad flag/config values that only show up after parsing.
struct UsageError : Error {
    using Error::Error;
};

std::size_t default_workers() {
    if (const char* env = std::getenv("QTNET_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

json number(double v) {
    if (std::isfinite(v)) return v;
    return io::format_double(v);
}

struct Common {
    std::string out_dir = ".";
    std::string config_path;
    std::size_t workers = default_workers();
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out-dir", c.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--config", c.config_path, "Key-value config file; flags take precedence");
    sub->add_option("--workers", c.workers, "Worker threads (default: $QTNET_WORKERS or 1)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

class OutputSet {
public:
    explicit OutputSet(const std::string& dir) : dir_(dir) {}

    void write(const std::string& name, const std::string& content) {
        fs::create_directories(dir_);
        const fs::path path = dir_ / name;
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open output file " + path.string());
        f << content;
        if (!f) throw Error("failed writing " + path.string());
        paths_.push_back(path.string());
    }

    template <class Fn>
    void write_with(const std::string& name, Fn&& fn) {
        std::ostringstream s;
        fn(s);
        write(name, s.str());
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    [[nodiscard]] const std::vector<std::string>& paths() const noexcept { return paths_; }
    [[nodiscard]] const fs::path& dir() const noexcept { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> paths_;
};

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// The manifest is the only output carrying a timestamp or the worker count.
void write_manifest(OutputSet& outputs, const std::string& command, const json& config,
                    std::uint64_t master_seed, std::size_t workers) {
    json m;
    m["command"] = command;
    m["tool_version"] = tool_version();
    m["master_seed"] = master_seed;
    m["config"] = config;
    m["workers"] = workers;
    m["outputs"] = outputs.paths();
    m["timestamp"] = utc_timestamp();
    const fs::path path = outputs.dir() / "manifest.json";
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open output file " + path.string());
    f << m.dump(2) << "\n";
}

std::vector<int> parse_label_list(const std::string& text) {
    std::vector<int> labels;
    std::stringstream s(text);
    std::string item;
    while (std::getline(s, item, ',')) {
        item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
        if (item.empty()) continue;
        try {
            std::size_t pos = 0;
            labels.push_back(std::stoi(item, &pos));
            if (pos != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError("--free: '" + item + "' is not a site label");
        }
    }
    return labels;
}

json ensemble_config_json(const EnsembleConfig& c, std::size_t bins, double ratio_max,
                          std::size_t eff_bins) {
    json j;
    j["kind"] = std::string(to_string(c.kind));
    j["n"] = c.n;
    j["xi"] = c.xi;
    j["alpha"] = c.alpha_threshold;
    j["samples"] = c.num_samples;
    j["window"] = c.window_factor;
    j["grid"] = c.grid_points;
    j["seed"] = c.master_seed;
    j["attempt_cap"] = effective_attempt_cap(c);
    j["bins"] = bins;
    j["ratio_max"] = ratio_max;
    j["eff_bins"] = eff_bins;
    return j;
}

json ga_config_json(const GAConfig& g) {
    json j;
    j["candidates"] = g.perturbations_per_generation;
    j["sigma0"] = g.sigma0;
    j["min_norm"] = g.min_vector_norm;
    j["shortfall"] = g.target_shortfall;
    j["generations"] = g.max_generations;
    j["free"] = g.free_site_labels;
    j["window"] = g.window_factor;
    j["grid"] = g.grid_points;
    j["seed"] = g.master_seed;
    j["always_adopt"] = g.always_adopt;
    return j;
}

// ---------------------------------------------------------------- ensemble

struct EnsembleArgs {
    Common common;
    EnsembleConfig config;
    std::string kind = "centro-doublet";
    std::size_t bins = 50;
    double ratio_max = 5.0;
    std::size_t eff_bins = 20;
};

void setup_ensemble(CLI::App* sub, EnsembleArgs& a) {
    add_common(sub, a.common);
    sub->add_option("--kind", a.kind, "goe | centro | centro-doublet")
        ->check(CLI::IsMember({"goe", "centro", "centro-doublet"}))
        ->capture_default_str();
    sub->add_option("--n", a.config.n, "Network size (even, >= 4)")->capture_default_str();
    sub->add_option("--xi", a.config.xi, "Disorder scale")->capture_default_str();
    sub->add_option("--alpha", a.config.alpha_threshold, "Doublet post-selection threshold")
        ->capture_default_str();
    sub->add_option("--samples", a.config.num_samples, "Realizations (accepted ones for centro-doublet)")
        ->capture_default_str();
    sub->add_option("--seed", a.config.master_seed, "Master seed")->capture_default_str();
    sub->add_option("--window", a.config.window_factor, "Window in units of T_R")->capture_default_str();
    sub->add_option("--grid", a.config.grid_points, "Time grid points")->capture_default_str();
    sub->add_option("--attempt-cap", a.config.attempt_cap, "Maximum attempts (0: default)")
        ->capture_default_str();
    sub->add_option("--bins", a.bins, "Ratio histogram bins")->capture_default_str();
    sub->add_option("--ratio-max", a.ratio_max, "Upper edge of the ratio histogram")->capture_default_str();
    sub->add_option("--eff-bins", a.eff_bins, "Efficiency histogram bins")->capture_default_str();
}

int cmd_ensemble(EnsembleArgs& a, std::ostream& out) {
    a.config.kind = parse_ensemble_kind(a.kind);
    a.config.workers = a.common.workers;
    validate(a.config);
    if (a.bins < 5) throw UsageError("--bins must be at least 5");
    if (!(a.ratio_max > 0.0)) throw UsageError("--ratio-max must be positive");
    if (a.eff_bins < 5) throw UsageError("--eff-bins must be at least 5");

    CampaignResult result;
    bool partial = false;
    try {
        result = run_campaign(a.config);
    } catch (const PartialCampaign& e) {
        result = e.partial();
        partial = true;
    }

    const auto& recs = result.records;
    const json cfg = ensemble_config_json(a.config, a.bins, a.ratio_max, a.eff_bins);
    OutputSet outputs(a.common.out_dir);
    outputs.write_with("records.csv", [&](std::ostream& s) { io::write_records_csv(s, recs, a.config); });

    // A partial campaign may end without a single usable record; the
    // histograms are then omitted rather than written with undefined density.
    const bool usable = std::any_of(recs.begin(), recs.end(), [](const auto& r) {
        return !r.degenerate && r.transport.t_peak > 0.0;
    });
    Histogram ratio;
    if (usable) {
        ratio = ratio_histogram(recs, a.bins, 0.0, a.ratio_max);
        outputs.write_with("ratio_hist.csv", [&](std::ostream& s) { io::write_histogram_csv(s, ratio); });
        const Histogram eff = efficiency_histogram(recs, a.eff_bins);
        outputs.write_with("efficiency_hist.csv", [&](std::ostream& s) { io::write_histogram_csv(s, eff); });
    }

    json meta;
    meta["command"] = "ensemble";
    meta["config"] = cfg;
    meta["partial"] = partial;
    meta["attempts"] = result.attempts;
    meta["screened_out"] = result.screened_out;
    meta["records"] = recs.size();

    std::size_t accepted = 0, degenerate = 0, above = 0, timed = 0;
    double p_sum = 0.0;
    std::size_t p_count = 0;
    for (const auto& r : recs) {
        if (r.accepted) ++accepted;
        if (r.degenerate) {
            ++degenerate;
            continue;
        }
        if (std::isfinite(r.transport.p_max)) {
            p_sum += r.transport.p_max;
            ++p_count;
        }
        if (r.transport.t_peak > 0.0) {
            ++timed;
            if (r.transport.ratio > 1.0) ++above;
        }
    }
    meta["accepted"] = accepted;
    meta["degenerate"] = degenerate;
    meta["acceptance_fraction"] = result.acceptance_fraction();
    meta["mean_p_max"] = number(p_count ? p_sum / static_cast<double>(p_count) : std::nan(""));
    meta["fraction_ratio_above_1"] =
        number(timed ? static_cast<double>(above) / static_cast<double>(timed) : std::nan(""));
    meta["ratio_hist_in_range"] = ratio.total();

    const bool has_doublets = std::any_of(recs.begin(), recs.end(),
                                          [](const auto& r) { return r.accepted && r.doublet; });
    if (has_doublets) {
        const double vbar2 = estimate_vbar2(recs);
        const AnalyticParams p = analytic_params(vbar2, a.config.xi, a.config.n);
        const auto curve = analytic_bin_density(ratio.bin_edges, p, true);
        outputs.write_with("analytic_curve.csv", [&](std::ostream& s) {
            io::write_binned_density_csv(s, ratio.bin_edges, curve);
        });
        meta["vbar2"] = vbar2;
        meta["s0"] = p.s0;
        meta["x0"] = p.x0;
        meta["v_mean"] = p.v_mean;
        meta["analytic_normalization"] = "renormalized over the ratio histogram range";
        meta["tv_distance"] = number(ratio.total() == 0
                                         ? std::nan("")
                                         : distribution_distance(ratio, [&](double x) {
                                               return analytic_ratio_density(x, p);
                                           }));
    } else {
        meta["vbar2"] = nullptr;
        meta["analytic_normalization"] = "not computed: no accepted doublet records";
    }
    outputs.write_json("metadata.json", meta);
    write_manifest(outputs, "ensemble", cfg, a.config.master_seed, a.common.workers);

    out << "ensemble " << a.kind << ": " << recs.size() << " records, " << result.attempts
        << " attempts" << (partial ? " (partial: attempt cap reached)" : "") << "\n";
    return partial ? kPartial : kOk;
}

// ---------------------------------------------------------------- fmo

struct FmoArgs {
    Common common;
    std::string sites_path;
    int in_label = 8;
    int out_label = 3;
    double coupling = 1.0;
    double window = kDefaultWindowFactor;
    std::size_t grid = kDefaultGridPoints;
};

void add_fmo_common(CLI::App* sub, FmoArgs& a) {
    add_common(sub, a.common);
    sub->add_option("--sites", a.sites_path, "Site table CSV (default: bundled FMO table)");
    sub->add_option("--in-site", a.in_label, "Input site label")->capture_default_str();
    sub->add_option("--out-site", a.out_label, "Output site label")->capture_default_str();
    sub->add_option("--coupling", a.coupling, "Dipole coupling constant")->capture_default_str();
    sub->add_option("--window", a.window, "Window in units of T_R")->capture_default_str();
    sub->add_option("--grid", a.grid, "Time grid points")->capture_default_str();
}

DipoleNetwork load_network(const FmoArgs& a) {
    DipoleNetwork net;
    if (a.sites_path.empty()) {
        std::istringstream s{std::string(bundled_fmo_table())};
        net = load_sites(s, a.in_label, a.out_label);
    } else {
        try {
            net = load_sites_file(a.sites_path, a.in_label, a.out_label);
        } catch (const ParseError& e) {
            throw UsageError(a.sites_path + ": " + e.what());
        }
    }
    if (!(a.coupling > 0.0) || !std::isfinite(a.coupling)) {
        throw UsageError("--coupling must be positive and finite");
    }
    net.set_coupling_constant(a.coupling);
    return net;
}

json fmo_config_json(const FmoArgs& a) {
    json j;
    j["sites"] = a.sites_path.empty() ? "bundled" : a.sites_path;
    j["in_site"] = a.in_label;
    j["out_site"] = a.out_label;
    j["coupling"] = a.coupling;
    j["window"] = a.window;
    j["grid"] = a.grid;
    return j;
}

std::vector<int> labels_of(const DipoleNetwork& net) {
    std::vector<int> labels;
    for (const auto& s : net.sites()) labels.push_back(s.label);
    return labels;
}

int cmd_fmo_build(FmoArgs& a, std::ostream& out) {
    const DipoleNetwork net = load_network(a);
    const Hamiltonian h = dipole_hamiltonian(net);
    const auto labels = labels_of(net);
    OutputSet outputs(a.common.out_dir);
    outputs.write_with("hamiltonian.csv", [&](std::ostream& s) { io::write_hamiltonian_csv(s, h, labels); });
    outputs.write_with("sites.csv", [&](std::ostream& s) { io::write_sites_csv(s, net); });
    json meta;
    meta["command"] = "fmo build";
    meta["config"] = fmo_config_json(a);
    meta["labels"] = labels;
    outputs.write_json("metadata.json", meta);
    write_manifest(outputs, "fmo build", meta["config"], 0, a.common.workers);
    out << "fmo build: " << net.size() << "x" << net.size() << " Hamiltonian\n";
    return kOk;
}

void write_transport_csv(std::ostream& s, const TransportRecord& t) {
    s << "p_max,t_peak,t_r,ratio,window_factor\n"
      << io::format_double(t.p_max) << ',' << io::format_double(t.t_peak) << ','
      << io::format_double(t.t_r) << ',' << io::format_double(t.ratio) << ','
      << io::format_double(t.window_factor) << '\n';
}

int cmd_fmo_transport(FmoArgs& a, std::ostream& out) {
    const DipoleNetwork net = load_network(a);
    const TransportRecord t = fmo_transport(net, a.window, a.grid);
    OutputSet outputs(a.common.out_dir);
    outputs.write_with("transport.csv", [&](std::ostream& s) { write_transport_csv(s, t); });
    json meta;
    meta["command"] = "fmo transport";
    meta["config"] = fmo_config_json(a);
    meta["p_max"] = t.p_max;
    meta["t_over_t_r"] = number(t.t_peak / t.t_r);
    outputs.write_json("metadata.json", meta);
    write_manifest(outputs, "fmo transport", meta["config"], 0, a.common.workers);
    out << "fmo transport: P = " << io::format_double(t.p_max)
        << ", t/T_R = " << io::format_double(t.t_peak / t.t_r) << "\n";
    return kOk;
}

int cmd_fmo_diagnostics(FmoArgs& a, std::ostream& out) {
    const DipoleNetwork net = load_network(a);
    const TransportRecord t = fmo_transport(net, a.window, a.grid);
    const FmoDiagnostics d = fmo_diagnostics(net);
    OutputSet outputs(a.common.out_dir);
    outputs.write_with("diagnostics.csv", [&](std::ostream& s) {
        s << "p_max,t_peak,t_r,alpha,epsilon\n"
          << io::format_double(t.p_max) << ',' << io::format_double(t.t_peak) << ','
          << io::format_double(t.t_r) << ',' << io::format_double(d.alpha) << ','
          << io::format_double(d.epsilon) << '\n';
    });
    json meta;
    meta["command"] = "fmo diagnostics";
    meta["config"] = fmo_config_json(a);
    outputs.write_json("metadata.json", meta);
    write_manifest(outputs, "fmo diagnostics", meta["config"], 0, a.common.workers);
    out << "fmo diagnostics: alpha = " << io::format_double(d.alpha)
        << ", epsilon = " << io::format_double(d.epsilon) << "\n";
    return kOk;
}

struct GaArgs {
    FmoArgs fmo;
    GAConfig ga;
    std::string free = "1,2,4,5,6,7";
};

void add_ga_options(CLI::App* sub, GaArgs& a) {
    add_fmo_common(sub, a.fmo);
    sub->add_option("--seed", a.ga.master_seed, "Master seed")->capture_default_str();
    sub->add_option("--candidates", a.ga.perturbations_per_generation, "Candidates per generation")
        ->capture_default_str();
    sub->add_option("--sigma0", a.ga.sigma0, "Initial perturbation scale (sigma_k = sigma0/k)")
        ->capture_default_str();
    sub->add_option("--min-norm", a.ga.min_vector_norm, "Minimum perturbed vector norm")
        ->capture_default_str();
    sub->add_option("--shortfall", a.ga.target_shortfall, "Stop once P >= 1 - shortfall")
        ->capture_default_str();
    sub->add_option("--generations", a.ga.max_generations, "Maximum generations")->capture_default_str();
    sub->add_option("--free", a.free, "Comma-separated labels of the optimized dipoles")
        ->capture_default_str();
    sub->add_flag("--always-adopt", a.ga.always_adopt, "Adopt each generation's best unconditionally");
}

void finish_ga_args(GaArgs& a) {
    a.ga.free_site_labels = parse_label_list(a.free);
    a.ga.window_factor = a.fmo.window;
    a.ga.grid_points = a.fmo.grid;
    a.ga.workers = a.fmo.common.workers;
}

json ga_args_json(const GaArgs& a) {
    json j = fmo_config_json(a.fmo);
    j["ga"] = ga_config_json(a.ga);
    return j;
}

int cmd_fmo_optimize(GaArgs& a, std::ostream& out) {
    finish_ga_args(a);
    const DipoleNetwork net = load_network(a.fmo);
    validate(a.ga, net);
    const GATrajectory traj = run_ga(net, a.ga);
    OutputSet outputs(a.fmo.common.out_dir);
    outputs.write_with("trajectory.csv", [&](std::ostream& s) { io::write_trajectory_csv(s, traj); });
    outputs.write_with("final_sites.csv", [&](std::ostream& s) { io::write_sites_csv(s, traj.final_network); });
    json meta;
    meta["command"] = "fmo optimize";
    meta["config"] = ga_args_json(a);
    meta["seed_p"] = traj.seed_p;
    meta["seed_alpha"] = traj.seed_diagnostics.alpha;
    meta["seed_epsilon"] = traj.seed_diagnostics.epsilon;
    meta["final_p"] = traj.final_p();
    meta["converged"] = traj.converged;
    meta["generations_used"] = traj.generations_used;
    outputs.write_json("metadata.json", meta);
    write_manifest(outputs, "fmo optimize", meta["config"], a.ga.master_seed, a.fmo.common.workers);
    out << "fmo optimize: P " << io::format_double(traj.seed_p) << " -> "
        << io::format_double(traj.final_p()) << " in " << traj.generations_used << " generations"
        << (traj.converged ? "" : " (not converged)") << "\n";
    return kOk;
}

struct ScatterArgs {
    GaArgs g;
    std::size_t fmo_batch = 50;
    std::size_t random_batch = 50;
    double spread = kDefaultVicinitySpread;
    std::size_t orientation_bins = 20;
};

double median(std::vector<double> v) {
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

int cmd_fmo_scatter(ScatterArgs& a, std::ostream& out) {
    finish_ga_args(a.g);
    const DipoleNetwork net = load_network(a.g.fmo);
    validate(a.g.ga, net);
    if (a.fmo_batch + a.random_batch == 0) throw UsageError("scatter: both batches are empty");
    if (!(a.spread >= 0.0)) throw UsageError("--spread must be non-negative");
    if (a.orientation_bins < 1) throw UsageError("--orientation-bins must be positive");

    std::vector<GASeed> seeds = fmo_vicinity_seeds(net, a.g.ga.free_site_labels, a.fmo_batch, a.spread,
                                                   derive_seed(a.g.ga.master_seed, 0x766963ULL));
    auto random = random_orientation_seeds(net, a.g.ga.free_site_labels, a.random_batch,
                                           derive_seed(a.g.ga.master_seed, 0x726e64ULL));
    seeds.insert(seeds.end(), std::make_move_iterator(random.begin()), std::make_move_iterator(random.end()));
    const ScatterResult res = scatter_ensemble(seeds, a.g.ga);

    std::vector<GATrajectory> fmo_trajs(res.trajectories.begin(),
                                        res.trajectories.begin() + static_cast<std::ptrdiff_t>(a.fmo_batch));
    OutputSet outputs(a.g.fmo.common.out_dir);
    outputs.write_with("scatter.csv", [&](std::ostream& s) { io::write_scatter_csv(s, res.points); });

    json meta;
    meta["command"] = "fmo scatter";
    json cfg = ga_args_json(a.g);
    cfg["fmo_batch"] = a.fmo_batch;
    cfg["random_batch"] = a.random_batch;
    cfg["spread"] = a.spread;
    cfg["orientation_bins"] = a.orientation_bins;
    meta["config"] = cfg;

    if (!fmo_trajs.empty()) {
        const OrientationStatistics stats =
            orientation_statistics(fmo_trajs, net, a.g.ga.free_site_labels, a.orientation_bins);
        outputs.write_with("orientation.csv", [&](std::ostream& s) { io::write_orientation_csv(s, stats); });
        outputs.write_with("orientation_summary.csv", [&](std::ostream& s) {
            s << "site,mean_deviation,bin_left,bin_right,count\n";
            for (const auto& site : stats.sites) {
                for (std::size_t b = 0; b < site.deviation_counts.size(); ++b) {
                    s << site.label << ',' << io::format_double(site.mean_deviation) << ','
                      << io::format_double(site.deviation_edges[b]) << ','
                      << io::format_double(site.deviation_edges[b + 1]) << ',' << site.deviation_counts[b]
                      << '\n';
                }
            }
        });
        json mean_dev;
        for (const auto& site : stats.sites) mean_dev[std::to_string(site.label)] = site.mean_deviation;
        meta["fmo_mean_deviation"] = mean_dev;
    }

    for (const SeedKind kind : {SeedKind::FmoPerturbed, SeedKind::Random}) {
        std::vector<double> p;
        std::size_t converged = 0;
        for (const auto& pt : res.points) {
            if (pt.kind != kind) continue;
            p.push_back(pt.p);
            if (pt.converged) ++converged;
        }
        json k;
        k["runs"] = p.size();
        k["converged"] = converged;
        k["median_final_p"] = number(median(p));
        meta[std::string(to_string(kind))] = k;
    }
    outputs.write_json("metadata.json", meta);
    write_manifest(outputs, "fmo scatter", cfg, a.g.ga.master_seed, a.g.fmo.common.workers);
    out << "fmo scatter: " << res.points.size() << " runs\n";
    return kOk;
}

// ---------------------------------------------------------------- analytic

struct AnalyticArgs {
    Common common;
    std::optional<double> vbar2;
    std::string from_records;
    std::optional<double> xi;
    std::optional<std::size_t> n;
    double x_min = 0.0;
    double x_max = 5.0;
    std::size_t bins = 500;
    bool renormalize = false;
};

void setup_analytic(CLI::App* sub, AnalyticArgs& a) {
    add_common(sub, a.common);
    auto* v = sub->add_option("--vbar2", a.vbar2, "Mean squared doublet coupling");
    auto* r = sub->add_option("--from-records", a.from_records, "Records CSV to estimate vbar2 from");
    v->excludes(r);
    sub->add_option("--xi", a.xi, "Disorder scale (default: from records)");
    sub->add_option("--n", a.n, "Network size (default: from records)");
    sub->add_option("--x-min", a.x_min, "Grid lower edge")->capture_default_str();
    sub->add_option("--x-max", a.x_max, "Grid upper edge")->capture_default_str();
    sub->add_option("--bins", a.bins, "Grid cells")->capture_default_str();
    sub->add_flag("--renormalize", a.renormalize, "Renormalize the curve to unit mass on the grid");
}

int cmd_analytic(AnalyticArgs& a, std::ostream& out) {
    double vbar2 = 0.0;
    std::optional<double> xi = a.xi;
    std::optional<std::size_t> n = a.n;
    std::string source = "flag";
    if (a.vbar2) {
        vbar2 = *a.vbar2;
    } else if (!a.from_records.empty()) {
        std::ifstream f(a.from_records);
        if (!f) throw UsageError("cannot open records file " + a.from_records);
        io::RecordsFile file;
        try {
            file = io::read_records_csv(f);
        } catch (const ParseError& e) {
            throw UsageError(a.from_records + ": " + e.what());
        }
        vbar2 = estimate_vbar2(file.records);
        if (!xi) xi = file.xi;
        if (!n) n = file.n;
        source = a.from_records;
    } else {
        throw UsageError("analytic: one of --vbar2 or --from-records is required");
    }
    if (!xi || !n) throw UsageError("analytic: --xi and --n are required with --vbar2");
    if (!(a.x_max > a.x_min)) throw UsageError("analytic: --x-max must exceed --x-min");
    if (a.bins < 1) throw UsageError("analytic: --bins must be positive");
    const AnalyticParams p = analytic_params(vbar2, *xi, *n);

    std::vector<double> edges(a.bins + 1);
    for (std::size_t i = 0; i <= a.bins; ++i) {
        edges[i] = a.x_min + (a.x_max - a.x_min) * static_cast<double>(i) / static_cast<double>(a.bins);
    }
    const auto curve = analytic_bin_density(edges, p, a.renormalize);
    OutputSet outputs(a.common.out_dir);
    outputs.write_with("analytic_curve.csv", [&](std::ostream& s) {
        io::write_binned_density_csv(s, edges, curve);
    });
    json cfg;
    cfg["vbar2_source"] = source;
    cfg["xi"] = *xi;
    cfg["n"] = *n;
    cfg["x_min"] = a.x_min;
    cfg["x_max"] = a.x_max;
    cfg["bins"] = a.bins;
    cfg["renormalize"] = a.renormalize;
    json meta;
    meta["command"] = "analytic";
    meta["config"] = cfg;
    meta["vbar2"] = vbar2;
    meta["s0"] = p.s0;
    meta["x0"] = p.x0;
    meta["v_mean"] = p.v_mean;
    meta["mass_on_grid"] = analytic_ratio_cdf(a.x_max, p) - analytic_ratio_cdf(a.x_min, p);
    outputs.write_json("metadata.json", meta);
    write_manifest(outputs, "analytic", cfg, 0, a.common.workers);
    out << "analytic: s0 = " << io::format_double(p.s0) << ", x0 = " << io::format_double(p.x0) << "\n";
    return kOk;
}

// ---------------------------------------------------------------- config

std::string section_of(const CLI::App* leaf) {
    std::string name = leaf->get_name();
    for (const CLI::App* p = leaf->get_parent(); p && p->get_parent(); p = p->get_parent()) {
        name = p->get_name() + "." + name;
    }
    return name;
}

bool section_known(const CLI::App& root, const std::string& section) {
    std::function<bool(const CLI::App*, const std::string&)> walk = [&](const CLI::App* app,
                                                                          const std::string& prefix) {
        for (const CLI::App* sub : app->get_subcommands({})) {
            const std::string full = prefix.empty() ? sub->get_name() : prefix + "." + sub->get_name();
            if (full == section || sub->get_name() == section || walk(sub, full)) return true;
        }
        return false;
    };
    return walk(&root, "");
}

void apply_config(CLI::App& root, CLI::App* leaf, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open config file " + path);
    const auto entries = parse_config(f, path);
    const std::string full = section_of(leaf);
    for (const auto& e : entries) {
        const std::string where = path + ":" + std::to_string(e.line) + ": ";
        if (!e.section.empty()) {
            if (!section_known(root, e.section)) {
                throw UsageError(where + "unknown section [" + e.section + "]");
            }
            const bool matches = e.section == full || e.section == leaf->get_name() ||
                                 full.rfind(e.section + ".", 0) == 0;
            if (!matches) continue;
        }
        if (e.key == "config") throw UsageError(where + "'config' cannot be set from a config file");
        CLI::Option* opt = leaf->get_option_no_throw("--" + e.key);
        if (!opt) throw UsageError(where + "unknown key '" + e.key + "' for command '" + full + "'");
        if (opt->count() > 0) continue;  // flags take precedence
        try {
            opt->add_result(e.value);
            opt->run_callback();
        } catch (const CLI::Error& err) {
            throw UsageError(where + "key '" + e.key + "': " + err.what());
        }
    }
}

const CLI::App* leaf_of(const CLI::App& app) {
    const CLI::App* cur = &app;
    for (;;) {
        const auto subs = cur->get_subcommands();
        if (subs.empty()) return cur;
        cur = subs.front();
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Transport statistics on disordered networks and dipole-network design", "qtnet"};
    app.set_version_flag("--version", tool_version());
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    std::function<int()> action;
    std::string config_path;
    std::vector<std::pair<CLI::App*, std::string*>> config_slots;

    auto ens = std::make_unique<EnsembleArgs>();
    auto* ens_cmd = app.add_subcommand("ensemble", "Monte-Carlo campaign over a matrix ensemble");
    setup_ensemble(ens_cmd, *ens);
    ens_cmd->callback([&] { action = [&] { return cmd_ensemble(*ens, out); }; });
    config_slots.emplace_back(ens_cmd, &ens->common.config_path);

    auto* fmo_cmd = app.add_subcommand("fmo", "FMO dipole network: build, transport, diagnostics, GA");
    fmo_cmd->require_subcommand(1);

    auto build = std::make_unique<FmoArgs>();
    auto* build_cmd = fmo_cmd->add_subcommand("build", "Emit the dipole Hamiltonian");
    add_fmo_common(build_cmd, *build);
    build_cmd->callback([&] { action = [&] { return cmd_fmo_build(*build, out); }; });
    config_slots.emplace_back(build_cmd, &build->common.config_path);

    auto transport = std::make_unique<FmoArgs>();
    auto* transport_cmd = fmo_cmd->add_subcommand("transport", "Transfer efficiency of the network");
    add_fmo_common(transport_cmd, *transport);
    transport_cmd->callback([&] { action = [&] { return cmd_fmo_transport(*transport, out); }; });
    config_slots.emplace_back(transport_cmd, &transport->common.config_path);

    auto diag = std::make_unique<FmoArgs>();
    auto* diag_cmd = fmo_cmd->add_subcommand("diagnostics", "Transfer efficiency, alpha and epsilon");
    add_fmo_common(diag_cmd, *diag);
    diag_cmd->callback([&] { action = [&] { return cmd_fmo_diagnostics(*diag, out); }; });
    config_slots.emplace_back(diag_cmd, &diag->common.config_path);

    auto opt = std::make_unique<GaArgs>();
    auto* opt_cmd = fmo_cmd->add_subcommand("optimize", "Evolve dipole orientations from one seed");
    add_ga_options(opt_cmd, *opt);
    opt_cmd->callback([&] { action = [&] { return cmd_fmo_optimize(*opt, out); }; });
    config_slots.emplace_back(opt_cmd, &opt->fmo.common.config_path);

    auto sc = std::make_unique<ScatterArgs>();
    auto* sc_cmd = fmo_cmd->add_subcommand("scatter", "GA batches from FMO-vicinity and random seeds");
    add_ga_options(sc_cmd, sc->g);
    sc_cmd->add_option("--fmo-batch", sc->fmo_batch, "FMO-seeded runs")->capture_default_str();
    sc_cmd->add_option("--random-batch", sc->random_batch, "Randomly seeded runs")->capture_default_str();
    sc_cmd->add_option("--spread", sc->spread, "Perturbation scale of FMO-vicinity seeds")
        ->capture_default_str();
    sc_cmd->add_option("--orientation-bins", sc->orientation_bins, "Angular deviation histogram bins")
        ->capture_default_str();
    sc_cmd->callback([&] { action = [&] { return cmd_fmo_scatter(*sc, out); }; });
    config_slots.emplace_back(sc_cmd, &sc->g.fmo.common.config_path);

    auto an = std::make_unique<AnalyticArgs>();
    auto* an_cmd = app.add_subcommand("analytic", "Analytic inverse-transfer-time density on a grid");
    setup_analytic(an_cmd, *an);
    an_cmd->callback([&] { action = [&] { return cmd_analytic(*an, out); }; });
    config_slots.emplace_back(an_cmd, &an->common.config_path);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
        CLI::App* leaf = const_cast<CLI::App*>(leaf_of(app));
        for (auto& [cmd, path] : config_slots) {
            if (cmd == leaf && !path->empty()) apply_config(app, leaf, *path);
        }
        if (!action) throw UsageError("no command given");
        return action();
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << tool_version() << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const UnsupportedSize& e) {
        err << "error: " << e.what() << "\n";
        return kValidation;
    } catch (const PartialCampaign& e) {
        err << "error: " << e.what() << "\n";
        return kPartial;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const DegeneratePair& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace qtnet::cli
