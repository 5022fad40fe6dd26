#include "qtnet/io.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "qtnet/error.hpp"

namespace qtnet::io {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kRecordColumns[] = {
    "index",    "seed",      "ensemble",    "n",            "xi",     "p_max",   "t_peak",
    "t_r",      "ratio",     "alpha",       "v_signed",     "e_site", "vnorm2_plus",
    "vnorm2_minus", "s_plus", "s_minus",    "delta_s",      "rate_eff", "accepted",
    "resonant_flag"};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream s(line);
    while (std::getline(s, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ParseError("records: malformed number '" + s + "'", line);
    }
    return v;
}

}  // namespace

void write_records_csv(std::ostream& out, std::span<const RealizationRecord> records,
                       const EnsembleConfig& config) {
    bool first = true;
    for (const char* c : kRecordColumns) {
        out << (first ? "" : ",") << c;
        first = false;
    }
    out << '\n';
    const std::string kind(to_string(config.kind));
    for (const auto& r : records) {
        const auto& t = r.transport;
        out << r.index << ',' << r.seed << ',' << kind << ',' << config.n << ','
            << format_double(config.xi) << ',' << format_double(t.p_max) << ','
            << format_double(t.t_peak) << ',' << format_double(t.t_r) << ','
            << format_double(t.ratio) << ',';
        if (r.doublet) {
            const auto& d = *r.doublet;
            out << format_double(d.alpha) << ',' << format_double(d.v_signed) << ','
                << format_double(d.e_site) << ',' << format_double(d.vnorm2_plus) << ','
                << format_double(d.vnorm2_minus) << ',' << format_double(d.s_plus) << ','
                << format_double(d.s_minus) << ',' << format_double(d.delta_s) << ','
                << format_double(d.rate_eff) << ',' << (r.accepted ? 1 : 0) << ','
                << (d.resonant_flag ? 1 : 0) << '\n';
        } else {
            out << ",,,,,,,,," << (r.accepted ? 1 : 0) << ",\n";
        }
    }
}

RecordsFile read_records_csv(std::istream& in) {
    RecordsFile file;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError("records: empty file", 1);
    ++lineno;
    const auto header = split_csv(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* c : kRecordColumns) {
        if (!col.count(c)) throw ParseError(std::string("records: missing column ") + c, lineno);
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != header.size()) throw ParseError("records: wrong column count", lineno);
        auto get = [&](const char* c) -> const std::string& { return cells[col[c]]; };
        RealizationRecord r;
        r.index = static_cast<std::size_t>(parse_double(get("index"), lineno));
        r.seed = std::stoull(get("seed"));
        file.ensemble = get("ensemble");
        file.n = static_cast<std::size_t>(parse_double(get("n"), lineno));
        file.xi = parse_double(get("xi"), lineno);
        r.transport.p_max = parse_double(get("p_max"), lineno);
        r.transport.t_peak = parse_double(get("t_peak"), lineno);
        r.transport.t_r = parse_double(get("t_r"), lineno);
        r.transport.ratio = parse_double(get("ratio"), lineno);
        r.accepted = get("accepted") == "1";
        if (!get("alpha").empty()) {
            DoubletRecord d;
            d.alpha = parse_double(get("alpha"), lineno);
            d.v_signed = parse_double(get("v_signed"), lineno);
            d.e_site = parse_double(get("e_site"), lineno);
            d.vnorm2_plus = parse_double(get("vnorm2_plus"), lineno);
            d.vnorm2_minus = parse_double(get("vnorm2_minus"), lineno);
            d.s_plus = parse_double(get("s_plus"), lineno);
            d.s_minus = parse_double(get("s_minus"), lineno);
            d.delta_s = parse_double(get("delta_s"), lineno);
            d.rate_eff = parse_double(get("rate_eff"), lineno);
            d.resonant_flag = get("resonant_flag") == "1";
            r.doublet = d;
        }
        r.degenerate = std::isnan(r.transport.p_max) && !std::isnan(r.transport.t_r);
        file.records.push_back(std::move(r));
    }
    return file;
}

void write_binned_density_csv(std::ostream& out, std::span<const double> edges,
                              std::span<const double> density) {
    out << "bin_left,bin_right,density\n";
    for (std::size_t i = 0; i < density.size(); ++i) {
        out << format_double(edges[i]) << ',' << format_double(edges[i + 1]) << ','
            << format_double(density[i]) << '\n';
    }
}

void write_histogram_csv(std::ostream& out, const Histogram& hist) {
    write_binned_density_csv(out, hist.bin_edges, hist.density);
}

void write_hamiltonian_csv(std::ostream& out, const Hamiltonian& h, std::span<const int> labels) {
    out << "label";
    for (int l : labels) out << ',' << l;
    out << '\n';
    for (std::size_t i = 0; i < h.size(); ++i) {
        out << labels[i];
        for (std::size_t j = 0; j < h.size(); ++j) out << ',' << format_double(h(i, j));
        out << '\n';
    }
}

void write_trajectory_csv(std::ostream& out, const GATrajectory& traj) {
    out << "generation,best_p,alpha,epsilon,sigma_k\n";
    for (const auto& g : traj.generations) {
        out << g.k << ',' << format_double(g.best_p) << ',' << format_double(g.alpha) << ','
            << format_double(g.epsilon) << ',' << format_double(g.sigma_k) << '\n';
    }
}

void write_scatter_csv(std::ostream& out, std::span<const ScatterPoint> points) {
    out << "seed_kind,p,alpha,epsilon,seed_p,seed_alpha,seed_epsilon,generations,converged\n";
    for (const auto& p : points) {
        out << to_string(p.kind) << ',' << format_double(p.p) << ',' << format_double(p.alpha) << ','
            << format_double(p.epsilon) << ',' << format_double(p.seed_p) << ','
            << format_double(p.seed_alpha) << ',' << format_double(p.seed_epsilon) << ','
            << p.generations_used << ',' << (p.converged ? 1 : 0) << '\n';
    }
}

void write_orientation_csv(std::ostream& out, const OrientationStatistics& stats) {
    out << "site,phi_offset,theta_offset,angular_deviation\n";
    for (const auto& s : stats.samples) {
        out << s.label << ',' << format_double(s.phi_offset) << ',' << format_double(s.theta_offset)
            << ',' << format_double(s.angular_deviation) << '\n';
    }
}

void write_sites_csv(std::ostream& out, const DipoleNetwork& net) {
    out << "label,x,y,z,sx,sy,sz\n";
    for (const auto& s : net.sites()) {
        out << s.label << ',' << format_double(s.position.x()) << ',' << format_double(s.position.y())
            << ',' << format_double(s.position.z()) << ',' << format_double(s.dipole.x()) << ','
            << format_double(s.dipole.y()) << ',' << format_double(s.dipole.z()) << '\n';
    }
}

}  // namespace qtnet::io
