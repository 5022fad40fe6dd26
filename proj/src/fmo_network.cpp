#include "qtnet/fmo_network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "qtnet/doublet_analysis.hpp"
#include "qtnet/error.hpp"

namespace qtnet {

namespace {

constexpr std::string_view kFmoTable = R"(# label,x,y,z,sx,sy,sz
1,26.51,2.597,-11.349,0.741006,0.560602,0.369644
2,15.607,-1.517,-17.246,0.857141,-0.503776,0.107329
3,3.389,-13.614,-13.851,0.197121,-0.95741,0.210971
4,6.678,-20.848,-6.036,0.760508,0.593481,0.263453
5,19.378,-18.571,-1.076,0.736925,-0.655762,-0.164065
6,21.834,-7.175,0.634,0.135017,0.879218,-0.456887
7,10.274,-8.207,-5.544,0.495115,0.708341,0.503105
8,21.766,13.748,-7.718,0.553292,0.138385,-0.821412
)";

// Vectors already unit to rounding are kept bit-for-bit, so writing a site
// table and loading it back is the identity.
Vec3 unit(const Vec3& d, double norm) {
    if (std::abs(norm - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) return d;
    return d / norm;
}

}  // namespace

DipoleNetwork::DipoleNetwork(std::vector<DipoleSite> sites, int in_label, int out_label,
                             double coupling_constant)
    : sites_(std::move(sites)), in_label_(in_label), out_label_(out_label),
      coupling_(coupling_constant) {
    std::sort(sites_.begin(), sites_.end(),
              [](const DipoleSite& a, const DipoleSite& b) { return a.label < b.label; });
    for (std::size_t i = 1; i < sites_.size(); ++i) {
        if (sites_[i].label == sites_[i - 1].label) {
            throw InvalidArgument("dipole network: duplicate site label " +
                                  std::to_string(sites_[i].label));
        }
    }
    if (in_label == out_label) throw InvalidArgument("dipole network: in and out labels coincide");
    (void)index_of(in_label);
    (void)index_of(out_label);
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        if (std::abs(sites_[i].dipole.norm() - 1.0) > 1e-9) {
            throw InvalidArgument("dipole network: dipole of site " +
                                  std::to_string(sites_[i].label) + " is not unit length");
        }
        for (std::size_t j = i + 1; j < sites_.size(); ++j) {
            if ((sites_[i].position - sites_[j].position).norm() == 0.0) {
                throw InvalidArgument("dipole network: coincident sites " +
                                      std::to_string(sites_[i].label) + " and " +
                                      std::to_string(sites_[j].label));
            }
        }
    }
}

std::size_t DipoleNetwork::index_of(int label) const {
    for (std::size_t i = 0; i < sites_.size(); ++i) {
        if (sites_[i].label == label) return i;
    }
    throw InvalidArgument("dipole network: no site with label " + std::to_string(label));
}

void DipoleNetwork::set_dipole(int label, const Vec3& d) {
    const double norm = d.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw InvalidArgument("dipole network: zero or non-finite dipole");
    }
    sites_[index_of(label)].dipole = unit(d, norm);
}

DipoleNetwork load_sites(std::istream& in, int in_label, int out_label) {
    std::vector<DipoleSite> sites;
    std::set<int> labels;
    std::string line;
    std::size_t lineno = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) tok.push_back(t);
        if (tok.empty()) continue;
        if (header_allowed && tok[0] == "label") {
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        if (tok.size() != 7) throw ParseError("site table: expected 7 columns", lineno);
        DipoleSite s;
        double v[6];
        try {
            std::size_t used = 0;
            s.label = std::stoi(tok[0], &used);
            if (used != tok[0].size()) throw std::invalid_argument("label");
            for (int k = 0; k < 6; ++k) {
                v[k] = std::stod(tok[static_cast<std::size_t>(k + 1)], &used);
                if (used != tok[static_cast<std::size_t>(k + 1)].size()) {
                    throw std::invalid_argument("number");
                }
            }
        } catch (const std::exception&) {
            throw ParseError("site table: malformed number", lineno);
        }
        s.position = Vec3(v[0], v[1], v[2]);
        const Vec3 d(v[3], v[4], v[5]);
        const double norm = d.norm();
        if (!(std::abs(norm - 1.0) <= 1e-3)) {
            throw ParseError("site table: dipole norm " + std::to_string(norm) +
                                 " is not within 1e-3 of unity",
                             lineno);
        }
        s.dipole = unit(d, norm);
        if (!labels.insert(s.label).second) {
            throw ParseError("site table: duplicate label " + std::to_string(s.label), lineno);
        }
        sites.push_back(s);
    }
    if (sites.empty()) throw ParseError("site table: no rows", lineno);
    return DipoleNetwork(std::move(sites), in_label, out_label);
}

DipoleNetwork load_sites_file(const std::string& path, int in_label, int out_label) {
    std::ifstream f(path);
    if (!f) throw InvalidArgument("cannot open site table '" + path + "'");
    return load_sites(f, in_label, out_label);
}

std::string_view bundled_fmo_table() noexcept { return kFmoTable; }

DipoleNetwork bundled_fmo_network() {
    std::istringstream in{std::string(kFmoTable)};
    return load_sites(in);
}

Hamiltonian dipole_hamiltonian(const DipoleNetwork& net) {
    const auto& s = net.sites();
    const auto n = static_cast<Eigen::Index>(s.size());
    Matrix h = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const auto& a = s[static_cast<std::size_t>(i)];
            const auto& b = s[static_cast<std::size_t>(j)];
            const Vec3 r = b.position - a.position;
            const double dist = r.norm();
            if (!(dist > 0.0)) throw InvalidArgument("dipole_hamiltonian: coincident sites");
            const Vec3 rhat = r / dist;
            const double v = net.coupling_constant() *
                             (a.dipole.dot(b.dipole) - 3.0 * a.dipole.dot(rhat) * b.dipole.dot(rhat)) /
                             (dist * dist * dist);
            h(i, j) = v;
            h(j, i) = v;
        }
    }
    return Hamiltonian(h, 0.0);
}

SitePair fmo_site_pair(const DipoleNetwork& net, const Hamiltonian& h) {
    return make_site_pair(h, net.index_of(net.in_label()), net.index_of(net.out_label()));
}

TransportRecord fmo_transport(const DipoleNetwork& net, double window_factor,
                              std::size_t grid_points) {
    const Hamiltonian h = dipole_hamiltonian(net);
    const SitePair pair = fmo_site_pair(net, h);
    if (pair.degenerate) throw DegeneratePair("fmo_transport: zero direct in/out coupling");
    return transfer_efficiency(h, pair, window_factor, grid_points);
}

FmoDiagnostics fmo_diagnostics(const DipoleNetwork& net) {
    const Hamiltonian h = dipole_hamiltonian(net);
    const SitePair pair = fmo_site_pair(net, h);
    const auto perm = canonical_permutation(h.size(), pair.in_index, pair.out_index);
    const Hamiltonian c = reorder_sites(h, perm);
    const SitePair canon = make_site_pair(c, 0, c.size() - 1);
    FmoDiagnostics d;
    d.alpha = doublet_strength(c, canon).alpha();
    d.epsilon = centro_symmetry_epsilon(c, canon);
    return d;
}

}  // namespace qtnet
