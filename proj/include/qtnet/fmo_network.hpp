#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "qtnet/dynamics.hpp"
#include "qtnet/network_model.hpp"

namespace qtnet {

using Vec3 = Eigen::Vector3d;

struct DipoleSite {
    int label = 0;
    Vec3 position = Vec3::Zero();  // Ångström
    Vec3 dipole = Vec3::UnitZ();    // unit norm
};

// Sites are kept sorted by label; matrix row k corresponds to sites[k].
class DipoleNetwork {
public:
    DipoleNetwork() = default;
    DipoleNetwork(std::vector<DipoleSite> sites, int in_label = 8, int out_label = 3,
                  double coupling_constant = 1.0);

    [[nodiscard]] const std::vector<DipoleSite>& sites() const noexcept { return sites_; }
    [[nodiscard]] std::size_t size() const noexcept { return sites_.size(); }
    [[nodiscard]] int in_label() const noexcept { return in_label_; }
    [[nodiscard]] int out_label() const noexcept { return out_label_; }
    [[nodiscard]] double coupling_constant() const noexcept { return coupling_; }

    [[nodiscard]] std::size_t index_of(int label) const;
    [[nodiscard]] const Vec3& dipole(int label) const { return sites_[index_of(label)].dipole; }

    // Replaces a dipole; the argument is normalized and must be nonzero.
    void set_dipole(int label, const Vec3& d);
    void set_coupling_constant(double c) { coupling_ = c; }

private:
    std::vector<DipoleSite> sites_;
    int in_label_ = 8;
    int out_label_ = 3;
    double coupling_ = 1.0;
};

// Columns: label, x, y, z, sx, sy, sz (comma or whitespace separated; '#'
// comments and one optional header line allowed). Dipoles within 1e−3 of unit
// norm are renormalized, anything else is an error.
DipoleNetwork load_sites(std::istream& in, int in_label = 8, int out_label = 3);
DipoleNetwork load_sites_file(const std::string& path, int in_label = 8, int out_label = 3);

// Eight BChl a sites (positions in Å and unit transition dipoles) of the FMO
// complex, PDB entry 3ENI, standard site numbering.
std::string_view bundled_fmo_table() noexcept;
DipoleNetwork bundled_fmo_network();

// H_ij = C·(d_i·d_j − 3(d_i·r̂)(d_j·r̂))/|r_ij|³, zero diagonal.
Hamiltonian dipole_hamiltonian(const DipoleNetwork& net);

SitePair fmo_site_pair(const DipoleNetwork& net, const Hamiltonian& h);

TransportRecord fmo_transport(const DipoleNetwork& net,
                              double window_factor = kDefaultWindowFactor,
                              std::size_t grid_points = kDefaultGridPoints);

struct FmoDiagnostics {
    double alpha = 0.0;
    double epsilon = 0.0;
};

FmoDiagnostics fmo_diagnostics(const DipoleNetwork& net);

}  // namespace qtnet
