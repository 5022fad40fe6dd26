#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qtnet/ensemble_stats.hpp"
#include "qtnet/fmo_network.hpp"
#include "qtnet/genetic_optimizer.hpp"

namespace qtnet::io {

// Shortest representation that round-trips to the same double; "nan"/"inf"
// for non-finite values.
std::string format_double(double v);

// Columns: index, seed, ensemble, n, xi, p_max, t_peak, t_r, ratio, alpha,
// v_signed, e_site, vnorm2_plus, vnorm2_minus, s_plus, s_minus, delta_s,
// rate_eff, accepted, resonant_flag. Doublet columns are empty for goe.
void write_records_csv(std::ostream& out, std::span<const RealizationRecord> records,
                       const EnsembleConfig& config);

struct RecordsFile {
    std::vector<RealizationRecord> records;
    std::string ensemble;
    std::size_t n = 0;
    double xi = 0.0;
};

RecordsFile read_records_csv(std::istream& in);

// Columns: bin_left, bin_right, density.
void write_histogram_csv(std::ostream& out, const Histogram& hist);
void write_binned_density_csv(std::ostream& out, std::span<const double> edges,
                              std::span<const double> density);

void write_hamiltonian_csv(std::ostream& out, const Hamiltonian& h, std::span<const int> labels);

// Columns: generation, best_p, alpha, epsilon, sigma_k.
void write_trajectory_csv(std::ostream& out, const GATrajectory& traj);

// Columns: seed_kind, p, alpha, epsilon, then seed_p, seed_alpha, seed_epsilon,
// generations, converged.
void write_scatter_csv(std::ostream& out, std::span<const ScatterPoint> points);

// Columns: site, phi_offset, theta_offset, angular_deviation.
void write_orientation_csv(std::ostream& out, const OrientationStatistics& stats);

void write_sites_csv(std::ostream& out, const DipoleNetwork& net);

}  // namespace qtnet::io
