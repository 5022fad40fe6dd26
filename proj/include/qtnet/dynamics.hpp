#pragma once

#include <complex>
#include <cstddef>

#include "qtnet/network_model.hpp"

namespace qtnet {

// Eigenvalues ascending; column k of `eigenvectors` belongs to eigenvalue k.
struct EigenDecomposition {
    Vector eigenvalues;
    Matrix eigenvectors;
};

EigenDecomposition eigendecompose(const Hamiltonian& h);
EigenDecomposition eigendecompose(const Matrix& symmetric);

// ⟨out| exp(−iHt) |in⟩ with ħ = 1.
std::complex<double> amplitude(const EigenDecomposition& ed, std::size_t in, std::size_t out,
                               double t);

inline double population(const EigenDecomposition& ed, std::size_t in, std::size_t out,
                         double t) {
    return std::norm(amplitude(ed, in, out, t));
}

inline constexpr double kDefaultWindowFactor = 1.7;
inline constexpr std::size_t kDefaultGridPoints = 2000;

struct TransportRecord {
    double p_max = 0.0;
    double t_peak = 0.0;
    double t_r = 0.0;
    double ratio = 0.0;  // t_r / t_peak
    double window_factor = kDefaultWindowFactor;
};

// Maximum of |⟨out|φ(t)⟩|² over [0, window_factor·t_r] and the earliest time
// attaining it. A uniform grid scan is followed by Brent refinement of every
// grid local maximum that could still hold the global maximum given the
// curvature bound |P''| ≤ (Σ|c_k|)²·span².
TransportRecord transfer_efficiency(const EigenDecomposition& ed, const SitePair& pair,
                                    double window_factor = kDefaultWindowFactor,
                                    std::size_t grid_points = kDefaultGridPoints);

TransportRecord transfer_efficiency(const Hamiltonian& h, const SitePair& pair,
                                    double window_factor = kDefaultWindowFactor,
                                    std::size_t grid_points = kDefaultGridPoints);

}  // namespace qtnet
