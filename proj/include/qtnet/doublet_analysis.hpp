#pragma once

#include <cstddef>
#include <utility>

#include "qtnet/network_model.hpp"

namespace qtnet {

struct BlockPair {
    Matrix h_plus;
    Matrix h_minus;
    std::size_t doublet_coord = 0;
};

struct DoubletRecord {
    double alpha_plus = 0.0;
    double alpha_minus = 0.0;
    double alpha = 0.0;
    double e_site = 0.0;
    double v_signed = 0.0;
    double vnorm2_plus = 0.0;
    double vnorm2_minus = 0.0;
    double s_plus = 0.0;
    double s_minus = 0.0;
    double delta_s = 0.0;
    double rate_eff = 0.0;
    double t_pred = 0.0;  // +inf when rate_eff == 0
    bool resonant_flag = false;
};

struct ShiftResult {
    double s = 0.0;
    double vnorm2 = 0.0;
    bool resonant = false;
};

struct DoubletStrength {
    double alpha_plus = 0.0;
    double alpha_minus = 0.0;
    [[nodiscard]] double alpha() const noexcept { return std::min(alpha_plus, alpha_minus); }
};

// Relative cluster tolerance: eigenvalues closer than this times the spectral
// span share an eigenspace.
inline constexpr double kDegeneracyRelTol = 1e-8;
inline constexpr double kResonanceRelTol = 1e-8;

// Requires in = 0, out = n−1 and centro-symmetry at 1e−9.
BlockPair block_decompose(const Hamiltonian& h);

// Max squared projection of |±⟩ = (|in⟩ ± |out⟩)/√2 onto an eigenspace of h.
// Eigenvalues whose consecutive gaps are below `degeneracy_tol` (absolute)
// form one cluster. A negative tolerance selects kDegeneracyRelTol·span.
DoubletStrength doublet_strength(const Hamiltonian& h, const SitePair& pair,
                                 double degeneracy_tol = -1.0);

// Second-order shift of the diagonal level `coord` of a symmetric block:
// s = Σ_i |⟨𝒱|ψ_i⟩|² / (d − e_i) over the eigenpairs of the block with row
// and column `coord` removed.
ShiftResult perturbative_shift(const Matrix& block, std::size_t coord);

// `pair` must be an anti-diagonal pair (i, n−1−i); the sample is brought
// to canonical order internally.
DoubletRecord analyze_doublet(const CentroSample& sample, const SitePair& pair,
                              double degeneracy_tol = -1.0);
DoubletRecord analyze_doublet(const Hamiltonian& centro_h, const SitePair& pair,
                              double degeneracy_tol = -1.0);

// α²·sin²(rate·t*/2), t* = min(window, π/rate).
double efficiency_lower_bound(const DoubletRecord& record, double alpha, double window);

inline constexpr std::size_t kMaxEpsilonSites = 12;

// (1/n)·min over relabelings S of the intermediate sites of ‖H_S − J H_S J‖_HS,
// exact enumeration. Throws UnsupportedSize for n > kMaxEpsilonSites.
double centro_symmetry_epsilon(const Hamiltonian& h, const SitePair& pair);

}  // namespace qtnet
