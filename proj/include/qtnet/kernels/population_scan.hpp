#pragma once

#include <cstddef>
#include <span>

#include "qtnet/kernels/isa.hpp"

namespace qtnet::kernels {

// Phases are re-seeded from exact cos/sin every kResyncStride samples so the
// rotation recurrence never drifts by more than ~1e-14.
inline constexpr std::size_t kResyncStride = 64;
inline constexpr std::size_t kLanes = 4;

// out[j] = |Σ_k weight[k]·exp(−i·energy[k]·j·dt)|² for j = 0..out.size()−1.
//
// All variants run the same lane-blocked rotation recurrence with identical
// operation order, so they agree bit-for-bit when compiled without FMA
// contraction.
void population_scan(std::span<const double> energy, std::span<const double> weight, double dt,
                     std::span<double> out, Isa isa);

inline void population_scan(std::span<const double> energy, std::span<const double> weight,
                            double dt, std::span<double> out) {
    population_scan(energy, weight, dt, out, active_isa());
}

namespace detail {
void population_scan_scalar(std::span<const double> energy, std::span<const double> weight,
                            double dt, std::span<double> out);
void population_scan_avx2(std::span<const double> energy, std::span<const double> weight,
                          double dt, std::span<double> out);
void population_scan_neon(std::span<const double> energy, std::span<const double> weight,
                          double dt, std::span<double> out);
}  // namespace detail

}  // namespace qtnet::kernels
