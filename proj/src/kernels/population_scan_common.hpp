#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "qtnet/kernels/population_scan.hpp"

namespace qtnet::kernels::detail {

// Shared state of the lane-blocked recurrence: z[k*kLanes + L] holds
// exp(−i·e_k·t) at the L-th time of the current lane block; w[k] advances it by
// kLanes samples.
struct ScanState {
    std::vector<double> zr, zi, wr, wi;

    ScanState(std::span<const double> energy, double dt)
        : zr(energy.size() * kLanes), zi(energy.size() * kLanes),
          wr(energy.size()), wi(energy.size()) {
        for (std::size_t k = 0; k < energy.size(); ++k) {
            const double theta = energy[k] * (static_cast<double>(kLanes) * dt);
            wr[k] = std::cos(theta);
            wi[k] = -std::sin(theta);
        }
    }

    void reseed(std::span<const double> energy, double dt, std::size_t j0) {
        for (std::size_t k = 0; k < energy.size(); ++k) {
            for (std::size_t L = 0; L < kLanes; ++L) {
                const double theta = energy[k] * (static_cast<double>(j0 + L) * dt);
                zr[k * kLanes + L] = std::cos(theta);
                zi[k * kLanes + L] = -std::sin(theta);
            }
        }
    }
};

inline void store_lanes(const double* lanes, std::span<double> out, std::size_t j,
                        std::size_t jend) {
    const std::size_t count = std::min(kLanes, jend - j);
    std::copy_n(lanes, count, out.begin() + static_cast<std::ptrdiff_t>(j));
}

}  // namespace qtnet::kernels::detail
