#include <arm_neon.h>

#include <algorithm>

#include "population_scan_common.hpp"

namespace qtnet::kernels::detail {

// Two float64x2 registers cover the four time lanes.
void population_scan_neon(std::span<const double> energy, std::span<const double> weight,
                          double dt, std::span<double> out) {
    static_assert(kLanes == 4);
    const std::size_t n = energy.size();
    const std::size_t g = out.size();
    ScanState s(energy, dt);
    for (std::size_t j0 = 0; j0 < g; j0 += kResyncStride) {
        s.reseed(energy, dt, j0);
        const std::size_t jend = std::min(g, j0 + kResyncStride);
        for (std::size_t j = j0; j < jend; j += kLanes) {
            float64x2_t ar[2] = {vdupq_n_f64(0.0), vdupq_n_f64(0.0)};
            float64x2_t ai[2] = {vdupq_n_f64(0.0), vdupq_n_f64(0.0)};
            for (std::size_t k = 0; k < n; ++k) {
                const float64x2_t c = vdupq_n_f64(weight[k]);
                const float64x2_t wr = vdupq_n_f64(s.wr[k]);
                const float64x2_t wi = vdupq_n_f64(s.wi[k]);
                for (int h = 0; h < 2; ++h) {
                    double* pzr = &s.zr[k * kLanes + 2 * h];
                    double* pzi = &s.zi[k * kLanes + 2 * h];
                    const float64x2_t zr = vld1q_f64(pzr);
                    const float64x2_t zi = vld1q_f64(pzi);
                    ar[h] = vaddq_f64(ar[h], vmulq_f64(c, zr));
                    ai[h] = vaddq_f64(ai[h], vmulq_f64(c, zi));
                    vst1q_f64(pzr, vsubq_f64(vmulq_f64(zr, wr), vmulq_f64(zi, wi)));
                    vst1q_f64(pzi, vaddq_f64(vmulq_f64(zr, wi), vmulq_f64(zi, wr)));
                }
            }
            double p[kLanes];
            for (int h = 0; h < 2; ++h) {
                vst1q_f64(p + 2 * h, vaddq_f64(vmulq_f64(ar[h], ar[h]), vmulq_f64(ai[h], ai[h])));
            }
            store_lanes(p, out, j, jend);
        }
    }
}

}  // namespace qtnet::kernels::detail
