// Compiled with -mavx2 only (no FMA) so results match the scalar variant bit-for-bit.
#include <immintrin.h>

#include <algorithm>

#include "population_scan_common.hpp"

namespace qtnet::kernels::detail {

void population_scan_avx2(std::span<const double> energy, std::span<const double> weight,
                          double dt, std::span<double> out) {
    static_assert(kLanes == 4);
    const std::size_t n = energy.size();
    const std::size_t g = out.size();
    ScanState s(energy, dt);
    for (std::size_t j0 = 0; j0 < g; j0 += kResyncStride) {
        s.reseed(energy, dt, j0);
        const std::size_t jend = std::min(g, j0 + kResyncStride);
        for (std::size_t j = j0; j < jend; j += kLanes) {
            __m256d ar = _mm256_setzero_pd();
            __m256d ai = _mm256_setzero_pd();
            for (std::size_t k = 0; k < n; ++k) {
                const __m256d c = _mm256_set1_pd(weight[k]);
                double* pzr = &s.zr[k * kLanes];
                double* pzi = &s.zi[k * kLanes];
                const __m256d zr = _mm256_loadu_pd(pzr);
                const __m256d zi = _mm256_loadu_pd(pzi);
                ar = _mm256_add_pd(ar, _mm256_mul_pd(c, zr));
                ai = _mm256_add_pd(ai, _mm256_mul_pd(c, zi));
                const __m256d wr = _mm256_set1_pd(s.wr[k]);
                const __m256d wi = _mm256_set1_pd(s.wi[k]);
                _mm256_storeu_pd(pzr, _mm256_sub_pd(_mm256_mul_pd(zr, wr), _mm256_mul_pd(zi, wi)));
                _mm256_storeu_pd(pzi, _mm256_add_pd(_mm256_mul_pd(zr, wi), _mm256_mul_pd(zi, wr)));
            }
            alignas(32) double p[kLanes];
            _mm256_store_pd(p, _mm256_add_pd(_mm256_mul_pd(ar, ar), _mm256_mul_pd(ai, ai)));
            store_lanes(p, out, j, jend);
        }
    }
}

}  // namespace qtnet::kernels::detail
