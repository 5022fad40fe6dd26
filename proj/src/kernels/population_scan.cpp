#include "qtnet/kernels/population_scan.hpp"

#include <algorithm>
#include <stdexcept>

#include "population_scan_common.hpp"

namespace qtnet::kernels {

namespace detail {

void population_scan_scalar(std::span<const double> energy, std::span<const double> weight,
                            double dt, std::span<double> out) {
    const std::size_t n = energy.size();
    const std::size_t g = out.size();
    ScanState s(energy, dt);
    for (std::size_t j0 = 0; j0 < g; j0 += kResyncStride) {
        s.reseed(energy, dt, j0);
        const std::size_t jend = std::min(g, j0 + kResyncStride);
        for (std::size_t j = j0; j < jend; j += kLanes) {
            double ar[kLanes] = {0.0, 0.0, 0.0, 0.0};
            double ai[kLanes] = {0.0, 0.0, 0.0, 0.0};
            for (std::size_t k = 0; k < n; ++k) {
                const double c = weight[k];
                double* zr = &s.zr[k * kLanes];
                double* zi = &s.zi[k * kLanes];
                for (std::size_t L = 0; L < kLanes; ++L) {
                    ar[L] = ar[L] + c * zr[L];
                    ai[L] = ai[L] + c * zi[L];
                }
                for (std::size_t L = 0; L < kLanes; ++L) {
                    const double r = zr[L] * s.wr[k] - zi[L] * s.wi[k];
                    const double i = zr[L] * s.wi[k] + zi[L] * s.wr[k];
                    zr[L] = r;
                    zi[L] = i;
                }
            }
            double p[kLanes];
            for (std::size_t L = 0; L < kLanes; ++L) p[L] = ar[L] * ar[L] + ai[L] * ai[L];
            store_lanes(p, out, j, jend);
        }
    }
}

#if !defined(QTNET_HAVE_AVX2)
void population_scan_avx2(std::span<const double> energy, std::span<const double> weight,
                          double dt, std::span<double> out) {
    population_scan_scalar(energy, weight, dt, out);
}
#endif

#if !defined(QTNET_HAVE_NEON)
void population_scan_neon(std::span<const double> energy, std::span<const double> weight,
                          double dt, std::span<double> out) {
    population_scan_scalar(energy, weight, dt, out);
}
#endif

}  // namespace detail

void population_scan(std::span<const double> energy, std::span<const double> weight, double dt,
                     std::span<double> out, Isa isa) {
    if (energy.size() != weight.size()) {
        throw std::invalid_argument("population_scan: energy/weight size mismatch");
    }
    if (!isa_available(isa)) isa = Isa::Scalar;
    switch (isa) {
        case Isa::Avx2: detail::population_scan_avx2(energy, weight, dt, out); return;
        case Isa::Neon: detail::population_scan_neon(energy, weight, dt, out); return;
        case Isa::Scalar: break;
    }
    detail::population_scan_scalar(energy, weight, dt, out);
}

}  // namespace qtnet::kernels
