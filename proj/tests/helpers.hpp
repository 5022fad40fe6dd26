#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "qtnet/network_model.hpp"
#include "qtnet/rng.hpp"

namespace qtnet::test {

inline Matrix random_symmetric(std::size_t n, std::uint64_t seed, double scale = 1.0) {
    Stream rng(seed);
    return sample_gaussian_symmetric(n, scale * scale, rng);
}

inline std::vector<double> sorted_eigenvalues(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    const Vector& e = es.eigenvalues();
    return {e.data(), e.data() + e.size()};
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace qtnet::test
