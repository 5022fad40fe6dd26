#include "screen.hpp"

#include <algorithm>
#include <cmath>

#include "qtnet/doublet_analysis.hpp"

namespace qtnet::detail {

DoubletScreen::DoubletScreen(std::size_t n, double xi, double alpha)
    : m_(static_cast<Eigen::Index>(n / 2)),
      variance_(2.0 * xi * xi / static_cast<double>(n)),
      alpha_s_(alpha - 1e-9),
      plus_(m_, m_),
      minus_(m_, m_),
      solver_(m_) {}

bool DoubletScreen::bound_may_pass(const Matrix& b, Eigen::Index c, double frob_max) const {
    // With x the normalized projection of e_c onto a cluster of weight > α,
    // ‖(S − λ)‖₂·√(1−α) ≥ ‖𝒱‖√α − width, and |λ − d| ≤ ‖𝒱‖√((1−α)/α) + width.
    const Eigen::Index m = b.rows();
    const double d = b(c, c);
    double v2 = 0.0;
    double s_frob2 = 0.0;
    double s_trace = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (i == c) continue;
        v2 += b(c, i) * b(c, i);
        s_trace += b(i, i);
        for (Eigen::Index j = 0; j < m; ++j) {
            if (j != c) s_frob2 += b(i, j) * b(i, j);
        }
    }
    const double slack = 1e-6 * frob_max;
    const double nv = std::sqrt(v2);
    const double a = alpha_s_;
    const double reach = nv * std::sqrt((1.0 - a) / a) + 2.0 * slack;
    const double lo = d - reach;
    const double hi = d + reach;
    const auto sub = static_cast<double>(m - 1);
    auto frob = [&](double l) { return s_frob2 - 2.0 * l * s_trace + sub * l * l; };
    auto gersh = [&](double l) {
        double g = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (i == c) continue;
            double r = std::abs(b(i, i) - l);
            for (Eigen::Index j = 0; j < m; ++j) {
                if (j != c && j != i) r += std::abs(b(i, j));
            }
            g = std::max(g, r);
        }
        return g * g;
    };
    const double upper = std::min(std::max(frob(lo), frob(hi)), std::max(gersh(lo), gersh(hi)));
    const double need_root = std::max(0.0, nv * std::sqrt(a) - slack);
    const double need = need_root * need_root / (1.0 - a);
    return upper * (1.0 + 1e-9) >= need;
}

bool DoubletScreen::block_may_pass(const Matrix& b, Eigen::Index c, double frob_max) {
    if (!bound_may_pass(b, c, frob_max)) return false;
    solver_.compute(b);
    const auto& e = solver_.eigenvalues();
    const auto& u = solver_.eigenvectors();
    // Cluster tolerance from an upper bound of the full spectral span, never
    // smaller than the one used by doublet_strength on the full matrix.
    const double tol = kDegeneracyRelTol * 2.0 * frob_max;
    double best = 0.0;
    double acc = 0.0;
    for (Eigen::Index k = 0; k < e.size(); ++k) {
        acc += u(c, k) * u(c, k);
        if (k == e.size() - 1 || e(k + 1) - e(k) >= tol) {
            best = std::max(best, acc);
            acc = 0.0;
        }
    }
    return best >= alpha_s_;
}

bool DoubletScreen::may_accept(std::uint64_t seed) {
    Stream rng(seed);
    fill_gaussian_symmetric(plus_, variance_, rng);
    fill_gaussian_symmetric(minus_, variance_, rng);

    // h(i, n−1−i) = (h⁺_ii − h⁻_ii)/2; near ties defer to the full path.
    Eigen::Index best = 0;
    double best_v = std::abs(plus_(0, 0) - minus_(0, 0));
    double second_v = std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (Eigen::Index i = 0; i < m_; ++i) {
        scale = std::max({scale, std::abs(plus_(i, i)), std::abs(minus_(i, i))});
        if (i == 0) continue;
        const double v = std::abs(plus_(i, i) - minus_(i, i));
        if (v < best_v) {
            second_v = best_v;
            best_v = v;
            best = i;
        } else {
            second_v = std::min(second_v, v);
        }
    }
    if (second_v - best_v <= 1e-12 * (scale + 1.0)) return true;

    const double frob_max = std::max(plus_.norm(), minus_.norm());
    return block_may_pass(plus_, best, frob_max) && block_may_pass(minus_, best, frob_max);
}

}  // namespace qtnet::detail
