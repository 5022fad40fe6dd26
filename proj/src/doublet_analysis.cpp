#include "qtnet/doublet_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

#include "qtnet/dynamics.hpp"
#include "qtnet/error.hpp"

namespace qtnet {

BlockPair block_decompose(const Hamiltonian& h) {
    const std::size_t n = h.size();
    if (n < 2 || n % 2 != 0) throw InvalidDimension("block_decompose: n must be even");
    if (!is_centro_symmetric(h, 1e-9)) {
        throw InvalidArgument("block_decompose: matrix is not centro-symmetric");
    }
    const Matrix q = j_eigenbasis(n);
    const Matrix b = q * h.matrix() * q.transpose();
    const auto m = static_cast<Eigen::Index>(n / 2);
    BlockPair out;
    out.h_plus = b.topLeftCorner(m, m);
    out.h_minus = b.bottomRightCorner(m, m);
    out.h_plus = 0.5 * (out.h_plus + out.h_plus.transpose()).eval();
    out.h_minus = 0.5 * (out.h_minus + out.h_minus.transpose()).eval();
    out.doublet_coord = 0;
    return out;
}

DoubletStrength doublet_strength(const Hamiltonian& h, const SitePair& pair,
                                 double degeneracy_tol) {
    const EigenDecomposition ed = eigendecompose(h);
    const Eigen::Index n = ed.eigenvalues.size();
    const double span = ed.eigenvalues(n - 1) - ed.eigenvalues(0);
    const double tol = degeneracy_tol >= 0.0 ? degeneracy_tol : kDegeneracyRelTol * span;
    const auto in = static_cast<Eigen::Index>(pair.in_index);
    const auto out = static_cast<Eigen::Index>(pair.out_index);
    const double r = std::numbers::sqrt2 / 2.0;

    DoubletStrength d;
    double acc_plus = 0.0;
    double acc_minus = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double a = ed.eigenvectors(in, k);
        const double b = ed.eigenvectors(out, k);
        const double op = r * (a + b);
        const double om = r * (a - b);
        acc_plus += op * op;
        acc_minus += om * om;
        const bool cluster_ends =
            k == n - 1 || ed.eigenvalues(k + 1) - ed.eigenvalues(k) >= tol;
        if (cluster_ends) {
            d.alpha_plus = std::max(d.alpha_plus, acc_plus);
            d.alpha_minus = std::max(d.alpha_minus, acc_minus);
            acc_plus = 0.0;
            acc_minus = 0.0;
        }
    }
    d.alpha_plus = std::min(d.alpha_plus, 1.0);
    d.alpha_minus = std::min(d.alpha_minus, 1.0);
    return d;
}

ShiftResult perturbative_shift(const Matrix& block, std::size_t coord) {
    const Eigen::Index m = block.rows();
    if (block.cols() != m || m < 2) {
        throw InvalidDimension("perturbative_shift: block must be square with size >= 2");
    }
    const auto c = static_cast<Eigen::Index>(coord);
    if (c >= m) throw InvalidArgument("perturbative_shift: coord out of range");

    std::vector<Eigen::Index> rest;
    for (Eigen::Index i = 0; i < m; ++i) {
        if (i != c) rest.push_back(i);
    }
    const auto r = static_cast<Eigen::Index>(rest.size());
    Matrix sub(r, r);
    Vector v(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        v(i) = block(c, rest[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < r; ++j) {
            sub(i, j) = block(rest[static_cast<std::size_t>(i)], rest[static_cast<std::size_t>(j)]);
        }
    }
    const double d = block(c, c);
    const EigenDecomposition ed = eigendecompose(sub);
    const double lo = std::min(d, ed.eigenvalues(0));
    const double hi = std::max(d, ed.eigenvalues(r - 1));
    const double resonance_gap = kResonanceRelTol * (hi - lo);

    ShiftResult out;
    out.vnorm2 = v.squaredNorm();
    const Vector overlaps = ed.eigenvectors.transpose() * v;
    for (Eigen::Index i = 0; i < r; ++i) {
        const double num = overlaps(i) * overlaps(i);
        const double den = d - ed.eigenvalues(i);
        if (std::abs(den) <= resonance_gap) out.resonant = true;
        if (num == 0.0) continue;
        out.s += num / den;
    }
    return out;
}

DoubletRecord analyze_doublet(const Hamiltonian& centro_h, const SitePair& pair,
                              double degeneracy_tol) {
    const std::size_t n = centro_h.size();
    if (pair.in_index + pair.out_index != n - 1) {
        throw InvalidArgument("analyze_doublet: pair must be an anti-diagonal pair");
    }
    const auto perm = canonical_permutation(n, pair.in_index, pair.out_index);
    const Hamiltonian h = reorder_sites(centro_h, perm);
    const BlockPair blocks = block_decompose(h);
    const SitePair canon = make_site_pair(h, 0, n - 1);
    const DoubletStrength strength = doublet_strength(h, canon, degeneracy_tol);
    // n = 2 has no intermediate sites: both shifts vanish.
    const ShiftResult sp = n > 2 ? perturbative_shift(blocks.h_plus, blocks.doublet_coord) : ShiftResult{};
    const ShiftResult sm = n > 2 ? perturbative_shift(blocks.h_minus, blocks.doublet_coord) : ShiftResult{};

    DoubletRecord rec;
    rec.alpha_plus = strength.alpha_plus;
    rec.alpha_minus = strength.alpha_minus;
    rec.alpha = strength.alpha();
    rec.e_site = h(0, 0);
    rec.v_signed = h(0, n - 1);
    rec.vnorm2_plus = sp.vnorm2;
    rec.vnorm2_minus = sm.vnorm2;
    rec.s_plus = sp.s;
    rec.s_minus = sm.s;
    rec.delta_s = sp.s - sm.s;
    rec.rate_eff = std::abs(2.0 * rec.v_signed + rec.delta_s);
    rec.t_pred = rec.rate_eff > 0.0 ? std::numbers::pi / rec.rate_eff
                                    : std::numeric_limits<double>::infinity();
    rec.resonant_flag = sp.resonant || sm.resonant;
    return rec;
}

DoubletRecord analyze_doublet(const CentroSample& sample, const SitePair& pair,
                              double degeneracy_tol) {
    return analyze_doublet(sample.h, pair, degeneracy_tol);
}

double efficiency_lower_bound(const DoubletRecord& record, double alpha, double window) {
    if (!(record.rate_eff > 0.0)) return 0.0;
    const double t_star = std::min(window, std::numbers::pi / record.rate_eff);
    const double s = std::sin(0.5 * record.rate_eff * t_star);
    return alpha * alpha * s * s;
}

double centro_symmetry_epsilon(const Hamiltonian& h, const SitePair& pair) {
    const std::size_t n = h.size();
    if (n > kMaxEpsilonSites) {
        throw UnsupportedSize("centro_symmetry_epsilon: exact enumeration supports n <= 12");
    }
    if (n < 2 || n % 2 != 0) throw InvalidDimension("centro_symmetry_epsilon: n must be even");
    const auto canon = canonical_permutation(n, pair.in_index, pair.out_index);
    const Hamiltonian c = reorder_sites(h, canon);

    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) a[i * n + j] = c(i, j);
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        // ‖H_S − J H_S J‖² counts each mirrored pair of entries twice.
        double d2 = 0.0;
        for (std::size_t i = 0; i < n && d2 < best; ++i) {
            const std::size_t pi = perm[i] * n;
            const std::size_t qi = perm[n - 1 - i] * n;
            for (std::size_t j = 0; j < n; ++j) {
                const double diff = a[pi + perm[j]] - a[qi + perm[n - 1 - j]];
                d2 += diff * diff;
            }
        }
        best = std::min(best, d2);
    } while (n > 2 && std::next_permutation(perm.begin() + 1, perm.end() - 1));
    return std::sqrt(best) / static_cast<double>(n);
}

}  // namespace qtnet
