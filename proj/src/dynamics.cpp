#include "qtnet/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "qtnet/error.hpp"
#include "qtnet/kernels/population_scan.hpp"

namespace qtnet {

EigenDecomposition eigendecompose(const Matrix& symmetric) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
    if (solver.info() != Eigen::Success) {
        throw NumericalFailure("eigendecompose: solver did not converge");
    }
    return EigenDecomposition{solver.eigenvalues(), solver.eigenvectors()};
}

EigenDecomposition eigendecompose(const Hamiltonian& h) { return eigendecompose(h.matrix()); }

std::complex<double> amplitude(const EigenDecomposition& ed, std::size_t in, std::size_t out,
                               double t) {
    const auto& u = ed.eigenvectors;
    const auto i = static_cast<Eigen::Index>(in);
    const auto o = static_cast<Eigen::Index>(out);
    double re = 0.0;
    double im = 0.0;
    for (Eigen::Index k = 0; k < u.cols(); ++k) {
        const double c = u(o, k) * u(i, k);
        const double theta = ed.eigenvalues(k) * t;
        re += c * std::cos(theta);
        im -= c * std::sin(theta);
    }
    return {re, im};
}

namespace {

struct Candidate {
    double t;
    double p;
};

}  // namespace

TransportRecord transfer_efficiency(const EigenDecomposition& ed, const SitePair& pair,
                                    double window_factor, std::size_t grid_points) {
    if (pair.degenerate || !(pair.v_mag > 0.0)) {
        throw DegeneratePair("transfer_efficiency: zero direct coupling, T_R undefined");
    }
    if (!(window_factor > 0.0)) throw InvalidArgument("transfer_efficiency: window_factor <= 0");
    if (grid_points < 100) throw InvalidArgument("transfer_efficiency: grid_points < 100");

    const Eigen::Index n = ed.eigenvalues.size();
    const auto in = static_cast<Eigen::Index>(pair.in_index);
    const auto out = static_cast<Eigen::Index>(pair.out_index);
    std::vector<double> energy(static_cast<std::size_t>(n));
    std::vector<double> weight(static_cast<std::size_t>(n));
    double abs_sum = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        energy[static_cast<std::size_t>(k)] = ed.eigenvalues(k);
        const double c = ed.eigenvectors(out, k) * ed.eigenvectors(in, k);
        weight[static_cast<std::size_t>(k)] = c;
        abs_sum += std::abs(c);
    }

    const double window = window_factor * pair.t_r;
    const double dt = window / static_cast<double>(grid_points - 1);
    std::vector<double> p(grid_points);
    kernels::population_scan(energy, weight, dt, p);
    for (double v : p) {
        if (!std::isfinite(v)) throw NumericalFailure("transfer_efficiency: NaN in dynamics");
    }

    const double span = ed.eigenvalues(n - 1) - ed.eigenvalues(0);
    const double half = 0.5 * dt * span;
    const double margin = 0.5 * abs_sum * abs_sum * half * half;
    const double best_grid = *std::max_element(p.begin(), p.end());

    auto population_at = [&](double t) {
        double re = 0.0;
        double im = 0.0;
        for (std::size_t k = 0; k < energy.size(); ++k) {
            re += weight[k] * std::cos(energy[k] * t);
            im -= weight[k] * std::sin(energy[k] * t);
        }
        return re * re + im * im;
    };

    // (P', P'') from A = Σ w e^{-iEt}: P' = 2Re(Ā A'), P'' = 2(|A'|² + Re(Ā A'')).
    auto derivatives_at = [&](double t) {
        double ar = 0.0, ai = 0.0, br = 0.0, bi = 0.0, cr = 0.0, ci = 0.0;
        for (std::size_t k = 0; k < energy.size(); ++k) {
            const double e = energy[k];
            const double co = weight[k] * std::cos(e * t);
            const double si = -weight[k] * std::sin(e * t);
            ar += co;
            ai += si;
            br += e * si;  // A' = -iE·(co + i si)
            bi -= e * co;
            cr -= e * e * co;
            ci -= e * e * si;
        }
        const double d1 = 2.0 * (ar * br + ai * bi);
        const double d2 = 2.0 * (br * br + bi * bi + ar * cr + ai * ci);
        return std::pair{d1, d2};
    };

    std::vector<Candidate> refined;
    const std::size_t last = grid_points - 1;
    for (std::size_t j = 0; j <= last; ++j) {
        const bool left_ok = j == 0 || p[j] >= p[j - 1];
        const bool right_ok = j == last || p[j] >= p[j + 1];
        if (!left_ok || !right_ok || p[j] < best_grid - margin) continue;
        const double lo = dt * static_cast<double>(j == 0 ? 0 : j - 1);
        const double hi = j == last ? window : dt * static_cast<double>(j + 1);
        const auto [t_best, neg_p] = boost::math::tools::brent_find_minima(
            [&](double t) { return -population_at(t); }, lo, hi, 40);
        Candidate c{t_best, -neg_p};
        // Brent stops near sqrt(eps) in t; Newton on P' = 0 with analytic
        // derivatives brings P to rounding level, so nested windows agree.
        double t = t_best;
        for (int it = 0; it < 4; ++it) {
            const auto [d1, d2] = derivatives_at(t);
            if (!(d2 < 0.0)) break;
            const double next = t - d1 / d2;
            if (!(next >= lo && next <= hi) || next == t) break;
            t = next;
            const double pn = population_at(t);
            if (pn > c.p) c = Candidate{t, pn};
        }
        const double t_grid = j == last ? window : dt * static_cast<double>(j);
        if (p[j] > c.p) c = Candidate{t_grid, p[j]};
        refined.push_back(c);
    }

    double p_max = 0.0;
    for (const auto& c : refined) p_max = std::max(p_max, c.p);
    double t_peak = 0.0;
    for (const auto& c : refined) {
        if (c.p >= p_max * (1.0 - 1e-9)) {
            t_peak = c.t;
            break;
        }
    }
    if (!std::isfinite(p_max)) throw NumericalFailure("transfer_efficiency: NaN in dynamics");

    TransportRecord rec;
    rec.p_max = p_max;
    rec.t_peak = t_peak;
    rec.t_r = pair.t_r;
    rec.ratio = t_peak > 0.0 ? pair.t_r / t_peak : std::numeric_limits<double>::infinity();
    rec.window_factor = window_factor;
    return rec;
}

TransportRecord transfer_efficiency(const Hamiltonian& h, const SitePair& pair,
                                    double window_factor, std::size_t grid_points) {
    if (pair.degenerate || !(pair.v_mag > 0.0)) {
        throw DegeneratePair("transfer_efficiency: zero direct coupling, T_R undefined");
    }
    return transfer_efficiency(eigendecompose(h), pair, window_factor, grid_points);
}

}  // namespace qtnet
