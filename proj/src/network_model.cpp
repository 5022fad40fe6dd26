#include "qtnet/network_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/random/normal_distribution.hpp>

#include "qtnet/error.hpp"

namespace qtnet {

namespace {

void require_even(std::size_t n, const char* what) {
    if (n < 2 || n % 2 != 0) {
        throw InvalidDimension(std::string(what) + ": dimension must be even and >= 2, got " +
                               std::to_string(n));
    }
}

}  // namespace

Hamiltonian::Hamiltonian(const Matrix& m, double sym_tol) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw InvalidDimension("Hamiltonian: matrix must be square and non-empty");
    }
    if (!m.allFinite()) {
        throw InvalidArgument("Hamiltonian: non-finite entry");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > sym_tol * scale) {
        throw InvalidArgument("Hamiltonian: matrix is not symmetric");
    }
    m_ = 0.5 * (m + m.transpose());
}

SitePair make_site_pair(const Hamiltonian& h, std::size_t in, std::size_t out) {
    if (in == out || in >= h.size() || out >= h.size()) {
        throw InvalidArgument("site pair: indices must be distinct and in range");
    }
    SitePair p;
    p.in_index = in;
    p.out_index = out;
    p.v_signed = h(in, out);
    p.v_mag = std::abs(p.v_signed);
    p.degenerate = p.v_mag == 0.0;
    p.t_r = p.degenerate ? std::numeric_limits<double>::infinity()
                         : std::numbers::pi / (2.0 * p.v_mag);
    return p;
}

Matrix exchange_matrix(std::size_t n) {
    require_even(n, "exchange_matrix");
    const auto N = static_cast<Eigen::Index>(n);
    Matrix j = Matrix::Zero(N, N);
    for (Eigen::Index i = 0; i < N; ++i) j(i, N - 1 - i) = 1.0;
    return j;
}

Matrix j_eigenbasis(std::size_t n) {
    require_even(n, "j_eigenbasis");
    const auto N = static_cast<Eigen::Index>(n);
    const Eigen::Index m = N / 2;
    const double r = std::numbers::sqrt2 / 2.0;
    Matrix q = Matrix::Zero(N, N);
    for (Eigen::Index i = 0; i < m; ++i) {
        q(i, i) = r;
        q(i, N - 1 - i) = r;
        q(m + i, i) = r;
        q(m + i, N - 1 - i) = -r;
    }
    return q;
}

void fill_gaussian_symmetric(Matrix& a, double variance_offdiag, Stream& rng) {
    const Eigen::Index m = a.rows();
    const double sd_off = std::sqrt(variance_offdiag);
    const double sd_diag = std::sqrt(2.0 * variance_offdiag);
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        a(i, i) = sd_diag * normal(rng);
        for (Eigen::Index j = i + 1; j < m; ++j) {
            const double x = sd_off * normal(rng);
            a(i, j) = x;
            a(j, i) = x;
        }
    }
}

Matrix sample_gaussian_symmetric(std::size_t m, double variance_offdiag, Stream& rng) {
    const auto M = static_cast<Eigen::Index>(m);
    Matrix a(M, M);
    fill_gaussian_symmetric(a, variance_offdiag, rng);
    return a;
}

Hamiltonian sample_goe(std::size_t n, double xi, Stream& rng) {
    if (n < 2) throw InvalidDimension("sample_goe: n must be >= 2");
    if (!(xi > 0.0)) throw InvalidArgument("sample_goe: xi must be positive");
    return Hamiltonian(sample_gaussian_symmetric(n, 2.0 * xi * xi / static_cast<double>(n), rng));
}

CentroSample assemble_centro_symmetric(const Matrix& h_plus, const Matrix& h_minus) {
    if (h_plus.rows() != h_plus.cols() || h_minus.rows() != h_minus.cols() ||
        h_plus.rows() != h_minus.rows() || h_plus.rows() == 0) {
        throw InvalidDimension("assemble_centro_symmetric: blocks must be square and equal-sized");
    }
    const Eigen::Index m = h_plus.rows();
    const Eigen::Index n = 2 * m;
    Matrix block = Matrix::Zero(n, n);
    block.topLeftCorner(m, m) = h_plus;
    block.bottomRightCorner(m, m) = h_minus;
    const Matrix q = j_eigenbasis(static_cast<std::size_t>(n));
    Matrix h = q.transpose() * block * q;
    // Enforce the J symmetry exactly: average each entry with its mirror.
    Matrix mirrored = h.reverse();
    h = 0.5 * (h + mirrored);
    return CentroSample{Hamiltonian(h, 1e-10), h_plus, h_minus};
}

CentroSample sample_centro_symmetric(std::size_t n, double xi, Stream& rng) {
    require_even(n, "sample_centro_symmetric");
    if (n < 4) throw InvalidDimension("sample_centro_symmetric: n must be >= 4");
    if (!(xi > 0.0)) throw InvalidArgument("sample_centro_symmetric: xi must be positive");
    const double var = 2.0 * xi * xi / static_cast<double>(n);
    Matrix hp = sample_gaussian_symmetric(n / 2, var, rng);
    Matrix hm = sample_gaussian_symmetric(n / 2, var, rng);
    return assemble_centro_symmetric(hp, hm);
}

double centro_symmetry_distance(const Hamiltonian& h) {
    // (J h J)_{ij} = h_{n-1-i, n-1-j}
    return (h.matrix().reverse() - h.matrix()).norm();
}

bool is_centro_symmetric(const Hamiltonian& h, double tol) {
    require_even(h.size(), "is_centro_symmetric");
    return centro_symmetry_distance(h) <= tol;
}

SitePair select_io_pair(const Hamiltonian& h, PairMode mode) {
    const std::size_t n = h.size();
    if (n < 2) throw InvalidDimension("select_io_pair: n must be >= 2");
    std::size_t best_i = 0;
    std::size_t best_j = 1;
    double best = std::numeric_limits<double>::infinity();
    if (mode == PairMode::GlobalWeakest) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double v = std::abs(h(i, j));
                if (v < best) {
                    best = v;
                    best_i = i;
                    best_j = j;
                }
            }
        }
    } else {
        if (!is_centro_symmetric(h, 1e-9)) {
            throw InvalidArgument("select_io_pair: centro-pair mode needs a centro-symmetric matrix");
        }
        for (std::size_t i = 0; i < n / 2; ++i) {
            const double v = std::abs(h(i, n - 1 - i));
            if (v < best) {
                best = v;
                best_i = i;
                best_j = n - 1 - i;
            }
        }
    }
    return make_site_pair(h, best_i, best_j);
}

Hamiltonian reorder_sites(const Hamiltonian& h, std::span<const std::size_t> perm) {
    const std::size_t n = h.size();
    if (perm.size() != n) throw InvalidArgument("reorder_sites: permutation has wrong length");
    std::vector<char> seen(n, 0);
    for (std::size_t p : perm) {
        if (p >= n || seen[p]) throw InvalidArgument("reorder_sites: not a bijection");
        seen[p] = 1;
    }
    const auto N = static_cast<Eigen::Index>(n);
    Matrix out(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index j = 0; j < N; ++j) {
            out(i, j) = h(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }
    }
    return Hamiltonian(out, 0.0);
}

std::vector<std::size_t> canonical_permutation(std::size_t n, std::size_t in, std::size_t out) {
    if (in == out || in >= n || out >= n) {
        throw InvalidArgument("canonical_permutation: invalid in/out");
    }
    std::vector<std::size_t> perm;
    perm.reserve(n);
    perm.push_back(in);
    for (std::size_t k = 0; k < n; ++k) {
        if (k != in && k != out) perm.push_back(k);
    }
    perm.push_back(out);
    return perm;
}

}  // namespace qtnet
