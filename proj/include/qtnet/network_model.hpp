#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qtnet/rng.hpp"

namespace qtnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Real symmetric coupling matrix in the site basis. Construction enforces
// exact symmetry and finiteness; odd sizes are allowed here, the J-structure
// operations reject them.
class Hamiltonian {
public:
    Hamiltonian() = default;

    // Throws InvalidArgument when `m` is not square, has non-finite entries
    // or deviates from symmetry by more than `sym_tol` (relative to its max
    // entry). The stored matrix is the exact symmetrization (m + mᵀ)/2.
    explicit Hamiltonian(const Matrix& m, double sym_tol = 1e-12);

    [[nodiscard]] std::size_t size() const noexcept {
        return static_cast<std::size_t>(m_.rows());
    }
    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
        return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

// Input/output site selection with the benchmark time T_R = π/(2|V|).
// `degenerate` marks V == 0, in which case t_r is +inf.
struct SitePair {
    std::size_t in_index = 0;
    std::size_t out_index = 1;
    double v_signed = 0.0;
    double v_mag = 0.0;
    double t_r = 0.0;
    bool degenerate = false;
};

SitePair make_site_pair(const Hamiltonian& h, std::size_t in, std::size_t out);

struct CentroSample {
    Hamiltonian h;
    Matrix h_plus;
    Matrix h_minus;
};

enum class PairMode { GlobalWeakest, CentroPairWeakest };

Matrix exchange_matrix(std::size_t n);

// Rows 0..n/2-1 span the J = +1 eigenspace, rows n/2..n-1 the J = -1 one.
Matrix j_eigenbasis(std::size_t n);

Hamiltonian sample_goe(std::size_t n, double xi, Stream& rng);

// Real symmetric m×m matrix with i.i.d. Gaussian entries, variance
// (1 + δ_ij)·variance_offdiag. Upper triangle drawn row-major.
Matrix sample_gaussian_symmetric(std::size_t m, double variance_offdiag, Stream& rng);
// Same draw order as sample_gaussian_symmetric, into preallocated storage.
void fill_gaussian_symmetric(Matrix& a, double variance_offdiag, Stream& rng);

CentroSample assemble_centro_symmetric(const Matrix& h_plus, const Matrix& h_minus);

// Blocks use the full dimension n in the variance 2ξ²/n; h_plus is drawn
// before h_minus from the same stream.
CentroSample sample_centro_symmetric(std::size_t n, double xi, Stream& rng);

// Hilbert-Schmidt distance ‖J h J − h‖.
double centro_symmetry_distance(const Hamiltonian& h);
bool is_centro_symmetric(const Hamiltonian& h, double tol);

SitePair select_io_pair(const Hamiltonian& h, PairMode mode);

// `perm[new] = old`; the result is P h Pᵀ.
Hamiltonian reorder_sites(const Hamiltonian& h, std::span<const std::size_t> perm);

// Ordering [in, remaining ascending, out]. For an anti-diagonal pair of a
// centro-symmetric matrix this preserves centro-symmetry.
std::vector<std::size_t> canonical_permutation(std::size_t n, std::size_t in, std::size_t out);

}  // namespace qtnet
