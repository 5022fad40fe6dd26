#pragma once

#include <cstdint>

#include "qtnet/network_model.hpp"

namespace qtnet::detail {

// Cheap rejection test run before the full doublet analysis of a
// centro-doublet attempt. It regenerates the attempt's two blocks, predicts
// the in/out coordinate and rejects only if one block provably cannot carry
// an eigenspace with weight > α on that coordinate. Every test is a
// necessary condition with slack, so the post-selected ensemble is the same
// as without screening.
class DoubletScreen {
public:
    DoubletScreen(std::size_t n, double xi, double alpha);

    bool may_accept(std::uint64_t seed);

    // Exposed for tests.
    bool block_may_pass(const Matrix& block, Eigen::Index coord, double frob_max);
    bool bound_may_pass(const Matrix& block, Eigen::Index coord, double frob_max) const;

private:
    Eigen::Index m_;
    double variance_;
    double alpha_s_;
    Matrix plus_;
    Matrix minus_;
    Eigen::SelfAdjointEigenSolver<Matrix> solver_;
};

}  // namespace qtnet::detail
