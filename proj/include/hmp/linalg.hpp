#pragma once

#include <Eigen/Dense>

#include "hmp/errors.hpp"

namespace hmp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

// Orthonormal DCT-II pair along the temporal axis. `forward * inverse == I`
// and `inverse == forward.transpose()`, so the round trip is self-testing.
struct DctBasis {
    Index size = 0;
    Matrix forward;
    Matrix inverse;
};

// Builds the orthonormal DCT-II matrix of size t x t.
// Row k, column n: s_k * sqrt(2/T) * cos(pi * (2n+1) * k / (2T)),
// with s_0 = 1/sqrt(2) and s_k = 1 otherwise.
DctBasis dct_basis(Index t);

// Applies the basis along the temporal (row) axis: forward * x.
template <class Derived>
Matrix apply_dct(const DctBasis& basis, const Eigen::MatrixBase<Derived>& x) {
    if (x.rows() != basis.size) {
        throw DimensionError("apply_dct: sequence has " + std::to_string(x.rows()) +
                             " rows, basis expects " + std::to_string(basis.size));
    }
    return basis.forward * x;
}

template <class Derived>
Matrix apply_idct(const DctBasis& basis, const Eigen::MatrixBase<Derived>& y) {
    if (y.rows() != basis.size) {
        throw DimensionError("apply_idct: sequence has " + std::to_string(y.rows()) +
                             " rows, basis expects " + std::to_string(basis.size));
    }
    return basis.inverse * y;
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace hmp
