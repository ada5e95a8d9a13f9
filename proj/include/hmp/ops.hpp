#pragma once

#include <cmath>

#include "hmp/linalg.hpp"

// Numeric kernels shared by the immediate-evaluation backend and the tape.
// Both paths call the exact same functions so their outputs are bit-identical.
namespace hmp::ops {

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul: inner dimensions " + std::to_string(a.cols()) +
                             " and " + std::to_string(b.rows()) + " disagree");
    }
    return a * b;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("add: shape mismatch");
    }
    return a + b;
}

inline Matrix sub(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError("sub: shape mismatch");
    }
    return a - b;
}

inline Matrix scale(const Matrix& a, double s) { return s * a; }

// Adds a 1 x C row vector to every row.
inline Matrix add_row(const Matrix& a, const Matrix& row) {
    if (row.rows() != 1 || row.cols() != a.cols()) {
        throw DimensionError("add_row: bias must be 1 x cols");
    }
    return a.rowwise() + row.row(0);
}

// Adds a T x 1 column vector to every column.
inline Matrix add_col(const Matrix& a, const Matrix& col) {
    if (col.cols() != 1 || col.rows() != a.rows()) {
        throw DimensionError("add_col: bias must be rows x 1");
    }
    return a.colwise() + col.col(0);
}

inline Matrix transpose(const Matrix& a) { return a.transpose(); }

// Row-wise layer normalization with per-column affine parameters.
// Each row is normalized over its entries (biased variance), then scaled by
// gamma and shifted by beta, both 1 x C.
inline Matrix layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta,
                         double eps) {
    if (gamma.rows() != 1 || gamma.cols() != x.cols() || beta.rows() != 1 ||
        beta.cols() != x.cols()) {
        throw DimensionError("layer_norm: gamma/beta must be 1 x cols");
    }
    const double c = static_cast<double>(x.cols());
    Matrix out(x.rows(), x.cols());
    for (Index r = 0; r < x.rows(); ++r) {
        const double mean = x.row(r).mean();
        const double var = (x.row(r).array() - mean).square().sum() / c;
        const double inv = 1.0 / std::sqrt(var + eps);
        out.row(r) =
            ((x.row(r).array() - mean) * inv) * gamma.row(0).array() + beta.row(0).array();
    }
    return out;
}

// Replicates row `which` of `table` into `copies` identical rows.
inline Matrix embed_row(const Matrix& table, Index which, Index copies) {
    if (which < 0 || which >= table.rows()) {
        throw DimensionError("embed_row: row index out of range");
    }
    return table.row(which).replicate(copies, 1);
}

inline Matrix mean_rows(const Matrix& x) {
    return x.colwise().sum() / static_cast<double>(x.rows());
}

// Concatenates the rows into a single 1 x (rows*cols) row, row-major order.
inline Matrix flatten_rows(const Matrix& x) {
    Matrix out(1, x.rows() * x.cols());
    for (Index r = 0; r < x.rows(); ++r) {
        out.block(0, r * x.cols(), 1, x.cols()) = x.row(r);
    }
    return out;
}

inline Matrix row_slice(const Matrix& x, Index first, Index count) {
    if (first < 0 || count < 0 || first + count > x.rows()) {
        throw DimensionError("row_slice: range out of bounds");
    }
    return x.middleRows(first, count);
}

inline Matrix col_slice(const Matrix& x, Index first, Index count) {
    if (first < 0 || count < 0 || first + count > x.cols()) {
        throw DimensionError("col_slice: range out of bounds");
    }
    return x.middleCols(first, count);
}

// First differences along the temporal axis: out_t = x_{t+1} - x_t.
inline Matrix diff_rows(const Matrix& x) {
    if (x.rows() < 2) {
        throw DimensionError("diff_rows: need at least 2 rows");
    }
    return x.bottomRows(x.rows() - 1) - x.topRows(x.rows() - 1);
}

inline Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

inline Matrix sum_squares(const Matrix& x) {
    Matrix out(1, 1);
    out(0, 0) = x.squaredNorm();
    return out;
}

// Numerically stable softmax cross-entropy of a 1 x M logit row against an
// integer target class. Returns a 1 x 1 matrix.
inline Matrix softmax_cross_entropy(const Matrix& logits, Index target) {
    if (logits.rows() != 1) {
        throw DimensionError("softmax_cross_entropy: logits must be a single row");
    }
    if (target < 0 || target >= logits.cols()) {
        throw DimensionError("softmax_cross_entropy: target class out of range");
    }
    const double mx = logits.maxCoeff();
    const double lse = std::log((logits.array() - mx).exp().sum());
    Matrix out(1, 1);
    out(0, 0) = -(logits(0, target) - mx - lse);
    return out;
}

// Per-frame mean Euclidean distance between the hand joint and every other
// joint. `x` is N x 3K with joints laid out as consecutive xyz triples;
// `hand` is the joint index whose triple is the reference. Returns N x 1.
inline Matrix hand_distance_mean(const Matrix& x, Index hand) {
    const Index joints = x.cols() / 3;
    if (x.cols() % 3 != 0 || hand < 0 || hand >= joints || joints < 2) {
        throw DimensionError("hand_distance_mean: bad column count or hand index");
    }
    Matrix out(x.rows(), 1);
    for (Index r = 0; r < x.rows(); ++r) {
        double acc = 0.0;
        for (Index j = 0; j < joints; ++j) {
            if (j == hand) continue;
            const double dx = x(r, 3 * hand) - x(r, 3 * j);
            const double dy = x(r, 3 * hand + 1) - x(r, 3 * j + 1);
            const double dz = x(r, 3 * hand + 2) - x(r, 3 * j + 2);
            acc += std::sqrt(dx * dx + dy * dy + dz * dz);
        }
        out(r, 0) = acc / static_cast<double>(joints - 1);
    }
    return out;
}

}  // namespace hmp::ops
