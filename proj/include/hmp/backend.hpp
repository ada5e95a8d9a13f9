#pragma once

#include <utility>

#include "hmp/ops.hpp"
#include "hmp/param_store.hpp"
#include "hmp/tape.hpp"

namespace hmp {

// The network and loss graphs are written once as templates over a backend.
// EvalBackend computes values immediately; TapeBackend records the same
// operations onto a Tape for reverse-mode differentiation. Both dispatch to
// the kernels in ops.hpp, so the two paths produce bit-identical values.

struct EvalBackend {
    using Handle = Matrix;

    Handle constant(Matrix v) { return v; }
    Handle parameter(const ParamStore& store, Index tensor) {
        return store.view(tensor);
    }

    Handle matmul(const Handle& a, const Handle& b) { return ops::matmul(a, b); }
    Handle add(const Handle& a, const Handle& b) { return ops::add(a, b); }
    Handle sub(const Handle& a, const Handle& b) { return ops::sub(a, b); }
    Handle scale(const Handle& a, double s) { return ops::scale(a, s); }
    Handle add_row(const Handle& a, const Handle& row) { return ops::add_row(a, row); }
    Handle add_col(const Handle& a, const Handle& col) { return ops::add_col(a, col); }
    Handle transpose(const Handle& a) { return ops::transpose(a); }
    Handle layer_norm(const Handle& x, const Handle& gamma, const Handle& beta,
                      double eps) {
        return ops::layer_norm(x, gamma, beta, eps);
    }
    Handle embed_row(const Handle& table, Index which, Index copies) {
        return ops::embed_row(table, which, copies);
    }
    Handle mean_rows(const Handle& x) { return ops::mean_rows(x); }
    Handle flatten_rows(const Handle& x) { return ops::flatten_rows(x); }
    Handle row_slice(const Handle& x, Index first, Index count) {
        return ops::row_slice(x, first, count);
    }
    Handle col_slice(const Handle& x, Index first, Index count) {
        return ops::col_slice(x, first, count);
    }
    Handle diff_rows(const Handle& x) { return ops::diff_rows(x); }
    Handle relu(const Handle& x) { return ops::relu(x); }
    Handle sum_squares(const Handle& x) { return ops::sum_squares(x); }
    Handle softmax_cross_entropy(const Handle& logits, Index target) {
        return ops::softmax_cross_entropy(logits, target);
    }
    Handle hand_distance_mean(const Handle& x, Index hand) {
        return ops::hand_distance_mean(x, hand);
    }

    const Matrix& value(const Handle& h) const { return h; }
};

struct TapeBackend {
    using Handle = int;

    explicit TapeBackend(Tape& t) : tape(&t) {}
    Tape* tape;

    Handle constant(Matrix v) { return tape->constant(std::move(v)); }
    Handle parameter(const ParamStore& store, Index tensor) {
        return tape->parameter(store.view(tensor));
    }

    Handle matmul(Handle a, Handle b) { return tape->matmul(a, b); }
    Handle add(Handle a, Handle b) { return tape->add(a, b); }
    Handle sub(Handle a, Handle b) { return tape->sub(a, b); }
    Handle scale(Handle a, double s) { return tape->scale(a, s); }
    Handle add_row(Handle a, Handle row) { return tape->add_row(a, row); }
    Handle add_col(Handle a, Handle col) { return tape->add_col(a, col); }
    Handle transpose(Handle a) { return tape->transpose(a); }
    Handle layer_norm(Handle x, Handle gamma, Handle beta, double eps) {
        return tape->layer_norm(x, gamma, beta, eps);
    }
    Handle embed_row(Handle table, Index which, Index copies) {
        return tape->embed_row(table, which, copies);
    }
    Handle mean_rows(Handle x) { return tape->mean_rows(x); }
    Handle flatten_rows(Handle x) { return tape->flatten_rows(x); }
    Handle row_slice(Handle x, Index first, Index count) {
        return tape->row_slice(x, first, count);
    }
    Handle col_slice(Handle x, Index first, Index count) {
        return tape->col_slice(x, first, count);
    }
    Handle diff_rows(Handle x) { return tape->diff_rows(x); }
    Handle relu(Handle x) { return tape->relu(x); }
    Handle sum_squares(Handle x) { return tape->sum_squares(x); }
    Handle softmax_cross_entropy(Handle logits, Index target) {
        return tape->softmax_cross_entropy(logits, target);
    }
    Handle hand_distance_mean(Handle x, Index hand) {
        return tape->hand_distance_mean(x, hand);
    }

    const Matrix& value(Handle h) const { return tape->value(h); }
};

}  // namespace hmp
