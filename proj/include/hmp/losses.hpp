#pragma once

#include <vector>

#include "hmp/backend.hpp"
#include "hmp/dataset.hpp"
#include "hmp/linalg.hpp"

namespace hmp {

// Per-term values of the handover loss for one sample or one batch.
// total = re + v + c + rer + vr, with c = 0.05 r + 0.95 b on collaborative
// samples and exactly 0 (including its gradient) otherwise.
struct LossBreakdown {
    double re = 0.0;
    double v = 0.0;
    double c = 0.0;
    double r = 0.0;
    double b = 0.0;
    double rer = 0.0;
    double vr = 0.0;
    double total = 0.0;
};

double loss_re(const Matrix& pred, const Matrix& gt);
double loss_v(const Matrix& pred, const Matrix& gt);
double loss_r(const Matrix& pred, const Eigen::RowVector3d& ree_final,
              const JointLayout& layout = default_layout());
double loss_b(const Matrix& pred, const Matrix& gt,
              const JointLayout& layout = default_layout());
double loss_c(const Matrix& pred, const Matrix& gt,
              const Eigen::RowVector3d& ree_final, int intention,
              const JointLayout& layout = default_layout());
double loss_rer(const Matrix& pred, const Matrix& gt,
                const JointLayout& layout = default_layout());
double loss_vr(const Matrix& pred, const Matrix& gt,
               const JointLayout& layout = default_layout());

LossBreakdown loss_h(const Matrix& pred, const Matrix& gt,
                     const Eigen::RowVector3d& ree_final, int intention,
                     const JointLayout& layout = default_layout());

// Arithmetic mean of each term over samples; total recomputed from the
// averaged terms so the breakdown invariant holds exactly.
LossBreakdown average_breakdown(const std::vector<LossBreakdown>& parts);

// ---- graph construction ----

template <class B>
struct LossHandles {
    typename B::Handle re{}, v{}, rer{}, vr{};
    typename B::Handle r{}, b{}, c{};  // bound only when has_c
    typename B::Handle total{};
    bool has_c = false;
};

// Builds the handover loss subgraph over a predicted-motion handle. The
// collaborative terms are only added to the graph when the sample is
// collaborative, so gating removes both their value and their gradient.
template <class B>
LossHandles<B> handover_loss_graph(B& bk, typename B::Handle pred, const Matrix& gt,
                                   const Eigen::RowVector3d& ree_final,
                                   int intention, Index hand_joint) {
    if (intention != kCollaborative && intention != kNonCollaborative) {
        throw ContractError("handover loss: intention label must be 0 or 1");
    }
    LossHandles<B> L;
    auto gtc = bk.constant(gt);
    L.re = bk.sum_squares(bk.sub(pred, gtc));
    L.v = bk.sum_squares(bk.sub(bk.diff_rows(pred), bk.diff_rows(gtc)));
    auto ph = bk.col_slice(pred, 3 * hand_joint, 3);
    auto gh = bk.col_slice(gtc, 3 * hand_joint, 3);
    L.rer = bk.sum_squares(bk.sub(ph, gh));
    L.vr = bk.sum_squares(bk.sub(bk.diff_rows(ph), bk.diff_rows(gh)));
    auto partial = bk.add(bk.add(L.re, L.v), bk.add(L.rer, L.vr));
    if (intention == kCollaborative) {
        L.has_c = true;
        Matrix point(1, 3);
        point << ree_final(0), ree_final(1), ree_final(2);
        auto last = bk.row_slice(ph, gt.rows() - 1, 1);
        L.r = bk.sum_squares(bk.sub(last, bk.constant(point)));
        L.b = bk.sum_squares(bk.sub(bk.hand_distance_mean(pred, hand_joint),
                                    bk.hand_distance_mean(gtc, hand_joint)));
        L.c = bk.add(bk.scale(L.r, 0.05), bk.scale(L.b, 0.95));
        L.total = bk.add(partial, L.c);
    } else {
        L.total = partial;
    }
    return L;
}

// Reads the scalar term values out of a built graph.
template <class B>
LossBreakdown read_breakdown(const B& bk, const LossHandles<B>& L) {
    LossBreakdown out;
    out.re = bk.value(L.re)(0, 0);
    out.v = bk.value(L.v)(0, 0);
    out.rer = bk.value(L.rer)(0, 0);
    out.vr = bk.value(L.vr)(0, 0);
    if (L.has_c) {
        out.r = bk.value(L.r)(0, 0);
        out.b = bk.value(L.b)(0, 0);
        out.c = bk.value(L.c)(0, 0);
    }
    out.total = bk.value(L.total)(0, 0);
    return out;
}

}  // namespace hmp
