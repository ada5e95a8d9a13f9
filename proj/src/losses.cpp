#include "hmp/losses.hpp"

namespace hmp {

namespace {

void check_pair(const Matrix& pred, const Matrix& gt) {
    if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
        throw DimensionError("loss: prediction is " + std::to_string(pred.rows()) +
                             "x" + std::to_string(pred.cols()) + ", ground truth is " +
                             std::to_string(gt.rows()) + "x" +
                             std::to_string(gt.cols()));
    }
}

Index hand_col(const Matrix& m, const JointLayout& layout) {
    layout.validate();
    const Index col = layout.right_hand_col();
    if (col + 3 > m.cols()) {
        throw DimensionError("loss: right-hand columns exceed matrix width");
    }
    return col;
}

}  // namespace

double loss_re(const Matrix& pred, const Matrix& gt) {
    check_pair(pred, gt);
    return ops::sum_squares(ops::sub(pred, gt))(0, 0);
}

double loss_v(const Matrix& pred, const Matrix& gt) {
    check_pair(pred, gt);
    return ops::sum_squares(ops::sub(ops::diff_rows(pred), ops::diff_rows(gt)))(0, 0);
}

double loss_r(const Matrix& pred, const Eigen::RowVector3d& ree_final,
              const JointLayout& layout) {
    const Index col = hand_col(pred, layout);
    const Matrix last = ops::row_slice(ops::col_slice(pred, col, 3), pred.rows() - 1, 1);
    Matrix point(1, 3);
    point << ree_final(0), ree_final(1), ree_final(2);
    return ops::sum_squares(ops::sub(last, point))(0, 0);
}

double loss_b(const Matrix& pred, const Matrix& gt, const JointLayout& layout) {
    check_pair(pred, gt);
    layout.validate();
    const Index hand = layout.right_hand;
    return ops::sum_squares(ops::sub(ops::hand_distance_mean(pred, hand),
                                     ops::hand_distance_mean(gt, hand)))(0, 0);
}

double loss_c(const Matrix& pred, const Matrix& gt,
              const Eigen::RowVector3d& ree_final, int intention,
              const JointLayout& layout) {
    if (intention != kCollaborative && intention != kNonCollaborative) {
        throw ContractError("loss_c: intention label must be 0 or 1");
    }
    if (intention == kNonCollaborative) return 0.0;
    return 0.05 * loss_r(pred, ree_final, layout) + 0.95 * loss_b(pred, gt, layout);
}

double loss_rer(const Matrix& pred, const Matrix& gt, const JointLayout& layout) {
    check_pair(pred, gt);
    const Index col = hand_col(pred, layout);
    return loss_re(ops::col_slice(pred, col, 3), ops::col_slice(gt, col, 3));
}

double loss_vr(const Matrix& pred, const Matrix& gt, const JointLayout& layout) {
    check_pair(pred, gt);
    const Index col = hand_col(pred, layout);
    return loss_v(ops::col_slice(pred, col, 3), ops::col_slice(gt, col, 3));
}

LossBreakdown loss_h(const Matrix& pred, const Matrix& gt,
                     const Eigen::RowVector3d& ree_final, int intention,
                     const JointLayout& layout) {
    check_pair(pred, gt);
    EvalBackend bk;
    const auto L = handover_loss_graph(bk, Matrix(pred), gt, ree_final, intention,
                                       layout.right_hand);
    return read_breakdown(bk, L);
}

LossBreakdown average_breakdown(const std::vector<LossBreakdown>& parts) {
    if (parts.empty()) {
        throw ContractError("average_breakdown: empty batch");
    }
    LossBreakdown mean;
    const double n = static_cast<double>(parts.size());
    for (const LossBreakdown& p : parts) {
        mean.re += p.re;
        mean.v += p.v;
        mean.c += p.c;
        mean.r += p.r;
        mean.b += p.b;
        mean.rer += p.rer;
        mean.vr += p.vr;
    }
    mean.re /= n;
    mean.v /= n;
    mean.c /= n;
    mean.r /= n;
    mean.b /= n;
    mean.rer /= n;
    mean.vr /= n;
    mean.total = mean.re + mean.v + mean.c + mean.rer + mean.vr;
    return mean;
}

}  // namespace hmp
