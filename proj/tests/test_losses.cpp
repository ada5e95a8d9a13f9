#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hmp/backend.hpp"
#include "hmp/losses.hpp"
#include "test_util.hpp"

using namespace hmp;
using testutil::random_dyadic_matrix;
using testutil::random_matrix;

namespace {

constexpr Index kHand = 8;
constexpr Index kHandCol = 24;

// independent loop-based oracles
double oracle_re(const Matrix& p, const Matrix& g) {
    double acc = 0.0;
    for (Index r = 0; r < p.rows(); ++r) {
        for (Index c = 0; c < p.cols(); ++c) {
            const double d = p(r, c) - g(r, c);
            acc += d * d;
        }
    }
    return acc;
}

double oracle_v(const Matrix& p, const Matrix& g) {
    double acc = 0.0;
    for (Index r = 1; r < p.rows(); ++r) {
        for (Index c = 0; c < p.cols(); ++c) {
            const double d = (p(r, c) - p(r - 1, c)) - (g(r, c) - g(r - 1, c));
            acc += d * d;
        }
    }
    return acc;
}

double oracle_hdm(const Matrix& x, Index row) {
    double acc = 0.0;
    for (Index j = 0; j < 9; ++j) {
        if (j == kHand) continue;
        double sq = 0.0;
        for (Index a = 0; a < 3; ++a) {
            const double d = x(row, kHandCol + a) - x(row, 3 * j + a);
            sq += d * d;
        }
        acc += std::sqrt(sq);
    }
    return acc / 8.0;
}

double oracle_b(const Matrix& p, const Matrix& g) {
    double acc = 0.0;
    for (Index r = 0; r < p.rows(); ++r) {
        const double d = oracle_hdm(p, r) - oracle_hdm(g, r);
        acc += d * d;
    }
    return acc;
}

double oracle_r(const Matrix& p, const Eigen::RowVector3d& ree) {
    double acc = 0.0;
    for (Index a = 0; a < 3; ++a) {
        const double d = p(p.rows() - 1, kHandCol + a) - ree(a);
        acc += d * d;
    }
    return acc;
}

bool close(double a, double b, double tol = 1e-12) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("reconstruction loss: zero at equality, 270 for an all-ones offset") {
    std::mt19937_64 g(1);
    const Matrix gt = random_matrix(g, 10, 27);
    CHECK(loss_re(gt, gt) == 0.0);
    const Matrix off = gt + Matrix::Constant(10, 27, 1.0);
    CHECK(loss_re(off, gt) == doctest::Approx(270.0).epsilon(1e-12));
    const Matrix p = random_matrix(g, 10, 27);
    CHECK(close(loss_re(p, gt), oracle_re(p, gt)));
}

TEST_CASE("velocity loss ignores any constant offset") {
    std::mt19937_64 g(2);
    const Matrix gt = random_dyadic_matrix(g, 10, 27);
    CHECK(loss_v(gt, gt) == 0.0);
    // constant offset leaves all frame-to-frame differences intact
    const Matrix shifted = gt + Matrix::Constant(10, 27, 0.25);
    CHECK(loss_v(shifted, gt) == 0.0);
    // two different constant sequences have zero velocity error too
    CHECK(loss_v(Matrix::Constant(10, 27, 1.5), Matrix::Constant(10, 27, -2.0)) == 0.0);
    const Matrix p = random_matrix(g, 10, 27);
    CHECK(close(loss_v(p, gt), oracle_v(p, gt)));
}

TEST_CASE("end-effector loss measures the squared final-frame hand gap") {
    std::mt19937_64 g(3);
    Matrix p = random_matrix(g, 10, 27);
    const Eigen::RowVector3d ree(0.6, 0.0, 1.05);
    p.row(9).segment(kHandCol, 3) = ree;
    CHECK(loss_r(p, ree) == 0.0);
    p(9, kHandCol) = ree(0) + 0.3;
    p(9, kHandCol + 2) = ree(2) + 0.4;
    CHECK(loss_r(p, ree) == doctest::Approx(0.25).epsilon(1e-12));
    const Matrix q = random_matrix(g, 10, 27);
    CHECK(close(loss_r(q, ree), oracle_r(q, ree)));
}

TEST_CASE("body-distance loss is invariant under rigid translation") {
    std::mt19937_64 g(4);
    const Matrix gt = random_dyadic_matrix(g, 10, 27);
    CHECK(loss_b(gt, gt) == 0.0);
    // translating every joint by the same dyadic vector is exact in binary64,
    // so the inter-joint distances and hence the loss are exactly unchanged
    Matrix moved = gt;
    for (Index j = 0; j < 9; ++j) {
        moved.col(3 * j).array() += 0.5;
        moved.col(3 * j + 1).array() += -0.25;
        moved.col(3 * j + 2).array() += 1.0;
    }
    CHECK(loss_b(moved, gt) == 0.0);
    const Matrix p = random_matrix(g, 10, 27);
    CHECK(close(loss_b(p, gt), oracle_b(p, gt)));
    // unlike loss_b, the end-effector term does react to translation
    const Eigen::RowVector3d ree(0.6, 0.0, 1.05);
    CHECK(loss_r(moved, ree) != loss_r(gt, ree));
}

TEST_CASE("right-hand-only terms ignore every other joint") {
    std::mt19937_64 g(5);
    const Matrix gt = random_matrix(g, 10, 27);
    Matrix p = gt;
    p.leftCols(24) = random_matrix(g, 10, 24);  // perturb all non-hand joints
    CHECK(loss_rer(p, gt) == 0.0);
    CHECK(loss_vr(p, gt) == 0.0);
    const Matrix q = random_matrix(g, 10, 27);
    CHECK(close(loss_rer(q, gt),
                oracle_re(q.middleCols(kHandCol, 3), gt.middleCols(kHandCol, 3))));
    CHECK(close(loss_vr(q, gt),
                oracle_v(q.middleCols(kHandCol, 3), gt.middleCols(kHandCol, 3))));
}

TEST_CASE("collaborative term combines its sub-terms with the 0.05/0.95 weights") {
    CHECK(0.05 * 2.0 + 0.95 * 4.0 == 3.9);
    std::mt19937_64 g(6);
    const Matrix p = random_matrix(g, 10, 27);
    const Matrix gt = random_matrix(g, 10, 27);
    const Eigen::RowVector3d ree(0.6, 0.0, 1.05);
    const double expected = 0.05 * loss_r(p, ree) + 0.95 * loss_b(p, gt);
    CHECK(loss_c(p, gt, ree, kCollaborative) == expected);
    CHECK(loss_c(p, gt, ree, kNonCollaborative) == 0.0);
}

TEST_CASE("full loss breakdown satisfies its sum invariant") {
    std::mt19937_64 g(7);
    const Matrix gt = random_matrix(g, 10, 27);
    const Matrix p = random_matrix(g, 10, 27);
    const Eigen::RowVector3d ree(0.6, 0.0, 1.05);

    for (int intention : {kCollaborative, kNonCollaborative}) {
        const LossBreakdown lb = loss_h(p, gt, ree, intention);
        CHECK(close(lb.total, lb.re + lb.v + lb.c + lb.rer + lb.vr));
        CHECK(lb.re >= 0.0);
        CHECK(lb.v >= 0.0);
        CHECK(lb.c >= 0.0);
        CHECK(lb.rer >= 0.0);
        CHECK(lb.vr >= 0.0);
        if (intention == kNonCollaborative) {
            CHECK(lb.c == 0.0);
            CHECK(lb.r == 0.0);
            CHECK(lb.b == 0.0);
        } else {
            CHECK(close(lb.c, 0.05 * lb.r + 0.95 * lb.b));
        }
    }
}

TEST_CASE("perfect collaborative prediction zeroes every term") {
    std::mt19937_64 g(8);
    Matrix gt = random_matrix(g, 10, 27);
    const Eigen::RowVector3d ree(0.6, 0.0, 1.05);
    gt.row(9).segment(kHandCol, 3) = ree;
    const LossBreakdown lb = loss_h(gt, gt, ree, kCollaborative);
    CHECK(lb.re == 0.0);
    CHECK(lb.v == 0.0);
    CHECK(lb.c == 0.0);
    CHECK(lb.rer == 0.0);
    CHECK(lb.vr == 0.0);
    CHECK(lb.total == 0.0);
}

TEST_CASE("batch average is the arithmetic mean of each term") {
    std::mt19937_64 g(9);
    const Eigen::RowVector3d ree(0.6, 0.0, 1.05);
    std::vector<LossBreakdown> parts;
    double sum_re = 0.0, sum_total = 0.0, sum_c = 0.0;
    for (int i = 0; i < 4; ++i) {
        const Matrix p = random_matrix(g, 10, 27);
        const Matrix gt = random_matrix(g, 10, 27);
        parts.push_back(loss_h(p, gt, ree, i % 2));
        sum_re += parts.back().re;
        sum_c += parts.back().c;
        sum_total += parts.back().total;
    }
    const LossBreakdown avg = average_breakdown(parts);
    CHECK(avg.re == sum_re / 4.0);
    CHECK(avg.c == sum_c / 4.0);
    CHECK(close(avg.total, avg.re + avg.v + avg.c + avg.rer + avg.vr));
    CHECK(close(avg.total, sum_total / 4.0, 1e-9));
    CHECK_THROWS_AS(average_breakdown({}), ContractError);
}

TEST_CASE("gating removes the collaborative term from the graph entirely") {
    std::mt19937_64 g(10);
    const Matrix p0 = random_matrix(g, 10, 27);
    const Matrix gt = random_matrix(g, 10, 27);
    const Eigen::RowVector3d ree(0.6, 0.0, 1.05);

    // non-collaborative graph
    Tape t1;
    TapeBackend b1(t1);
    const int pred1 = t1.parameter(p0);
    const auto L1 = handover_loss_graph(b1, pred1, gt, ree, kNonCollaborative, kHand);
    CHECK_FALSE(L1.has_c);
    t1.backward(L1.total);
    const Matrix g_gated = t1.adjoint(pred1);

    // explicit partial-objective graph: re + v + rer + vr only
    Tape t2;
    const int pred2 = t2.parameter(p0);
    const int gtc = t2.constant(gt);
    const int re = t2.sum_squares(t2.sub(pred2, gtc));
    const int v = t2.sum_squares(t2.sub(t2.diff_rows(pred2), t2.diff_rows(gtc)));
    const int ph = t2.col_slice(pred2, kHandCol, 3);
    const int gh = t2.col_slice(gtc, kHandCol, 3);
    const int rer = t2.sum_squares(t2.sub(ph, gh));
    const int vr = t2.sum_squares(t2.sub(t2.diff_rows(ph), t2.diff_rows(gh)));
    const int total = t2.add(t2.add(re, v), t2.add(rer, vr));
    t2.backward(total);
    CHECK(t2.adjoint(pred2) == g_gated);

    // the collaborative graph differs, so the gate is load-bearing
    Tape t3;
    TapeBackend b3(t3);
    const int pred3 = t3.parameter(p0);
    const auto L3 = handover_loss_graph(b3, pred3, gt, ree, kCollaborative, kHand);
    CHECK(L3.has_c);
    t3.backward(L3.total);
    CHECK(t3.adjoint(pred3) != g_gated);
}

TEST_CASE("gated-batch gradient matches finite differences") {
    std::mt19937_64 g(11);
    const Eigen::RowVector3d ree(0.6, 0.0, 1.05);
    std::vector<Matrix> gts;
    std::vector<int> labels = {0, 1, 0, 1};
    for (int i = 0; i < 4; ++i) gts.push_back(random_matrix(g, 10, 27));
    const Matrix p0 = random_matrix(g, 10, 27);

    const ScalarFn f = [&](const Vector& x) {
        Matrix p(10, 27);
        Eigen::Map<Vector>(p.data(), p.size()) = x;
        double acc = 0.0;
        for (int i = 0; i < 4; ++i) {
            acc += loss_h(p, gts[i], ree, labels[i]).total;
        }
        return acc / 4.0;
    };

    Vector analytic = Vector::Zero(p0.size());
    for (int i = 0; i < 4; ++i) {
        Tape t;
        TapeBackend b(t);
        const int pred = t.parameter(p0);
        const auto L = handover_loss_graph(b, pred, gts[i], ree, labels[i], kHand);
        t.backward(L.total);
        const Matrix a = t.adjoint(pred);
        analytic += Eigen::Map<const Vector>(a.data(), a.size()) / 4.0;
    }

    Vector flat(p0.size());
    Eigen::Map<Matrix>(flat.data(), 10, 27) = p0;
    std::vector<Index> probe;
    for (Index i = 0; i < p0.size(); i += 23) probe.push_back(i);
    const FdReport rep = finite_difference_check(f, flat, analytic, 1e-6, probe);
    CHECK(rep.max_rel_error < 1e-7);
}

TEST_CASE("graph and plain values agree for both labels") {
    std::mt19937_64 g(12);
    const Matrix p = random_matrix(g, 10, 27);
    const Matrix gt = random_matrix(g, 10, 27);
    const Eigen::RowVector3d ree(0.6, 0.0, 1.05);
    for (int intention : {kCollaborative, kNonCollaborative}) {
        EvalBackend eb;
        const auto L = handover_loss_graph(eb, Matrix(p), gt, ree, intention, kHand);
        const LossBreakdown graph = read_breakdown(eb, L);
        const LossBreakdown plain = loss_h(p, gt, ree, intention);
        CHECK(graph.total == plain.total);
        CHECK(graph.re == plain.re);
        CHECK(graph.v == plain.v);
        CHECK(graph.c == plain.c);
        CHECK(graph.rer == plain.rer);
        CHECK(graph.vr == plain.vr);
    }
}

TEST_CASE("coincident joints keep the distance gradient finite") {
    std::mt19937_64 g(13);
    Matrix p = random_matrix(g, 10, 27);
    // right hand exactly on top of the right elbow in one frame
    p.row(4).segment(kHandCol, 3) = p.row(4).segment(21, 3);
    const Matrix gt = random_matrix(g, 10, 27);
    Tape t;
    TapeBackend b(t);
    const int pred = t.parameter(p);
    const Eigen::RowVector3d ree(0.6, 0.0, 1.05);
    const auto L = handover_loss_graph(b, pred, gt, ree, kCollaborative, kHand);
    t.backward(L.total);
    CHECK(t.adjoint(pred).allFinite());
}

TEST_CASE("mismatched shapes are rejected") {
    const Matrix p = Matrix::Zero(10, 27);
    const Matrix gt = Matrix::Zero(9, 27);
    CHECK_THROWS_AS(loss_re(p, gt), DimensionError);
    CHECK_THROWS_AS(loss_v(p, gt), DimensionError);
    CHECK_THROWS_AS(loss_b(p, Matrix::Zero(10, 24)), DimensionError);
    const Eigen::RowVector3d ree(0.6, 0.0, 1.05);
    CHECK_THROWS_AS(loss_h(p, gt, ree, 0), DimensionError);
    CHECK_THROWS_AS(loss_h(p, Matrix::Zero(10, 27), ree, 2), ContractError);
}
