#include "hmp/tape.hpp"

#include <cmath>
#include <cstring>

#include "hmp/ops.hpp"

namespace hmp {

namespace {
const Matrix kEmpty;
}

int Tape::check(int id) const {
    if (id < 0 || id >= size()) {
        throw ContractError("tape: node id " + std::to_string(id) + " out of range");
    }
    return id;
}

const Matrix& Tape::in(int id) const {
    return id < 0 ? kEmpty : nodes_[check(id)].value;
}

int Tape::push(Node n) {
    if (n.op != Op::Constant && n.op != Op::Parameter) {
        n.value = eval_op(n, in(n.a), in(n.b), in(n.c));
    }
    nodes_.push_back(std::move(n));
    return size() - 1;
}

int Tape::constant(Matrix v) {
    Node n;
    n.op = Op::Constant;
    n.value = std::move(v);
    return push(std::move(n));
}

int Tape::parameter(Matrix v) {
    Node n;
    n.op = Op::Parameter;
    n.value = std::move(v);
    return push(std::move(n));
}

int Tape::matmul(int a, int b) {
    return push({.op = Op::MatMul, .a = check(a), .b = check(b)});
}

int Tape::add(int a, int b) {
    return push({.op = Op::Add, .a = check(a), .b = check(b)});
}

int Tape::sub(int a, int b) {
    return push({.op = Op::Sub, .a = check(a), .b = check(b)});
}

int Tape::scale(int a, double s) {
    return push({.op = Op::Scale, .a = check(a), .s0 = s});
}

int Tape::add_row(int a, int row) {
    return push({.op = Op::AddRow, .a = check(a), .b = check(row)});
}

int Tape::add_col(int a, int col) {
    return push({.op = Op::AddCol, .a = check(a), .b = check(col)});
}

int Tape::transpose(int a) { return push({.op = Op::Transpose, .a = check(a)}); }

int Tape::layer_norm(int x, int gamma, int beta, double eps) {
    return push(
        {.op = Op::LayerNorm, .a = check(x), .b = check(gamma), .c = check(beta), .s0 = eps});
}

int Tape::embed_row(int table, Index which, Index copies) {
    return push({.op = Op::EmbedRow, .a = check(table), .i0 = which, .i1 = copies});
}

int Tape::mean_rows(int x) { return push({.op = Op::MeanRows, .a = check(x)}); }

int Tape::flatten_rows(int x) { return push({.op = Op::FlattenRows, .a = check(x)}); }

int Tape::row_slice(int x, Index first, Index count) {
    return push({.op = Op::RowSlice, .a = check(x), .i0 = first, .i1 = count});
}

int Tape::col_slice(int x, Index first, Index count) {
    return push({.op = Op::ColSlice, .a = check(x), .i0 = first, .i1 = count});
}

int Tape::diff_rows(int x) { return push({.op = Op::DiffRows, .a = check(x)}); }

int Tape::relu(int x) { return push({.op = Op::Relu, .a = check(x)}); }

int Tape::sum_squares(int x) { return push({.op = Op::SumSquares, .a = check(x)}); }

int Tape::softmax_cross_entropy(int logits, Index target) {
    return push({.op = Op::SoftmaxCrossEntropy, .a = check(logits), .i0 = target});
}

int Tape::hand_distance_mean(int x, Index hand) {
    return push({.op = Op::HandDistanceMean, .a = check(x), .i0 = hand});
}

Matrix Tape::eval_op(const Node& n, const Matrix& a, const Matrix& b, const Matrix& c) {
    switch (n.op) {
        case Op::Constant:
        case Op::Parameter:
            return n.value;
        case Op::MatMul:
            return ops::matmul(a, b);
        case Op::Add:
            return ops::add(a, b);
        case Op::Sub:
            return ops::sub(a, b);
        case Op::Scale:
            return ops::scale(a, n.s0);
        case Op::AddRow:
            return ops::add_row(a, b);
        case Op::AddCol:
            return ops::add_col(a, b);
        case Op::Transpose:
            return ops::transpose(a);
        case Op::LayerNorm:
            return ops::layer_norm(a, b, c, n.s0);
        case Op::EmbedRow:
            return ops::embed_row(a, n.i0, n.i1);
        case Op::MeanRows:
            return ops::mean_rows(a);
        case Op::FlattenRows:
            return ops::flatten_rows(a);
        case Op::RowSlice:
            return ops::row_slice(a, n.i0, n.i1);
        case Op::ColSlice:
            return ops::col_slice(a, n.i0, n.i1);
        case Op::DiffRows:
            return ops::diff_rows(a);
        case Op::Relu:
            return ops::relu(a);
        case Op::SumSquares:
            return ops::sum_squares(a);
        case Op::SoftmaxCrossEntropy:
            return ops::softmax_cross_entropy(a, n.i0);
        case Op::HandDistanceMean:
            return ops::hand_distance_mean(a, n.i0);
    }
    throw ContractError("tape: unknown op");
}

Matrix& Tape::adj(int id) {
    Node& n = nodes_[id];
    if (n.adjoint.size() == 0) {
        n.adjoint.setZero(n.value.rows(), n.value.cols());
    }
    return n.adjoint;
}

Matrix Tape::adjoint(int id) const {
    const Node& n = nodes_[check(id)];
    if (n.adjoint.size() == 0) {
        return Matrix::Zero(n.value.rows(), n.value.cols());
    }
    return n.adjoint;
}

void Tape::backward(int output) {
    const Node& out = nodes_[check(output)];
    if (out.value.rows() != 1 || out.value.cols() != 1) {
        throw ContractError("backward: output node must be scalar (1x1), got " +
                            std::to_string(out.value.rows()) + "x" +
                            std::to_string(out.value.cols()));
    }
    for (Node& n : nodes_) {
        n.adjoint.resize(0, 0);
    }
    adj(output)(0, 0) = 1.0;
    for (int id = output; id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.adjoint.size() == 0) continue;  // not an ancestor of the output
        propagate(n);
    }
}

void Tape::propagate(Node& n) {
    const Matrix& g = n.adjoint;
    switch (n.op) {
        case Op::Constant:
        case Op::Parameter:
            return;
        case Op::MatMul:
            adj(n.a).noalias() += g * in(n.b).transpose();
            adj(n.b).noalias() += in(n.a).transpose() * g;
            return;
        case Op::Add:
            adj(n.a) += g;
            adj(n.b) += g;
            return;
        case Op::Sub:
            adj(n.a) += g;
            adj(n.b) -= g;
            return;
        case Op::Scale:
            adj(n.a) += n.s0 * g;
            return;
        case Op::AddRow:
            adj(n.a) += g;
            adj(n.b) += g.colwise().sum();
            return;
        case Op::AddCol:
            adj(n.a) += g;
            adj(n.b) += g.rowwise().sum();
            return;
        case Op::Transpose:
            adj(n.a) += g.transpose();
            return;
        case Op::LayerNorm: {
            using RowArray = Eigen::Array<double, 1, Eigen::Dynamic>;
            const Matrix& x = in(n.a);
            const Matrix& gamma = in(n.b);
            const double c = static_cast<double>(x.cols());
            Matrix& gx = adj(n.a);
            Matrix& ggamma = adj(n.b);
            Matrix& gbeta = adj(n.c);
            for (Index r = 0; r < x.rows(); ++r) {
                const double mean = x.row(r).mean();
                const double var = (x.row(r).array() - mean).square().sum() / c;
                const double inv = 1.0 / std::sqrt(var + n.s0);
                const RowArray xhat = (x.row(r).array() - mean) * inv;
                const RowArray gy = g.row(r).array();
                ggamma.row(0).array() += gy * xhat;
                gbeta.row(0).array() += gy;
                const RowArray gh = gy * gamma.row(0).array();
                const double gh_mean = gh.mean();
                const double ghx_mean = (gh * xhat).mean();
                gx.row(r).array() += inv * (gh - gh_mean - xhat * ghx_mean);
            }
            return;
        }
        case Op::EmbedRow:
            adj(n.a).row(n.i0) += g.colwise().sum();
            return;
        case Op::MeanRows:
            adj(n.a) += g.replicate(in(n.a).rows(), 1) / static_cast<double>(in(n.a).rows());
            return;
        case Op::FlattenRows: {
            Matrix& gx = adj(n.a);
            const Index cols = gx.cols();
            for (Index r = 0; r < gx.rows(); ++r) {
                gx.row(r) += g.block(0, r * cols, 1, cols);
            }
            return;
        }
        case Op::RowSlice:
            adj(n.a).middleRows(n.i0, n.i1) += g;
            return;
        case Op::ColSlice:
            adj(n.a).middleCols(n.i0, n.i1) += g;
            return;
        case Op::DiffRows: {
            Matrix& gx = adj(n.a);
            gx.bottomRows(g.rows()) += g;
            gx.topRows(g.rows()) -= g;
            return;
        }
        case Op::Relu:
            adj(n.a).array() += g.array() * (in(n.a).array() > 0.0).cast<double>();
            return;
        case Op::SumSquares:
            adj(n.a) += 2.0 * g(0, 0) * in(n.a);
            return;
        case Op::SoftmaxCrossEntropy: {
            const Matrix& logits = in(n.a);
            const double mx = logits.maxCoeff();
            Eigen::ArrayXXd p = (logits.array() - mx).exp();
            p /= p.sum();
            p(0, n.i0) -= 1.0;
            adj(n.a).array() += g(0, 0) * p;
            return;
        }
        case Op::HandDistanceMean: {
            const Matrix& x = in(n.a);
            const Index joints = x.cols() / 3;
            const Index hand = n.i0;
            const double k = static_cast<double>(joints - 1);
            Matrix& gx = adj(n.a);
            for (Index r = 0; r < x.rows(); ++r) {
                const double gr = g(r, 0) / k;
                for (Index j = 0; j < joints; ++j) {
                    if (j == hand) continue;
                    const double dx = x(r, 3 * hand) - x(r, 3 * j);
                    const double dy = x(r, 3 * hand + 1) - x(r, 3 * j + 1);
                    const double dz = x(r, 3 * hand + 2) - x(r, 3 * j + 2);
                    const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
                    if (d == 0.0) continue;  // subgradient 0 at coincident joints
                    const double s = gr / d;
                    gx(r, 3 * hand) += s * dx;
                    gx(r, 3 * hand + 1) += s * dy;
                    gx(r, 3 * hand + 2) += s * dz;
                    gx(r, 3 * j) -= s * dx;
                    gx(r, 3 * j + 1) -= s * dy;
                    gx(r, 3 * j + 2) -= s * dz;
                }
            }
            return;
        }
    }
}

void Tape::reset() { nodes_.clear(); }

bool Tape::replay_matches() const {
    std::vector<Matrix> scratch(nodes_.size());
    for (size_t id = 0; id < nodes_.size(); ++id) {
        const Node& n = nodes_[id];
        const Matrix& a = n.a >= 0 ? scratch[n.a] : kEmpty;
        const Matrix& b = n.b >= 0 ? scratch[n.b] : kEmpty;
        const Matrix& c = n.c >= 0 ? scratch[n.c] : kEmpty;
        scratch[id] = eval_op(n, a, b, c);
        const Matrix& v = nodes_[id].value;
        if (scratch[id].rows() != v.rows() || scratch[id].cols() != v.cols()) {
            return false;
        }
        if (v.size() > 0 &&
            std::memcmp(scratch[id].data(), v.data(), sizeof(double) * v.size()) != 0) {
            return false;
        }
    }
    return true;
}

std::vector<std::pair<int, Matrix>> grad(Tape& tape, int output) {
    tape.backward(output);
    std::vector<std::pair<int, Matrix>> out;
    for (int id = 0; id < tape.size(); ++id) {
        if (tape.is_parameter(id)) {
            out.emplace_back(id, tape.adjoint(id));
        }
    }
    return out;
}

}  // namespace hmp
