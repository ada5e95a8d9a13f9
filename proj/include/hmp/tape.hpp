#pragma once

#include <utility>
#include <vector>

#include "hmp/linalg.hpp"

namespace hmp {

// Reverse-mode tape over dense matrix values. Every operation the networks
// use is a primitive here; recording stores the op kind, its input node ids
// and its computed value, so the tape can be replayed forward and swept
// backward without any captured state. One tape is built per sample and
// discarded after the gradient is read; tapes are single-owner and not
// thread-safe, parallel callers use one tape each.
class Tape {
public:
    enum class Op {
        Constant,
        Parameter,
        MatMul,
        Add,
        Sub,
        Scale,
        AddRow,
        AddCol,
        Transpose,
        LayerNorm,
        EmbedRow,
        MeanRows,
        FlattenRows,
        RowSlice,
        ColSlice,
        DiffRows,
        Relu,
        SumSquares,
        SoftmaxCrossEntropy,
        HandDistanceMean,
    };

    struct Node {
        Op op;
        int a = -1, b = -1, c = -1;  // input node ids
        Index i0 = 0, i1 = 0;        // integer attributes
        double s0 = 0.0;             // scalar attribute (scale factor or epsilon)
        Matrix value;
        Matrix adjoint;              // empty until touched by backward
    };

    int constant(Matrix v);
    int parameter(Matrix v);

    int matmul(int a, int b);
    int add(int a, int b);
    int sub(int a, int b);
    int scale(int a, double s);
    int add_row(int a, int row);
    int add_col(int a, int col);
    int transpose(int a);
    int layer_norm(int x, int gamma, int beta, double eps);
    int embed_row(int table, Index which, Index copies);
    int mean_rows(int x);
    int flatten_rows(int x);
    int row_slice(int x, Index first, Index count);
    int col_slice(int x, Index first, Index count);
    int diff_rows(int x);
    int relu(int x);
    int sum_squares(int x);
    int softmax_cross_entropy(int logits, Index target);
    int hand_distance_mean(int x, Index hand);

    // Reverse accumulation from a scalar (1x1) output node. Clears any
    // adjoints from a previous sweep first.
    void backward(int output);

    const Matrix& value(int id) const { return nodes_[check(id)].value; }

    // Accumulated adjoint; zero matrix if the node was never reached.
    Matrix adjoint(int id) const;

    bool is_parameter(int id) const { return nodes_[check(id)].op == Op::Parameter; }
    int size() const { return static_cast<int>(nodes_.size()); }
    void reset();

    // Recomputes every node from the recorded structure and compares against
    // the stored values bit for bit. Test support.
    bool replay_matches() const;

private:
    int check(int id) const;
    int push(Node n);
    const Matrix& in(int id) const;
    static Matrix eval_op(const Node& n, const Matrix& a, const Matrix& b,
                          const Matrix& c);
    void propagate(Node& n);
    Matrix& adj(int id);

    std::vector<Node> nodes_;
};

// Adjoints of all registered parameters of `tape` with respect to the scalar
// `output` node, in registration order, as (node id, adjoint) pairs.
std::vector<std::pair<int, Matrix>> grad(Tape& tape, int output);

}  // namespace hmp
