#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hmp/backend.hpp"
#include "hmp/checkpoint.hpp"
#include "hmp/dataset.hpp"
#include "hmp/linalg.hpp"

namespace hmp {

// Motion predictor: DCT along time, channel FC, additive intention
// embedding, a stack of temporal FC + layer-norm blocks, channel FC, IDCT,
// and a residual connection from the last observed frame. The network maps
// the full T-row window; the last N rows are the prediction.
struct PredictorConfig {
    Index input_frames = kInputFrames;
    Index output_frames = kTargetFrames;
    Index channels = kChannels;
    Index blocks = 48;
    Index intention_classes = 2;
    double ln_eps = 1e-6;

    void validate() const;
    std::vector<std::pair<std::string, int64_t>> config_entries() const;
};

struct PredictorWeights {
    PredictorConfig config;
    ParamStore params;
};

// Registers all predictor tensors on an empty store, in the canonical order
// the graph binder and the checkpoint format rely on.
void register_predictor_params(ParamStore& store, const PredictorConfig& cfg);

// Xavier-uniform FC weights, zero biases, unit/zero layer-norm affine, and a
// small-uniform embedding table; deterministic per seed. Tensors are filled
// in registration order, keyed by name suffix; the classifier reuses it.
void fill_initial_values(ParamStore& store, uint64_t seed);

PredictorWeights init_predictor(const PredictorConfig& cfg, uint64_t seed);

Matrix predictor_forward(const PredictorWeights& w, const Matrix& x, int intention);

Index count_parameters(const PredictorWeights& w);

// Per-component decomposition of the scalar parameter count.
struct ParamAudit {
    struct Row {
        std::string component;
        Index tensors = 0;
        Index parameters = 0;
    };
    std::vector<Row> rows;
    Index total = 0;

    std::string table() const;
};

ParamAudit audit_parameters(const ParamStore& store);

void save_predictor(const PredictorWeights& w, const std::string& path);
PredictorWeights load_predictor(const std::string& path);
// Also verifies the stored config; mismatches raise CheckpointError naming
// the field.
PredictorWeights load_predictor(const std::string& path,
                                const PredictorConfig& expected);

// ---- graph construction, shared with the classifier ----

template <class B>
struct BackboneHandles {
    bool has_embedding = false;
    typename B::Handle embed{};
    typename B::Handle fc_in_w{}, fc_in_b{};
    struct Block {
        typename B::Handle w{}, bias{}, gamma{}, beta{};
    };
    std::vector<Block> blocks;
    typename B::Handle fc_out_w{}, fc_out_b{};
};

// Binds tensors starting at *cursor in registration order; advances the
// cursor past the backbone so callers can bind trailing tensors (the
// classifier head).
template <class B>
BackboneHandles<B> bind_backbone(B& b, const ParamStore& store, Index blocks,
                                 bool with_embedding, Index* cursor) {
    BackboneHandles<B> h;
    Index i = cursor ? *cursor : 0;
    h.has_embedding = with_embedding;
    if (with_embedding) h.embed = b.parameter(store, i++);
    h.fc_in_w = b.parameter(store, i++);
    h.fc_in_b = b.parameter(store, i++);
    h.blocks.reserve(blocks);
    for (Index k = 0; k < blocks; ++k) {
        typename BackboneHandles<B>::Block blk;
        blk.w = b.parameter(store, i++);
        blk.bias = b.parameter(store, i++);
        blk.gamma = b.parameter(store, i++);
        blk.beta = b.parameter(store, i++);
        h.blocks.push_back(blk);
    }
    h.fc_out_w = b.parameter(store, i++);
    h.fc_out_b = b.parameter(store, i++);
    if (cursor) *cursor = i;
    return h;
}

template <class B>
struct BackboneOut {
    typename B::Handle features{};  // T x C map after the block stack
    typename B::Handle motion{};    // N x C decoded prediction
};

// `x` must be a handle to the T x C input window. `intention` is ignored
// when the backbone has no embedding.
template <class B>
BackboneOut<B> run_backbone(B& b, const BackboneHandles<B>& h,
                            const PredictorConfig& cfg, const DctBasis& basis,
                            typename B::Handle x, int intention) {
    auto freq = b.matmul(b.constant(basis.forward), x);
    auto u = b.add_row(b.matmul(freq, h.fc_in_w), h.fc_in_b);
    if (h.has_embedding) {
        u = b.add(b.embed_row(h.embed, intention, cfg.input_frames), u);
    }
    for (const auto& blk : h.blocks) {
        auto tfc = b.transpose(b.matmul(b.transpose(u), blk.w));
        u = b.layer_norm(b.add_col(tfc, blk.bias), blk.gamma, blk.beta, cfg.ln_eps);
    }
    auto out = b.add_row(b.matmul(u, h.fc_out_w), h.fc_out_b);
    auto time = b.matmul(b.constant(basis.inverse), out);
    auto res = b.add_row(time, b.row_slice(x, cfg.input_frames - 1, 1));
    auto motion =
        b.row_slice(res, cfg.input_frames - cfg.output_frames, cfg.output_frames);
    return {u, motion};
}

}  // namespace hmp
