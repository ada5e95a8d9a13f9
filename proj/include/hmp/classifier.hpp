#pragma once

#include <string>
#include <vector>

#include "hmp/predictor.hpp"

namespace hmp {

enum class Pooling { kAverage, kFlatten };

// Intention classifier: the predictor backbone without the embedding table,
// a temporal pooling of the post-block feature map, and a two-layer ReLU
// head over the pooled features. The motion-decoding path is kept so the
// reconstruction and velocity terms of the classifier objective are defined.
struct ClassifierConfig {
    Index input_frames = kInputFrames;
    Index output_frames = kTargetFrames;
    Index channels = kChannels;
    Index blocks = 48;
    Index classes = 2;
    Index head_hidden = 4618;
    Pooling pooling = Pooling::kAverage;
    double ln_eps = 1e-6;

    void validate() const;
    std::vector<std::pair<std::string, int64_t>> config_entries() const;
    PredictorConfig backbone() const;
    Index pooled_width() const {
        return pooling == Pooling::kAverage ? channels : input_frames * channels;
    }
};

// Head width that brings the total parameter count closest to the audit
// target for each pooling mode.
Index default_head_hidden(Pooling pooling);

struct ClassifierWeights {
    ClassifierConfig config;
    ParamStore params;
};

void register_classifier_params(ParamStore& store, const ClassifierConfig& cfg);
ClassifierWeights init_classifier(const ClassifierConfig& cfg, uint64_t seed);

struct ClassifierOutput {
    Matrix logits;  // 1 x classes
    Matrix motion;  // N x C decoded prediction
};

ClassifierOutput classify_forward(const ClassifierWeights& w, const Matrix& x);

// argmax with ties resolved toward class 0.
int predict_intention(const Matrix& logits);

// Stabilized negative log softmax probability of the true class.
double cross_entropy(const Matrix& logits, int label);

struct ClassLossBreakdown {
    double re = 0.0;
    double v = 0.0;
    double ce = 0.0;
    double total = 0.0;
};

ClassLossBreakdown loss_class(const Matrix& logits, const Matrix& motion_pred,
                              const Matrix& gt_motion, int label);

// Majority over exactly three per-block labels.
int vote_mode(const std::vector<int>& labels);

Index count_parameters(const ClassifierWeights& w);

void save_classifier(const ClassifierWeights& w, const std::string& path);
ClassifierWeights load_classifier(const std::string& path);
ClassifierWeights load_classifier(const std::string& path,
                                  const ClassifierConfig& expected);

// ---- graph construction ----

template <class B>
struct ClassifierHandles {
    BackboneHandles<B> backbone;
    typename B::Handle fc1_w{}, fc1_b{}, fc2_w{}, fc2_b{};
};

template <class B>
ClassifierHandles<B> bind_classifier(B& b, const ParamStore& store,
                                     const ClassifierConfig& cfg) {
    ClassifierHandles<B> h;
    Index cursor = 0;
    h.backbone =
        bind_backbone(b, store, cfg.blocks, /*with_embedding=*/false, &cursor);
    h.fc1_w = b.parameter(store, cursor++);
    h.fc1_b = b.parameter(store, cursor++);
    h.fc2_w = b.parameter(store, cursor++);
    h.fc2_b = b.parameter(store, cursor++);
    return h;
}

template <class B>
struct ClassifierOut {
    typename B::Handle logits{};
    typename B::Handle motion{};
    typename B::Handle features{};
};

template <class B>
ClassifierOut<B> run_classifier(B& b, const ClassifierHandles<B>& h,
                                const ClassifierConfig& cfg, const DctBasis& basis,
                                typename B::Handle x) {
    auto bb = run_backbone(b, h.backbone, cfg.backbone(), basis, x, 0);
    auto pooled = cfg.pooling == Pooling::kAverage ? b.mean_rows(bb.features)
                                                   : b.flatten_rows(bb.features);
    auto hidden = b.relu(b.add_row(b.matmul(pooled, h.fc1_w), h.fc1_b));
    auto logits = b.add_row(b.matmul(hidden, h.fc2_w), h.fc2_b);
    return {logits, bb.motion, bb.features};
}

template <class B>
struct ClassLossHandles {
    typename B::Handle re{}, v{}, ce{}, total{};
};

template <class B>
ClassLossHandles<B> class_loss_graph(B& bk, typename B::Handle logits,
                                     typename B::Handle motion, const Matrix& gt,
                                     int label) {
    ClassLossHandles<B> L;
    auto gtc = bk.constant(gt);
    L.re = bk.sum_squares(bk.sub(motion, gtc));
    L.v = bk.sum_squares(bk.sub(bk.diff_rows(motion), bk.diff_rows(gtc)));
    L.ce = bk.softmax_cross_entropy(logits, label);
    L.total = bk.add(bk.add(L.re, L.v), L.ce);
    return L;
}

template <class B>
ClassLossBreakdown read_class_breakdown(const B& bk, const ClassLossHandles<B>& L) {
    ClassLossBreakdown out;
    out.re = bk.value(L.re)(0, 0);
    out.v = bk.value(L.v)(0, 0);
    out.ce = bk.value(L.ce)(0, 0);
    out.total = bk.value(L.total)(0, 0);
    return out;
}

}  // namespace hmp
