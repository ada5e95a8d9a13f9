#include "hmp/classifier.hpp"

#include <cstdio>

namespace hmp {

void ClassifierConfig::validate() const {
    backbone().validate();
    if (classes < 2) throw ConfigError("classifier config: need at least 2 classes");
    if (head_hidden < 1) {
        throw ConfigError("classifier config: head_hidden must be positive");
    }
}

PredictorConfig ClassifierConfig::backbone() const {
    PredictorConfig cfg;
    cfg.input_frames = input_frames;
    cfg.output_frames = output_frames;
    cfg.channels = channels;
    cfg.blocks = blocks;
    cfg.intention_classes = classes;
    cfg.ln_eps = ln_eps;
    return cfg;
}

std::vector<std::pair<std::string, int64_t>> ClassifierConfig::config_entries() const {
    return {{"input_frames", input_frames},
            {"output_frames", output_frames},
            {"channels", channels},
            {"blocks", blocks},
            {"classes", classes},
            {"head_hidden", head_hidden},
            {"pooling", pooling == Pooling::kAverage ? 0 : 1}};
}

Index default_head_hidden(Pooling pooling) {
    return pooling == Pooling::kAverage ? 4618 : 102;
}

void register_classifier_params(ParamStore& store, const ClassifierConfig& cfg) {
    cfg.validate();
    store.add("fc_in.w", cfg.channels, cfg.channels);
    store.add("fc_in.b", 1, cfg.channels);
    char name[32];
    for (Index k = 0; k < cfg.blocks; ++k) {
        std::snprintf(name, sizeof(name), "block%02lld.w", static_cast<long long>(k));
        store.add(name, cfg.input_frames, cfg.input_frames);
        std::snprintf(name, sizeof(name), "block%02lld.bias", static_cast<long long>(k));
        store.add(name, cfg.input_frames, 1);
        std::snprintf(name, sizeof(name), "block%02lld.gamma", static_cast<long long>(k));
        store.add(name, 1, cfg.channels);
        std::snprintf(name, sizeof(name), "block%02lld.beta", static_cast<long long>(k));
        store.add(name, 1, cfg.channels);
    }
    store.add("fc_out.w", cfg.channels, cfg.channels);
    store.add("fc_out.b", 1, cfg.channels);
    store.add("head_fc1.w", cfg.pooled_width(), cfg.head_hidden);
    store.add("head_fc1.b", 1, cfg.head_hidden);
    store.add("head_fc2.w", cfg.head_hidden, cfg.classes);
    store.add("head_fc2.b", 1, cfg.classes);
}

ClassifierWeights init_classifier(const ClassifierConfig& cfg, uint64_t seed) {
    ClassifierWeights w;
    w.config = cfg;
    register_classifier_params(w.params, cfg);
    fill_initial_values(w.params, seed);
    return w;
}

ClassifierOutput classify_forward(const ClassifierWeights& w, const Matrix& x) {
    if (x.rows() != w.config.input_frames || x.cols() != w.config.channels) {
        throw DimensionError(
            "classify_forward: input must be " + std::to_string(w.config.input_frames) +
            "x" + std::to_string(w.config.channels) + ", got " +
            std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    }
    if (!x.allFinite()) {
        throw EvaluationError("classify_forward: input contains non-finite values");
    }
    const DctBasis basis = dct_basis(w.config.input_frames);
    EvalBackend b;
    const auto handles = bind_classifier(b, w.params, w.config);
    auto out = run_classifier(b, handles, w.config, basis, b.constant(x));
    return {out.logits, out.motion};
}

int predict_intention(const Matrix& logits) {
    if (logits.rows() != 1 || logits.cols() < 2) {
        throw DimensionError("predict_intention: logits must be a row of >= 2 scores");
    }
    int best = 0;
    for (Index j = 1; j < logits.cols(); ++j) {
        if (logits(0, j) > logits(0, best)) best = static_cast<int>(j);
    }
    return best;
}

double cross_entropy(const Matrix& logits, int label) {
    return ops::softmax_cross_entropy(logits, label)(0, 0);
}

ClassLossBreakdown loss_class(const Matrix& logits, const Matrix& motion_pred,
                              const Matrix& gt_motion, int label) {
    EvalBackend bk;
    const auto L =
        class_loss_graph(bk, Matrix(logits), Matrix(motion_pred), gt_motion, label);
    return read_class_breakdown(bk, L);
}

int vote_mode(const std::vector<int>& labels) {
    if (labels.size() != 3) {
        throw ContractError("vote_mode: expected exactly 3 labels, got " +
                            std::to_string(labels.size()));
    }
    int counts[2] = {0, 0};
    for (int l : labels) {
        if (l != kCollaborative && l != kNonCollaborative) {
            throw ContractError("vote_mode: label must be 0 or 1");
        }
        counts[l] += 1;
    }
    return counts[1] > counts[0] ? 1 : 0;
}

Index count_parameters(const ClassifierWeights& w) { return w.params.size(); }

void save_classifier(const ClassifierWeights& w, const std::string& path) {
    write_checkpoint(path, "classifier", w.config.config_entries(), w.params);
}

namespace {

ClassifierConfig config_from_checkpoint(const Checkpoint& ck) {
    ClassifierConfig cfg;
    cfg.input_frames = checkpoint_config_value(ck, "input_frames");
    cfg.output_frames = checkpoint_config_value(ck, "output_frames");
    cfg.channels = checkpoint_config_value(ck, "channels");
    cfg.blocks = checkpoint_config_value(ck, "blocks");
    cfg.classes = checkpoint_config_value(ck, "classes");
    cfg.head_hidden = checkpoint_config_value(ck, "head_hidden");
    cfg.pooling = checkpoint_config_value(ck, "pooling") == 0 ? Pooling::kAverage
                                                              : Pooling::kFlatten;
    return cfg;
}

}  // namespace

ClassifierWeights load_classifier(const std::string& path) {
    Checkpoint ck = read_checkpoint(path);
    if (ck.kind != "classifier") {
        throw CheckpointError("checkpoint kind is '" + ck.kind +
                              "', expected 'classifier'");
    }
    ClassifierWeights w;
    w.config = config_from_checkpoint(ck);
    w.config.validate();
    ParamStore expected;
    register_classifier_params(expected, w.config);
    if (expected.tensor_count() != ck.params.tensor_count()) {
        throw CheckpointError("checkpoint holds " +
                              std::to_string(ck.params.tensor_count()) +
                              " tensors, expected " +
                              std::to_string(expected.tensor_count()));
    }
    for (Index i = 0; i < expected.tensor_count(); ++i) {
        const auto& e = expected.info(i);
        const auto& a = ck.params.info(i);
        if (e.name != a.name || e.rows != a.rows || e.cols != a.cols) {
            throw CheckpointError("checkpoint tensor " + std::to_string(i) + " is '" +
                                  a.name + "' " + std::to_string(a.rows) + "x" +
                                  std::to_string(a.cols) + ", expected '" + e.name +
                                  "' " + std::to_string(e.rows) + "x" +
                                  std::to_string(e.cols));
        }
    }
    w.params = std::move(ck.params);
    return w;
}

ClassifierWeights load_classifier(const std::string& path,
                                  const ClassifierConfig& expected) {
    ClassifierWeights w = load_classifier(path);
    const auto have = w.config.config_entries();
    const auto want = expected.config_entries();
    for (size_t i = 0; i < want.size(); ++i) {
        if (have[i].second != want[i].second) {
            throw CheckpointError("checkpoint " + want[i].first + " is " +
                                  std::to_string(have[i].second) + ", expected " +
                                  std::to_string(want[i].second));
        }
    }
    return w;
}

}  // namespace hmp
