#include "hmp/predictor.hpp"

#include <cmath>
#include <cstdio>

#include "hmp/rng.hpp"

namespace hmp {

void PredictorConfig::validate() const {
    if (input_frames < 1 || output_frames < 1 || channels < 1 || blocks < 1 ||
        intention_classes < 1) {
        throw ConfigError("predictor config: all dimensions must be positive");
    }
    if (output_frames > input_frames) {
        throw ConfigError("predictor config: output_frames exceeds input_frames");
    }
    if (channels % 3 != 0) {
        throw ConfigError("predictor config: channels must be 3 x joint count");
    }
    if (ln_eps <= 0.0) {
        throw ConfigError("predictor config: ln_eps must be positive");
    }
}

std::vector<std::pair<std::string, int64_t>> PredictorConfig::config_entries() const {
    return {{"input_frames", input_frames},
            {"output_frames", output_frames},
            {"channels", channels},
            {"blocks", blocks},
            {"intention_classes", intention_classes}};
}

void register_predictor_params(ParamStore& store, const PredictorConfig& cfg) {
    cfg.validate();
    store.add("embed", cfg.intention_classes, cfg.channels);
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
}

namespace {

bool ends_with(const std::string& s, const char* suffix) {
    const size_t n = std::string(suffix).size();
    return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

}  // namespace

void fill_initial_values(ParamStore& store, uint64_t seed) {
    std::mt19937_64 g(mix64(seed ^ 0x1b873593a4093822ULL));
    for (Index i = 0; i < store.tensor_count(); ++i) {
        const auto& info = store.info(i);
        auto view = store.view(i);
        if (info.name == "embed") {
            for (Index r = 0; r < view.rows(); ++r) {
                for (Index c = 0; c < view.cols(); ++c) {
                    view(r, c) = uniform(g, -0.02, 0.02);
                }
            }
        } else if (ends_with(info.name, ".w")) {
            const double limit =
                std::sqrt(6.0 / static_cast<double>(view.rows() + view.cols()));
            for (Index r = 0; r < view.rows(); ++r) {
                for (Index c = 0; c < view.cols(); ++c) {
                    view(r, c) = uniform(g, -limit, limit);
                }
            }
        } else if (ends_with(info.name, ".gamma")) {
            view.setOnes();
        } else {
            view.setZero();  // biases and layer-norm shifts
        }
    }
}

PredictorWeights init_predictor(const PredictorConfig& cfg, uint64_t seed) {
    PredictorWeights w;
    w.config = cfg;
    register_predictor_params(w.params, cfg);
    fill_initial_values(w.params, seed);
    return w;
}

Matrix predictor_forward(const PredictorWeights& w, const Matrix& x, int intention) {
    if (x.rows() != w.config.input_frames || x.cols() != w.config.channels) {
        throw DimensionError(
            "predictor_forward: input must be " + std::to_string(w.config.input_frames) +
            "x" + std::to_string(w.config.channels) + ", got " +
            std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    }
    if (!x.allFinite()) {
        throw EvaluationError("predictor_forward: input contains non-finite values");
    }
    if (intention < 0 || intention >= w.config.intention_classes) {
        throw ContractError("predictor_forward: intention label " +
                            std::to_string(intention) + " outside 0.." +
                            std::to_string(w.config.intention_classes - 1));
    }
    const DctBasis basis = dct_basis(w.config.input_frames);
    EvalBackend b;
    Index cursor = 0;
    const auto handles =
        bind_backbone(b, w.params, w.config.blocks, /*with_embedding=*/true, &cursor);
    auto out = run_backbone(b, handles, w.config, basis, b.constant(x), intention);
    return out.motion;
}

Index count_parameters(const PredictorWeights& w) { return w.params.size(); }

namespace {

const char* component_of(const std::string& name) {
    if (name == "embed") return "intention embedding";
    if (name.rfind("fc_in.", 0) == 0) return "input channel FC";
    if (name.rfind("block", 0) == 0) {
        return ends_with(name, ".gamma") || ends_with(name, ".beta")
                   ? "block layer norms"
                   : "block temporal FCs";
    }
    if (name.rfind("fc_out.", 0) == 0) return "output channel FC";
    if (name.rfind("head_", 0) == 0) return "classifier head";
    return "other";
}

}  // namespace

ParamAudit audit_parameters(const ParamStore& store) {
    ParamAudit audit;
    for (Index i = 0; i < store.tensor_count(); ++i) {
        const auto& info = store.info(i);
        const std::string component = component_of(info.name);
        ParamAudit::Row* row = nullptr;
        for (auto& r : audit.rows) {
            if (r.component == component) {
                row = &r;
                break;
            }
        }
        if (!row) {
            audit.rows.push_back({component, 0, 0});
            row = &audit.rows.back();
        }
        row->tensors += 1;
        row->parameters += info.rows * info.cols;
        audit.total += info.rows * info.cols;
    }
    return audit;
}

std::string ParamAudit::table() const {
    std::string out;
    char line[96];
    std::snprintf(line, sizeof(line), "%-24s %8s %12s\n", "component", "tensors",
                  "parameters");
    out += line;
    for (const Row& r : rows) {
        std::snprintf(line, sizeof(line), "%-24s %8lld %12lld\n", r.component.c_str(),
                      static_cast<long long>(r.tensors),
                      static_cast<long long>(r.parameters));
        out += line;
    }
    std::snprintf(line, sizeof(line), "%-24s %8s %12lld\n", "total", "",
                  static_cast<long long>(total));
    out += line;
    return out;
}

void save_predictor(const PredictorWeights& w, const std::string& path) {
    write_checkpoint(path, "predictor", w.config.config_entries(), w.params);
}

namespace {

PredictorConfig config_from_checkpoint(const Checkpoint& ck) {
    PredictorConfig cfg;
    cfg.input_frames = checkpoint_config_value(ck, "input_frames");
    cfg.output_frames = checkpoint_config_value(ck, "output_frames");
    cfg.channels = checkpoint_config_value(ck, "channels");
    cfg.blocks = checkpoint_config_value(ck, "blocks");
    cfg.intention_classes = checkpoint_config_value(ck, "intention_classes");
    return cfg;
}

// The stored tensor list must match the registration the config implies,
// name for name and shape for shape.
void verify_tensor_layout(const ParamStore& expected, const ParamStore& actual) {
    if (expected.tensor_count() != actual.tensor_count()) {
        throw CheckpointError("checkpoint holds " +
                              std::to_string(actual.tensor_count()) +
                              " tensors, expected " +
                              std::to_string(expected.tensor_count()));
    }
    for (Index i = 0; i < expected.tensor_count(); ++i) {
        const auto& e = expected.info(i);
        const auto& a = actual.info(i);
        if (e.name != a.name || e.rows != a.rows || e.cols != a.cols) {
            throw CheckpointError("checkpoint tensor " + std::to_string(i) + " is '" +
                                  a.name + "' " + std::to_string(a.rows) + "x" +
                                  std::to_string(a.cols) + ", expected '" + e.name +
                                  "' " + std::to_string(e.rows) + "x" +
                                  std::to_string(e.cols));
        }
    }
}

}  // namespace

PredictorWeights load_predictor(const std::string& path) {
    Checkpoint ck = read_checkpoint(path);
    if (ck.kind != "predictor") {
        throw CheckpointError("checkpoint kind is '" + ck.kind +
                              "', expected 'predictor'");
    }
    PredictorWeights w;
    w.config = config_from_checkpoint(ck);
    w.config.validate();
    ParamStore expected;
    register_predictor_params(expected, w.config);
    verify_tensor_layout(expected, ck.params);
    w.params = std::move(ck.params);
    return w;
}

PredictorWeights load_predictor(const std::string& path,
                                const PredictorConfig& expected) {
    PredictorWeights w = load_predictor(path);
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
