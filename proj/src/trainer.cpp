#include "hmp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>

#include "hmp/rng.hpp"

namespace hmp {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train config: batch_size must be >= 1");
    if (!(lr_max > lr_min) || !(lr_min > 0.0)) {
        throw ConfigError("train config: need lr_max > lr_min > 0");
    }
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
        throw ConfigError("train config: betas must be in [0, 1)");
    }
    if (epsilon <= 0.0) throw ConfigError("train config: epsilon must be positive");
    if (augment_prob < 0.0 || augment_prob > 1.0) {
        throw ConfigError("train config: augment_prob must be in [0, 1]");
    }
    if (checkpoint_interval < 0) {
        throw ConfigError("train config: checkpoint_interval must be >= 0");
    }
    if (grad_clip_norm < 0.0) {
        throw ConfigError("train config: grad_clip_norm must be >= 0");
    }
    if (stop_epoch < 0 || stop_epoch > epochs) {
        throw ConfigError("train config: stop_epoch must be in [0, epochs]");
    }
}

double cosine_lr(Index epoch, const TrainConfig& cfg) {
    if (epoch < 0 || epoch >= cfg.epochs) {
        throw ContractError("cosine_lr: epoch " + std::to_string(epoch) +
                            " outside 0.." + std::to_string(cfg.epochs - 1));
    }
    // cos(pi) is not exactly -1 in floating point; pin both endpoints.
    if (epoch == 0) return cfg.lr_max;
    if (epoch == cfg.epochs - 1) return cfg.lr_min;
    const double phase = M_PI * static_cast<double>(epoch) /
                         static_cast<double>(cfg.epochs - 1);
    return cfg.lr_min + 0.5 * (cfg.lr_max - cfg.lr_min) * (1.0 + std::cos(phase));
}

void adam_step(ParamStore& params, const Vector& grad, AdamState& state, double lr,
               const TrainConfig& cfg) {
    if (grad.size() != params.size()) {
        throw DimensionError("adam_step: gradient size " + std::to_string(grad.size()) +
                             " != parameter size " + std::to_string(params.size()));
    }
    if (!grad.allFinite()) {
        for (Index i = 0; i < params.tensor_count(); ++i) {
            const auto& info = params.info(i);
            if (!grad.segment(info.offset, info.rows * info.cols).allFinite()) {
                throw EvaluationError("adam_step: non-finite gradient in tensor '" +
                                      info.name + "'");
            }
        }
        throw EvaluationError("adam_step: non-finite gradient");
    }
    if (state.m.size() == 0) {
        state.m.setZero(params.size());
        state.v.setZero(params.size());
    } else if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw DimensionError("adam_step: optimizer state does not match parameters");
    }
    state.t += 1;
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    params.flat().array() -=
        lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + cfg.epsilon);
}

namespace {

char* append_kv(char* p, char* end, const char* key, double v) {
    p += std::snprintf(p, end - p, ",\"%s\":%.17g", key, v);
    return p;
}

}  // namespace

std::string TrainLog::to_jsonl() const {
    std::string out;
    char line[512];
    for (const StepRecord& s : steps) {
        char* p = line;
        char* end = line + sizeof(line);
        p += std::snprintf(p, end - p, "{\"epoch\":%lld,\"step\":%lld,\"lr\":%.17g",
                           static_cast<long long>(s.epoch),
                           static_cast<long long>(s.step), s.lr);
        if (suite == LossSuite::kHandover) {
            p = append_kv(p, end, "re", s.handover.re);
            p = append_kv(p, end, "v", s.handover.v);
            p = append_kv(p, end, "c", s.handover.c);
            p = append_kv(p, end, "r", s.handover.r);
            p = append_kv(p, end, "b", s.handover.b);
            p = append_kv(p, end, "rer", s.handover.rer);
            p = append_kv(p, end, "vr", s.handover.vr);
            p = append_kv(p, end, "total", s.handover.total);
        } else {
            p = append_kv(p, end, "re", s.intention.re);
            p = append_kv(p, end, "v", s.intention.v);
            p = append_kv(p, end, "ce", s.intention.ce);
            p = append_kv(p, end, "total", s.intention.total);
        }
        p = append_kv(p, end, "wall_ms", s.wall_ms);
        std::snprintf(p, end - p, "}\n");
        out += line;
    }
    return out;
}

void TrainLog::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot open training log '" + path + "'");
    out << to_jsonl();
    if (!out) throw ParseError("write failed for training log '" + path + "'");
}

void save_train_state(const TrainState& state, const std::string& path) {
    ParamStore store;
    store.add("adam.m", 1, state.adam.m.size());
    store.add("adam.v", 1, state.adam.v.size());
    store.view(0).row(0) = state.adam.m.transpose();
    store.view(1).row(0) = state.adam.v.transpose();
    write_checkpoint(path, "train-state",
                     {{"next_epoch", state.next_epoch},
                      {"global_step", state.global_step},
                      {"adam_t", state.adam.t}},
                     store);
}

TrainState load_train_state(const std::string& path) {
    Checkpoint ck = read_checkpoint(path);
    if (ck.kind != "train-state") {
        throw CheckpointError("checkpoint kind is '" + ck.kind +
                              "', expected 'train-state'");
    }
    TrainState state;
    state.next_epoch = checkpoint_config_value(ck, "next_epoch");
    state.global_step = checkpoint_config_value(ck, "global_step");
    state.adam.t = checkpoint_config_value(ck, "adam_t");
    state.adam.m = ck.params.view(ck.params.find("adam.m")).row(0).transpose();
    state.adam.v = ck.params.view(ck.params.find("adam.v")).row(0).transpose();
    return state;
}

std::vector<size_t> all_ids(size_t n) {
    std::vector<size_t> ids(n);
    for (size_t i = 0; i < n; ++i) ids[i] = i;
    return ids;
}

namespace {

// Builds one sample's loss graph on the tape; returns the scalar total node
// and fills the step record terms. Parameters must already be bound as the
// first tensor_count nodes, in registration order.
using BuildFn = std::function<int(Tape&, const HandoverSample&, StepRecord&)>;
using SaveFn = std::function<void(const std::string&)>;

TrainLog train_core(ParamStore& params, const std::vector<HandoverSample>& samples,
                    const std::vector<size_t>& ids, const TrainConfig& cfg,
                    LossSuite suite, const BuildFn& build, const SaveFn& save,
                    const std::string& checkpoint_path, TrainState* state) {
    cfg.validate();
    if (ids.empty()) throw ContractError("train: empty training split");
    for (size_t id : ids) {
        if (id >= samples.size()) {
            throw ContractError("train: sample id " + std::to_string(id) +
                                " out of range");
        }
    }

    TrainState local;
    TrainState& st = state ? *state : local;
    if (st.next_epoch > cfg.epochs) {
        throw ContractError("train: resume epoch " + std::to_string(st.next_epoch) +
                            " beyond configured epochs");
    }

    TrainLog log;
    log.suite = suite;
    const size_t n = ids.size();
    Vector grad(params.size());

    const auto write_all = [&](Index next_epoch) {
        if (checkpoint_path.empty()) return;
        save(checkpoint_path);
        st.next_epoch = next_epoch;
        save_train_state(st, checkpoint_path + ".state");
    };

    const Index end_epoch = cfg.stop_epoch > 0 ? cfg.stop_epoch : cfg.epochs;
    for (Index epoch = st.next_epoch; epoch < end_epoch; ++epoch) {
        const double lr = cosine_lr(epoch, cfg);
        std::mt19937_64 erng(
            mix64(cfg.seed ^ mix64(0x94d049bb133111ebULL * (epoch + 1))));
        const std::vector<size_t> order = shuffled_indices(erng, n);

        Index step = 0;
        for (size_t offset = 0; offset < n; offset += cfg.batch_size, ++step) {
            const size_t count = std::min<size_t>(cfg.batch_size, n - offset);
            const auto t0 = std::chrono::steady_clock::now();

            grad.setZero();
            StepRecord rec;
            rec.epoch = epoch;
            rec.step = step;
            rec.lr = lr;
            std::vector<StepRecord> parts;
            parts.reserve(count);
            for (size_t k = 0; k < count; ++k) {
                const HandoverSample& base = samples[ids[order[offset + k]]];
                const HandoverSample sample =
                    augment_reverse(base, erng, cfg.augment_prob);
                Tape tape;
                StepRecord part;
                const int total = build(tape, sample, part);
                parts.push_back(part);
                tape.backward(total);
                for (Index ti = 0; ti < params.tensor_count(); ++ti) {
                    const auto& info = params.info(ti);
                    const Matrix a = tape.adjoint(static_cast<int>(ti));
                    grad.segment(info.offset, info.rows * info.cols) +=
                        Eigen::Map<const Vector>(a.data(), a.size());
                }
            }
            grad /= static_cast<double>(count);

            if (cfg.grad_clip_norm > 0.0) {
                const double norm = grad.norm();
                if (norm > cfg.grad_clip_norm) grad *= cfg.grad_clip_norm / norm;
            }
            adam_step(params, grad, st.adam, lr, cfg);
            if (!params.all_finite()) {
                throw EvaluationError(
                    "train: parameters non-finite after epoch " +
                    std::to_string(epoch) + " step " + std::to_string(step) +
                    " in tensor '" + params.first_non_finite() + "'");
            }

            if (suite == LossSuite::kHandover) {
                std::vector<LossBreakdown> terms;
                terms.reserve(parts.size());
                for (const StepRecord& p : parts) terms.push_back(p.handover);
                rec.handover = average_breakdown(terms);
            } else {
                ClassLossBreakdown mean;
                for (const StepRecord& p : parts) {
                    mean.re += p.intention.re;
                    mean.v += p.intention.v;
                    mean.ce += p.intention.ce;
                }
                mean.re /= static_cast<double>(count);
                mean.v /= static_cast<double>(count);
                mean.ce /= static_cast<double>(count);
                mean.total = mean.re + mean.v + mean.ce;
                rec.intention = mean;
            }
            rec.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            st.global_step += 1;
            log.steps.push_back(rec);
        }

        if (cfg.checkpoint_interval > 0 && (epoch + 1) % cfg.checkpoint_interval == 0 &&
            epoch + 1 < end_epoch) {
            write_all(epoch + 1);
        }
    }

    const Index reached = std::max(end_epoch, st.next_epoch);
    write_all(reached);
    st.next_epoch = reached;
    return log;
}

}  // namespace

TrainLog train_predictor(PredictorWeights& w, const std::vector<HandoverSample>& samples,
                         const std::vector<size_t>& ids, const TrainConfig& cfg,
                         const std::string& checkpoint_path, TrainState* state) {
    w.config.validate();
    const DctBasis basis = dct_basis(w.config.input_frames);
    const BuildFn build = [&](Tape& tape, const HandoverSample& s, StepRecord& rec) {
        TapeBackend tb(tape);
        Index cursor = 0;
        const auto handles = bind_backbone(tb, w.params, w.config.blocks,
                                           /*with_embedding=*/true, &cursor);
        auto out = run_backbone(tb, handles, w.config, basis,
                                tb.constant(s.input.frames), s.intention);
        const auto L =
            handover_loss_graph(tb, out.motion, s.target.frames, s.ree_final(),
                                s.intention, s.input.layout.right_hand);
        rec.handover = read_breakdown(tb, L);
        return L.total;
    };
    const SaveFn save = [&](const std::string& path) { save_predictor(w, path); };
    return train_core(w.params, samples, ids, cfg, LossSuite::kHandover, build, save,
                      checkpoint_path, state);
}

TrainLog train_classifier(ClassifierWeights& w,
                          const std::vector<HandoverSample>& samples,
                          const std::vector<size_t>& ids, const TrainConfig& cfg,
                          const std::string& checkpoint_path, TrainState* state) {
    w.config.validate();
    const DctBasis basis = dct_basis(w.config.input_frames);
    const BuildFn build = [&](Tape& tape, const HandoverSample& s, StepRecord& rec) {
        TapeBackend tb(tape);
        const auto handles = bind_classifier(tb, w.params, w.config);
        auto out = run_classifier(tb, handles, w.config, basis,
                                  tb.constant(s.input.frames));
        const auto L =
            class_loss_graph(tb, out.logits, out.motion, s.target.frames, s.intention);
        rec.intention = read_class_breakdown(tb, L);
        return L.total;
    };
    const SaveFn save = [&](const std::string& path) { save_classifier(w, path); };
    return train_core(w.params, samples, ids, cfg, LossSuite::kIntention, build, save,
                      checkpoint_path, state);
}

}  // namespace hmp
