#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmp/config_io.hpp"
#include "hmp/evaluator.hpp"
#include "hmp/generator.hpp"
#include "hmp/inference.hpp"
#include "hmp/trainer.hpp"

namespace {

using namespace hmp;

void write_text_file(const std::string& path, const std::string& content, bool append = false) {
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw ParseError(path + ": write failed");
}

// --- generate ----------------------------------------------------------------

void setup_generate(CLI::App& app) {
    auto* sub = app.add_subcommand("generate", "Generate a synthetic handover dataset");
    struct Opts {
        std::string config, out, tag;
        int subjects = 0, samples = 0, onset = 0;
        double fraction = 0.0, noise = 0.0;
        std::uint64_t seed = 0;
    };
    auto opts = std::make_shared<Opts>();
    sub->add_option("--config", opts->config, "JSON config file (schema hmp-generate)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts->out, "output dataset path")->required();
    auto* o_subjects = sub->add_option("--subjects", opts->subjects, "number of subjects");
    auto* o_samples = sub->add_option("--samples-per-subject", opts->samples, "samples per subject");
    auto* o_fraction =
        sub->add_option("--collab-fraction", opts->fraction, "fraction of collaborative samples");
    auto* o_noise = sub->add_option("--noise-std-m", opts->noise, "keypoint noise stddev in meters");
    auto* o_seed = sub->add_option("--seed", opts->seed, "generator seed (overrides config)");
    auto* o_tag = sub->add_option("--obstacle-tag", opts->tag, "scenario tag shaping the walk path");
    auto* o_onset =
        sub->add_option("--label-onset-frame", opts->onset, "frame where the behaviors diverge");

    sub->callback([=]() {
        SyntheticConfig cfg;
        if (!opts->config.empty()) cfg = read_generator_config(opts->config);
        if (*o_subjects) cfg.subjects = opts->subjects;
        if (*o_samples) cfg.samples_per_subject = opts->samples;
        if (*o_fraction) cfg.collab_fraction = opts->fraction;
        if (*o_noise) cfg.noise_std_m = opts->noise;
        if (*o_seed) cfg.seed = opts->seed;
        if (*o_tag) cfg.obstacle_tag = opts->tag;
        if (*o_onset) cfg.label_onset_frame = opts->onset;
        cfg.validate();

        const std::vector<HandoverSample> samples = generate_synthetic(cfg);
        write_dataset(samples, opts->out);
        write_generator_config(cfg, opts->out + ".config.json");

        size_t collaborative = 0;
        for (const HandoverSample& s : samples) collaborative += s.intention == kCollaborative;
        std::printf("wrote %zu samples (%zu collaborative, %zu non-collaborative, %d subjects) to %s\n",
                    samples.size(), collaborative, samples.size() - collaborative, cfg.subjects,
                    opts->out.c_str());
    });
}

// --- train ---------------------------------------------------------------------

void setup_train(CLI::App& app) {
    auto* sub = app.add_subcommand("train", "Train a predictor or classifier checkpoint");
    struct Opts {
        std::string data, kind, config, out;
        Index epochs = 0, batch = 0, interval = 0;
        double lr_max = 0.0, lr_min = 0.0, augment = 0.0, clip = 0.0;
        std::uint64_t seed = 0;
        bool resume = false;
    };
    auto opts = std::make_shared<Opts>();
    sub->add_option("--data", opts->data, "dataset file")->required()->check(CLI::ExistingFile);
    sub->add_option("--kind", opts->kind, "model kind")
        ->required()
        ->check(CLI::IsMember({"predictor", "classifier"}));
    sub->add_option("--config", opts->config, "JSON config file (schema hmp-train)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts->out, "checkpoint output path")->required();
    auto* o_epochs = sub->add_option("--epochs", opts->epochs, "training epochs");
    auto* o_batch = sub->add_option("--batch", opts->batch, "batch size");
    auto* o_lr_max = sub->add_option("--lr-max", opts->lr_max, "peak learning rate");
    auto* o_lr_min = sub->add_option("--lr-min", opts->lr_min, "final learning rate");
    auto* o_augment = sub->add_option("--augment-prob", opts->augment, "reversal probability");
    auto* o_interval =
        sub->add_option("--checkpoint-interval", opts->interval, "epochs between checkpoints");
    auto* o_clip = sub->add_option("--grad-clip", opts->clip, "gradient norm clip (0 = off)");
    auto* o_seed = sub->add_option("--seed", opts->seed, "training seed (overrides config)");
    sub->add_flag("--resume", opts->resume, "resume from --out and its .state file");

    sub->callback([=]() {
        const std::vector<HandoverSample> samples = read_dataset(opts->data);
        TrainConfig cfg;
        if (!opts->config.empty()) cfg = read_train_config(opts->config);
        if (*o_epochs) cfg.epochs = opts->epochs;
        if (*o_batch) cfg.batch_size = opts->batch;
        if (*o_lr_max) cfg.lr_max = opts->lr_max;
        if (*o_lr_min) cfg.lr_min = opts->lr_min;
        if (*o_augment) cfg.augment_prob = opts->augment;
        if (*o_interval) cfg.checkpoint_interval = opts->interval;
        if (*o_clip) cfg.grad_clip_norm = opts->clip;
        if (*o_seed) cfg.seed = opts->seed;

        const bool classifier = opts->kind == "classifier";
        if (!classifier && cfg.loss_suite == LossSuite::kIntention) {
            throw ConfigError("train: loss suite \"intention\" does not fit model kind \"predictor\"");
        }
        cfg.loss_suite = classifier ? LossSuite::kIntention : LossSuite::kHandover;
        cfg.validate();

        const std::vector<size_t> ids = all_ids(samples.size());
        TrainState state;
        TrainState* state_ptr = nullptr;
        if (opts->resume) {
            state = load_train_state(opts->out + ".state");
            state_ptr = &state;
        }

        TrainLog log;
        if (classifier) {
            ClassifierWeights w = opts->resume ? load_classifier(opts->out)
                                               : init_classifier(ClassifierConfig{}, cfg.seed);
            log = train_classifier(w, samples, ids, cfg, opts->out, state_ptr);
        } else {
            PredictorWeights w = opts->resume ? load_predictor(opts->out)
                                              : init_predictor(PredictorConfig{}, cfg.seed);
            log = train_predictor(w, samples, ids, cfg, opts->out, state_ptr);
        }

        const std::string log_path = opts->out + ".log.jsonl";
        write_text_file(log_path, log.to_jsonl(), opts->resume);
        write_train_config(cfg, opts->out + ".train.json");

        if (log.steps.empty()) {
            std::printf("nothing to train: checkpoint already covers %lld epochs\n",
                        static_cast<long long>(cfg.epochs));
        } else {
            const StepRecord& last = log.steps.back();
            const double total = cfg.loss_suite == LossSuite::kIntention ? last.intention.total
                                                                         : last.handover.total;
            std::printf("trained %s: %zu steps, final loss %.6g\n", opts->kind.c_str(),
                        log.steps.size(), total);
        }
        std::printf("wrote checkpoint %s and log %s\n", opts->out.c_str(), log_path.c_str());
    });
}

// --- evaluate ------------------------------------------------------------------

void setup_evaluate(CLI::App& app) {
    auto* sub = app.add_subcommand("evaluate", "Evaluate checkpoints or run leave-one-out");
    struct Opts {
        std::string data, mode = "single", predictor, classifier, out = "eval_report", config;
        Index epochs = 0, batch = 0;
        std::uint64_t seed = 0;
        bool per_seq = false, no_vote = false, no_predictor = false, no_classifier = false;
    };
    auto opts = std::make_shared<Opts>();
    sub->add_option("--data", opts->data, "dataset file")->required()->check(CLI::ExistingFile);
    sub->add_option("--mode", opts->mode, "evaluation mode")
        ->check(CLI::IsMember({"single", "loo"}));
    sub->add_option("--predictor", opts->predictor, "predictor checkpoint (single mode)")
        ->check(CLI::ExistingFile);
    sub->add_option("--classifier", opts->classifier, "classifier checkpoint (single mode)")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opts->out, "report path prefix (.json/.csv appended)");
    sub->add_option("--train-config", opts->config, "JSON train config for loo mode")
        ->check(CLI::ExistingFile);
    auto* o_epochs = sub->add_option("--epochs", opts->epochs, "loo: training epochs");
    auto* o_batch = sub->add_option("--batch", opts->batch, "loo: batch size");
    auto* o_seed = sub->add_option("--seed", opts->seed, "loo: training seed");
    sub->add_flag("--per-sequence-pct", opts->per_seq,
                  "average per-sequence threshold percentages instead of pooling frames");
    sub->add_flag("--no-vote", opts->no_vote, "classify the observed window once, no block voting");
    sub->add_flag("--no-predictor", opts->no_predictor, "loo: skip predictor training");
    sub->add_flag("--no-classifier", opts->no_classifier, "loo: skip classifier training");

    sub->callback([=]() {
        const std::vector<HandoverSample> samples = read_dataset(opts->data);
        EvalOptions eopt;
        eopt.per_sequence_pct = opts->per_seq;
        eopt.vote = !opts->no_vote;

        if (opts->mode == "single") {
            if (opts->predictor.empty() && opts->classifier.empty()) {
                throw ConfigError(
                    "evaluate: single mode needs --predictor and/or --classifier checkpoints");
            }
            PredictorWeights pw;
            ClassifierWeights cw;
            const PredictorWeights* ppw = nullptr;
            const ClassifierWeights* pcw = nullptr;
            if (!opts->predictor.empty()) {
                pw = load_predictor(opts->predictor);
                ppw = &pw;
            }
            if (!opts->classifier.empty()) {
                cw = load_classifier(opts->classifier);
                pcw = &cw;
            }
            const EvalReport rep =
                evaluate_samples(ppw, pcw, samples, all_ids(samples.size()), eopt, "all");
            write_text_file(opts->out + ".json", rep.json() + "\n");
            std::vector<double> thresholds;
            for (const auto& [thr, pct] : rep.pct_below) {
                (void)pct;
                thresholds.push_back(thr);
            }
            write_text_file(opts->out + ".csv",
                            EvalReport::csv_header(thresholds) + "\n" + rep.csv_row() + "\n");
            std::cout << rep.table();
        } else {
            TrainConfig tc;
            if (!opts->config.empty()) tc = read_train_config(opts->config);
            if (*o_epochs) tc.epochs = opts->epochs;
            if (*o_batch) tc.batch_size = opts->batch;
            if (*o_seed) tc.seed = opts->seed;
            tc.validate();

            LooOptions lopt;
            lopt.with_predictor = !opts->no_predictor;
            lopt.with_classifier = !opts->no_classifier;
            lopt.eval = eopt;
            const LooResult res = run_leave_one_out(samples, PredictorConfig{}, tc,
                                                    ClassifierConfig{}, tc, lopt);

            std::string json = "{\"splits\":[";
            for (size_t i = 0; i < res.splits.size(); ++i) {
                if (i > 0) json += ",";
                json += res.splits[i].json();
            }
            json += "],\"aggregate\":" + res.aggregate.json() + "}\n";
            write_text_file(opts->out + ".json", json);
            write_text_file(opts->out + ".csv", res.csv());
            for (const EvalReport& rep : res.splits) std::cout << rep.table() << "\n";
            std::cout << res.aggregate.table();
        }
        std::printf("wrote %s.json and %s.csv\n", opts->out.c_str(), opts->out.c_str());
    });
}

// --- predict -------------------------------------------------------------------

void setup_predict(CLI::App& app) {
    auto* sub = app.add_subcommand("predict", "Roll out a trajectory from an observed window");
    struct Opts {
        std::string predictor, classifier, data, intention = "auto", out, csv;
        Index index = 0, horizon = 25;
    };
    auto opts = std::make_shared<Opts>();
    sub->add_option("--predictor", opts->predictor, "predictor checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--classifier", opts->classifier, "classifier checkpoint (for --intention auto)")
        ->check(CLI::ExistingFile);
    sub->add_option("--data", opts->data, "dataset file holding the observed window")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--index", opts->index, "sample index within --data");
    sub->add_option("--horizon", opts->horizon, "output frames");
    sub->add_option("--intention", opts->intention, "intention label or 'auto'")
        ->check(CLI::IsMember({"auto", "0", "1"}));
    sub->add_option("--out", opts->out, "trajectory output path")->required();
    sub->add_option("--csv", opts->csv, "optional per-frame CSV output path");

    sub->callback([=]() {
        const std::vector<HandoverSample> samples = read_dataset(opts->data);
        if (opts->index < 0 || static_cast<size_t>(opts->index) >= samples.size()) {
            throw ContractError("predict: --index " + std::to_string(opts->index) +
                                " outside dataset of " + std::to_string(samples.size()) +
                                " samples (" + opts->data + ")");
        }
        const HandoverSample& sample = samples[static_cast<size_t>(opts->index)];
        const PredictorWeights pw = load_predictor(opts->predictor);

        Trajectory traj;
        if (opts->intention == "auto") {
            if (opts->classifier.empty()) {
                throw ConfigError("predict: --intention auto requires --classifier");
            }
            const ClassifierWeights cw = load_classifier(opts->classifier);
            const PipelineResult res =
                classify_then_predict(cw, pw, sample.input.frames, opts->horizon);
            traj = make_trajectory(res.motion, res.label, res.block_labels,
                                   sample.input.frame_rate);
            std::printf("voted intention %d (blocks: %d %d %d)\n", res.label, res.block_labels[0],
                        res.block_labels[1], res.block_labels[2]);
        } else {
            const int label = opts->intention == "0" ? 0 : 1;
            const Matrix motion = rollout(pw, sample.input.frames, label, opts->horizon);
            traj = make_trajectory(motion, label, {}, sample.input.frame_rate);
        }

        write_trajectory(traj, opts->out);
        if (!opts->csv.empty()) write_trajectory_csv(traj, sample.input.layout, opts->csv);
        std::printf("wrote %lld-frame trajectory (intention %d) to %s\n",
                    static_cast<long long>(traj.frames.rows()), traj.intention, opts->out.c_str());
    });
}

// --- bench ---------------------------------------------------------------------

void setup_bench(CLI::App& app) {
    auto* sub = app.add_subcommand("bench", "Measure single-threaded forward latency");
    struct Opts {
        std::string checkpoint, data, out;
        Index runs = 100, index = 0;
    };
    auto opts = std::make_shared<Opts>();
    sub->add_option("--checkpoint", opts->checkpoint, "predictor or classifier checkpoint")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--runs", opts->runs, "timed runs after 10 warmups");
    sub->add_option("--data", opts->data, "optional dataset supplying the input window")
        ->check(CLI::ExistingFile);
    sub->add_option("--index", opts->index, "sample index within --data");
    sub->add_option("--out", opts->out, "optional JSON report path");

    sub->callback([=]() {
        const Checkpoint ck = read_checkpoint(opts->checkpoint);
        Matrix window;
        if (!opts->data.empty()) {
            const std::vector<HandoverSample> samples = read_dataset(opts->data);
            if (opts->index < 0 || static_cast<size_t>(opts->index) >= samples.size()) {
                throw ContractError("bench: --index " + std::to_string(opts->index) +
                                    " outside dataset of " + std::to_string(samples.size()) +
                                    " samples (" + opts->data + ")");
            }
            window = samples[static_cast<size_t>(opts->index)].input.frames;
        }

        LatencyStats stats;
        Index params = 0;
        if (ck.kind == "predictor") {
            const PredictorWeights w = load_predictor(opts->checkpoint);
            if (window.size() == 0) window = Matrix::Zero(w.config.input_frames, w.config.channels);
            stats = bench_predictor(w, window, opts->runs);
            params = count_parameters(w);
        } else if (ck.kind == "classifier") {
            const ClassifierWeights w = load_classifier(opts->checkpoint);
            if (window.size() == 0) window = Matrix::Zero(w.config.input_frames, w.config.channels);
            stats = bench_classifier(w, window, opts->runs);
            params = count_parameters(w);
        } else {
            throw CheckpointError("bench: unsupported checkpoint kind \"" + ck.kind + "\" in " +
                                  opts->checkpoint);
        }

        std::printf("%s: %lld parameters\n", ck.kind.c_str(), static_cast<long long>(params));
        std::printf("latency over %lld runs (%lld warmup): mean %.3f ms, std %.3f ms, min %.3f ms, max %.3f ms\n",
                    static_cast<long long>(stats.runs), static_cast<long long>(stats.warmup),
                    stats.mean_ms, stats.std_ms, stats.min_ms, stats.max_ms);
        std::printf("hardware: %s\n", stats.hardware.c_str());

        if (!opts->out.empty()) {
            char buf[512];
            std::snprintf(buf, sizeof(buf),
                          "{\"kind\":\"%s\",\"params\":%lld,\"runs\":%lld,\"warmup\":%lld,"
                          "\"mean_ms\":%.17g,\"std_ms\":%.17g,\"min_ms\":%.17g,\"max_ms\":%.17g,",
                          ck.kind.c_str(), static_cast<long long>(params),
                          static_cast<long long>(stats.runs), static_cast<long long>(stats.warmup),
                          stats.mean_ms, stats.std_ms, stats.min_ms, stats.max_ms);
            std::string json = buf;
            std::string hw;
            for (char c : stats.hardware) {
                if (c == '"' || c == '\\') hw.push_back('\\');
                hw.push_back(c);
            }
            json += "\"hardware\":\"" + hw + "\"}\n";
            write_text_file(opts->out, json);
            std::printf("wrote %s\n", opts->out.c_str());
        }
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intention-conditioned human motion prediction pipeline"};
    app.require_subcommand(1);
    setup_generate(app);
    setup_train(app);
    setup_evaluate(app);
    setup_predict(app);
    setup_bench(app);

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const hmp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
