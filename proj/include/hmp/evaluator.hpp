#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hmp/classifier.hpp"
#include "hmp/predictor.hpp"
#include "hmp/trainer.hpp"

namespace hmp {

// --- metric primitives ------------------------------------------------------

// Mean over frames and joints of the per-joint 3D Euclidean error (metres).
double body_l2(const Matrix& pred, const Matrix& gt);

// Percentage (0..100) of frames whose mean per-joint error is <= threshold.
double pct_below(const Matrix& pred, const Matrix& gt, double threshold);

// Mean over frames of the right-hand 3D Euclidean error (metres).
double right_hand_l2(const Matrix& pred, const Matrix& gt,
                     const JointLayout& layout = default_layout());

// Unweighted mean of per-class F1. A class absent from both vectors
// contributes F1 = 0 and emits a warning on stderr.
double macro_f1(const std::vector<int>& predicted, const std::vector<int>& truth,
                int classes = 2);

// Fraction of correct labels in [0, 1].
double label_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

// --- latency ----------------------------------------------------------------

struct LatencyStats {
    double mean_ms = 0.0;
    double std_ms = 0.0;
    double min_ms = 0.0;
    double max_ms = 0.0;
    Index runs = 0;
    Index warmup = 0;
    std::string hardware;
};

std::string hardware_descriptor();

// Times single-threaded forward passes (10 warmup runs excluded), pinning the
// thread to one core when the platform allows. Throws EvaluationError if the
// weights change during the benchmark.
LatencyStats bench_predictor(const PredictorWeights& w, const Matrix& window, Index runs = 100);
LatencyStats bench_classifier(const ClassifierWeights& w, const Matrix& window, Index runs = 100);

// --- dataset-level evaluation -----------------------------------------------

struct EvalOptions {
    std::vector<double> thresholds = {0.20, 0.30, 0.35, 0.40};
    // Percent-below statistics pool every frame of every sequence by default;
    // with per_sequence_pct the per-sequence percentages are averaged instead.
    bool per_sequence_pct = false;
    // Classifier labels come from three-block majority voting by default; off
    // means a single evaluation of the observed window.
    bool vote = true;
};

struct EvalReport {
    std::string split = "all";
    Index samples = 0;
    double body_l2 = 0.0;
    std::vector<std::pair<double, double>> pct_below;  // (threshold m, percent)
    double right_hand_l2 = 0.0;
    bool has_classifier = false;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    Index predictor_params = 0;
    Index classifier_params = 0;
    bool has_latency = false;
    LatencyStats latency;

    std::string json() const;
    std::string csv_row() const;
    static std::string csv_header(const std::vector<double>& thresholds);
    std::string table() const;
};

// Evaluates the given samples; either model pointer may be null, skipping the
// corresponding metrics.
EvalReport evaluate_samples(const PredictorWeights* pw, const ClassifierWeights* cw,
                            const std::vector<HandoverSample>& samples,
                            const std::vector<size_t>& ids, const EvalOptions& opt = {},
                            const std::string& split_name = "all");

// --- leave-one-subject-out --------------------------------------------------

struct LooOptions {
    bool with_predictor = true;
    bool with_classifier = true;
    EvalOptions eval;
};

struct LooResult {
    std::vector<EvalReport> splits;
    EvalReport aggregate;  // unweighted mean over splits

    std::string csv() const;
};

// Trains fresh models on each training fold and evaluates them on the
// held-out subject.
LooResult run_leave_one_out(const std::vector<HandoverSample>& samples,
                            const PredictorConfig& pcfg, const TrainConfig& ptrain,
                            const ClassifierConfig& ccfg, const TrainConfig& ctrain,
                            const LooOptions& opt = {});

}  // namespace hmp
