#include "hmp/evaluator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <thread>

#ifdef __linux__
#include <sched.h>
#endif

#include "hmp/errors.hpp"
#include "hmp/inference.hpp"

namespace hmp {
namespace {

void check_motion_pair(const Matrix& pred, const Matrix& gt, const char* who) {
    if (pred.rows() != gt.rows() || pred.cols() != gt.cols()) {
        throw DimensionError(std::string(who) + ": prediction is " + std::to_string(pred.rows()) +
                             "x" + std::to_string(pred.cols()) + " but ground truth is " +
                             std::to_string(gt.rows()) + "x" + std::to_string(gt.cols()));
    }
    if (pred.rows() == 0 || pred.cols() == 0 || pred.cols() % 3 != 0) {
        throw DimensionError(std::string(who) + ": motion must be non-empty with a multiple of 3 columns");
    }
}

double frame_mean_joint_error(const Matrix& pred, const Matrix& gt, Index row) {
    const Index joints = pred.cols() / 3;
    double sum = 0.0;
    for (Index j = 0; j < joints; ++j) {
        sum += (pred.block(row, 3 * j, 1, 3) - gt.block(row, 3 * j, 1, 3)).norm();
    }
    return sum / static_cast<double>(joints);
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

LatencyStats bench_forward(const std::function<void()>& step,
                           const std::function<std::uint64_t()>& checksum, Index runs) {
    if (runs < 1) throw ContractError("bench: runs must be >= 1, got " + std::to_string(runs));

    Eigen::setNbThreads(1);
    bool pinned = false;
#ifdef __linux__
    const int cpu = sched_getcpu();
    if (cpu >= 0) {
        cpu_set_t set;
        CPU_ZERO(&set);
        CPU_SET(cpu, &set);
        pinned = sched_setaffinity(0, sizeof(set), &set) == 0;
    }
#endif

    const std::uint64_t before = checksum();
    LatencyStats stats;
    stats.runs = runs;
    stats.warmup = 10;
    for (Index i = 0; i < stats.warmup; ++i) step();

    std::vector<double> ms(static_cast<size_t>(runs));
    for (Index i = 0; i < runs; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        step();
        const auto t1 = std::chrono::steady_clock::now();
        ms[static_cast<size_t>(i)] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    }
    if (checksum() != before) {
        throw EvaluationError("bench: weights changed during timing runs");
    }

    double sum = 0.0;
    for (double v : ms) sum += v;
    stats.mean_ms = sum / static_cast<double>(runs);
    double sq = 0.0;
    for (double v : ms) sq += (v - stats.mean_ms) * (v - stats.mean_ms);
    stats.std_ms = runs > 1 ? std::sqrt(sq / static_cast<double>(runs - 1)) : 0.0;
    stats.min_ms = *std::min_element(ms.begin(), ms.end());
    stats.max_ms = *std::max_element(ms.begin(), ms.end());
    stats.hardware = hardware_descriptor() + (pinned ? ", pinned to one core" : ", unpinned");
    return stats;
}

}  // namespace

double body_l2(const Matrix& pred, const Matrix& gt) {
    check_motion_pair(pred, gt, "body_l2");
    const Index joints = pred.cols() / 3;
    double sum = 0.0;
    for (Index r = 0; r < pred.rows(); ++r) {
        for (Index j = 0; j < joints; ++j) {
            sum += (pred.block(r, 3 * j, 1, 3) - gt.block(r, 3 * j, 1, 3)).norm();
        }
    }
    return sum / static_cast<double>(pred.rows() * joints);
}

double pct_below(const Matrix& pred, const Matrix& gt, double threshold) {
    check_motion_pair(pred, gt, "pct_below");
    if (!(threshold > 0.0)) {
        throw ContractError("pct_below: threshold must be positive, got " + fmt(threshold));
    }
    Index hits = 0;
    for (Index r = 0; r < pred.rows(); ++r) {
        if (frame_mean_joint_error(pred, gt, r) <= threshold) ++hits;
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.rows());
}

double right_hand_l2(const Matrix& pred, const Matrix& gt, const JointLayout& layout) {
    check_motion_pair(pred, gt, "right_hand_l2");
    layout.validate();
    const Index col = 3 * layout.right_hand;
    if (col + 3 > pred.cols()) {
        throw DimensionError("right_hand_l2: layout places the right hand outside the motion columns");
    }
    double sum = 0.0;
    for (Index r = 0; r < pred.rows(); ++r) {
        sum += (pred.block(r, col, 1, 3) - gt.block(r, col, 1, 3)).norm();
    }
    return sum / static_cast<double>(pred.rows());
}

double macro_f1(const std::vector<int>& predicted, const std::vector<int>& truth, int classes) {
    if (predicted.size() != truth.size() || predicted.empty()) {
        throw ContractError("macro_f1: label vectors must be equal-sized and non-empty");
    }
    if (classes < 2) throw ContractError("macro_f1: need at least 2 classes");
    for (size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= classes || predicted[i] < 0 || predicted[i] >= classes) {
            throw ContractError("macro_f1: label outside [0, " + std::to_string(classes) +
                                ") at index " + std::to_string(i));
        }
    }

    double f1_sum = 0.0;
    for (int c = 0; c < classes; ++c) {
        Index tp = 0, fp = 0, fn = 0;
        for (size_t i = 0; i < truth.size(); ++i) {
            const bool p = predicted[i] == c;
            const bool t = truth[i] == c;
            tp += p && t;
            fp += p && !t;
            fn += !p && t;
        }
        if (tp + fp + fn == 0) {
            std::cerr << "warning: class " << c
                      << " absent from predictions and ground truth; counting its F1 as 0\n";
            continue;
        }
        const double precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
        const double recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
        if (precision + recall > 0.0) f1_sum += 2.0 * precision * recall / (precision + recall);
    }
    return f1_sum / static_cast<double>(classes);
}

double label_accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size() || predicted.empty()) {
        throw ContractError("label_accuracy: label vectors must be equal-sized and non-empty");
    }
    Index hits = 0;
    for (size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::string hardware_descriptor() {
    std::string model = "unknown cpu";
    std::ifstream cpuinfo("/proc/cpuinfo");
    std::string line;
    while (std::getline(cpuinfo, line)) {
        const auto pos = line.find("model name");
        if (pos != std::string::npos) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                model = line.substr(colon + 1);
                const auto first = model.find_first_not_of(" \t");
                if (first != std::string::npos) model = model.substr(first);
            }
            break;
        }
    }
    const unsigned threads = std::thread::hardware_concurrency();
    std::string out = model + ", " + std::to_string(threads) + " hardware thread" +
                      (threads == 1 ? "" : "s") + ", compiler " + __VERSION__ + ", Eigen " +
                      std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                      "." + std::to_string(EIGEN_MINOR_VERSION);
#ifdef NDEBUG
    out += ", release build";
#else
    out += ", debug build";
#endif
    return out;
}

LatencyStats bench_predictor(const PredictorWeights& w, const Matrix& window, Index runs) {
    volatile double sink = 0.0;
    return bench_forward(
        [&] {
            const Matrix out = predictor_forward(w, window, kCollaborative);
            sink = out(0, 0);
        },
        [&] { return w.params.checksum(); }, runs);
}

LatencyStats bench_classifier(const ClassifierWeights& w, const Matrix& window, Index runs) {
    volatile double sink = 0.0;
    return bench_forward(
        [&] {
            const ClassifierOutput out = classify_forward(w, window);
            sink = out.logits(0, 0);
        },
        [&] { return w.params.checksum(); }, runs);
}

EvalReport evaluate_samples(const PredictorWeights* pw, const ClassifierWeights* cw,
                            const std::vector<HandoverSample>& samples,
                            const std::vector<size_t>& ids, const EvalOptions& opt,
                            const std::string& split_name) {
    if (ids.empty()) throw ContractError("evaluate_samples: empty id list");
    for (size_t id : ids) {
        if (id >= samples.size()) {
            throw ContractError("evaluate_samples: id " + std::to_string(id) +
                                " outside dataset of " + std::to_string(samples.size()));
        }
    }
    if (pw == nullptr && cw == nullptr) {
        throw ContractError("evaluate_samples: need at least one model");
    }
    for (double thr : opt.thresholds) {
        if (!(thr > 0.0)) throw ContractError("evaluate_samples: thresholds must be positive");
    }

    EvalReport rep;
    rep.split = split_name;
    rep.samples = static_cast<Index>(ids.size());
    const double n = static_cast<double>(ids.size());

    if (pw != nullptr) {
        rep.predictor_params = count_parameters(*pw);
        double sum_body = 0.0;
        double sum_hand = 0.0;
        std::vector<double> pooled_errors;
        std::vector<double> per_seq_pct(opt.thresholds.size(), 0.0);
        for (size_t id : ids) {
            const HandoverSample& s = samples[id];
            const Matrix pred = predictor_forward(*pw, s.input.frames, s.intention);
            sum_body += body_l2(pred, s.target.frames);
            sum_hand += right_hand_l2(pred, s.target.frames, s.input.layout);
            if (opt.per_sequence_pct) {
                for (size_t t = 0; t < opt.thresholds.size(); ++t) {
                    per_seq_pct[t] += pct_below(pred, s.target.frames, opt.thresholds[t]);
                }
            } else {
                for (Index r = 0; r < pred.rows(); ++r) {
                    pooled_errors.push_back(frame_mean_joint_error(pred, s.target.frames, r));
                }
            }
        }
        rep.body_l2 = sum_body / n;
        rep.right_hand_l2 = sum_hand / n;
        for (size_t t = 0; t < opt.thresholds.size(); ++t) {
            double pct = 0.0;
            if (opt.per_sequence_pct) {
                pct = per_seq_pct[t] / n;
            } else {
                Index hits = 0;
                for (double e : pooled_errors) hits += e <= opt.thresholds[t];
                pct = 100.0 * static_cast<double>(hits) / static_cast<double>(pooled_errors.size());
            }
            rep.pct_below.emplace_back(opt.thresholds[t], pct);
        }
    }

    if (cw != nullptr) {
        rep.has_classifier = true;
        rep.classifier_params = count_parameters(*cw);
        std::vector<int> pred_labels;
        std::vector<int> true_labels;
        pred_labels.reserve(ids.size());
        true_labels.reserve(ids.size());
        for (size_t id : ids) {
            const HandoverSample& s = samples[id];
            int label = 0;
            if (opt.vote) {
                label = classify_with_voting(*cw, s.input.frames);
            } else {
                label = predict_intention(classify_forward(*cw, s.input.frames).logits);
            }
            pred_labels.push_back(label);
            true_labels.push_back(s.intention);
        }
        rep.macro_f1 = macro_f1(pred_labels, true_labels, cw->config.classes);
        rep.accuracy = label_accuracy(pred_labels, true_labels);
    }
    return rep;
}

std::string EvalReport::json() const {
    std::string out = "{\"split\":\"" + json_escape(split) + "\",\"samples\":" +
                      std::to_string(samples);
    if (predictor_params > 0) {
        out += ",\"body_l2_m\":" + fmt(body_l2);
        out += ",\"pct_below\":[";
        for (size_t i = 0; i < pct_below.size(); ++i) {
            if (i > 0) out += ",";
            out += "{\"threshold_m\":" + fmt(pct_below[i].first) +
                   ",\"percent\":" + fmt(pct_below[i].second) + "}";
        }
        out += "],\"right_hand_l2_m\":" + fmt(right_hand_l2);
        out += ",\"predictor_params\":" + std::to_string(predictor_params);
    }
    if (has_classifier) {
        out += ",\"macro_f1\":" + fmt(macro_f1);
        out += ",\"accuracy\":" + fmt(accuracy);
        out += ",\"classifier_params\":" + std::to_string(classifier_params);
    }
    if (has_latency) {
        out += ",\"latency\":{\"mean_ms\":" + fmt(latency.mean_ms) +
               ",\"std_ms\":" + fmt(latency.std_ms) + ",\"min_ms\":" + fmt(latency.min_ms) +
               ",\"max_ms\":" + fmt(latency.max_ms) + ",\"runs\":" + std::to_string(latency.runs) +
               ",\"warmup\":" + std::to_string(latency.warmup) + ",\"hardware\":\"" +
               json_escape(latency.hardware) + "\"}";
    }
    out += "}";
    return out;
}

std::string EvalReport::csv_header(const std::vector<double>& thresholds) {
    std::string out = "split,samples,body_l2_m";
    char buf[32];
    for (double thr : thresholds) {
        std::snprintf(buf, sizeof(buf), ",pct_le_%.2f", thr);
        out += buf;
    }
    out += ",right_hand_l2_m,macro_f1,accuracy";
    return out;
}

std::string EvalReport::csv_row() const {
    std::string out = split + "," + std::to_string(samples) + "," + fmt(body_l2);
    for (const auto& [thr, pct] : pct_below) {
        (void)thr;
        out += "," + fmt(pct);
    }
    out += "," + fmt(right_hand_l2);
    out += has_classifier ? "," + fmt(macro_f1) + "," + fmt(accuracy) : ",,";
    return out;
}

std::string EvalReport::table() const {
    std::string out;
    out += "split:            " + split + "\n";
    out += "samples:          " + std::to_string(samples) + "\n";
    if (predictor_params > 0) {
        out += "body L2 [m]:      " + fmt4(body_l2) + "\n";
        for (const auto& [thr, pct] : pct_below) {
            out += "frames <= " + fmt4(thr).substr(0, 4) + " m:  " + fmt4(pct) + " %\n";
        }
        out += "right hand [m]:   " + fmt4(right_hand_l2) + "\n";
        out += "predictor params: " + std::to_string(predictor_params) + "\n";
    }
    if (has_classifier) {
        out += "macro F1:         " + fmt4(macro_f1) + "\n";
        out += "accuracy:         " + fmt4(accuracy) + "\n";
        out += "classifier params: " + std::to_string(classifier_params) + "\n";
    }
    if (has_latency) {
        out += "latency [ms]:     " + fmt4(latency.mean_ms) + " +/- " + fmt4(latency.std_ms) +
               " (min " + fmt4(latency.min_ms) + ", max " + fmt4(latency.max_ms) + ", " +
               std::to_string(latency.runs) + " runs)\n";
        out += "hardware:         " + latency.hardware + "\n";
    }
    return out;
}

std::string LooResult::csv() const {
    std::vector<double> thresholds;
    const EvalReport& ref = splits.empty() ? aggregate : splits.front();
    for (const auto& [thr, pct] : ref.pct_below) {
        (void)pct;
        thresholds.push_back(thr);
    }
    std::string out = EvalReport::csv_header(thresholds) + "\n";
    for (const EvalReport& rep : splits) out += rep.csv_row() + "\n";
    out += aggregate.csv_row() + "\n";
    return out;
}

LooResult run_leave_one_out(const std::vector<HandoverSample>& samples,
                            const PredictorConfig& pcfg, const TrainConfig& ptrain,
                            const ClassifierConfig& ccfg, const TrainConfig& ctrain,
                            const LooOptions& opt) {
    if (!opt.with_predictor && !opt.with_classifier) {
        throw ContractError("run_leave_one_out: nothing to train");
    }
    const std::vector<Split> splits = leave_one_out(samples);

    LooResult res;
    for (const Split& sp : splits) {
        PredictorWeights pw;
        ClassifierWeights cw;
        const PredictorWeights* ppw = nullptr;
        const ClassifierWeights* pcw = nullptr;
        if (opt.with_predictor) {
            pw = init_predictor(pcfg, ptrain.seed);
            train_predictor(pw, samples, sp.train_ids, ptrain);
            ppw = &pw;
        }
        if (opt.with_classifier) {
            cw = init_classifier(ccfg, ctrain.seed);
            train_classifier(cw, samples, sp.train_ids, ctrain);
            pcw = &cw;
        }
        res.splits.push_back(
            evaluate_samples(ppw, pcw, samples, sp.test_ids, opt.eval, sp.held_out_subject));
    }

    EvalReport& agg = res.aggregate;
    agg.split = "mean";
    const double k = static_cast<double>(res.splits.size());
    for (const EvalReport& rep : res.splits) {
        agg.samples += rep.samples;
        agg.body_l2 += rep.body_l2 / k;
        agg.right_hand_l2 += rep.right_hand_l2 / k;
        agg.macro_f1 += rep.macro_f1 / k;
        agg.accuracy += rep.accuracy / k;
        if (agg.pct_below.empty()) {
            for (const auto& [thr, pct] : rep.pct_below) agg.pct_below.emplace_back(thr, 0.0);
        }
        for (size_t i = 0; i < rep.pct_below.size(); ++i) {
            agg.pct_below[i].second += rep.pct_below[i].second / k;
        }
        agg.has_classifier = agg.has_classifier || rep.has_classifier;
        agg.predictor_params = rep.predictor_params;
        agg.classifier_params = rep.classifier_params;
    }
    return res;
}

}  // namespace hmp
