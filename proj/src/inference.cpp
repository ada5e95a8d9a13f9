#include "hmp/inference.hpp"

#include <string>

#include "hmp/errors.hpp"

namespace hmp {
namespace {

void check_window(const Matrix& window, Index frames, Index channels, const char* who) {
    if (window.rows() != frames || window.cols() != channels) {
        throw DimensionError(std::string(who) + ": window must be " + std::to_string(frames) +
                             "x" + std::to_string(channels) + ", got " +
                             std::to_string(window.rows()) + "x" + std::to_string(window.cols()));
    }
}

// Shifts the newest `fresh` rows of `window` to the top and writes `block`
// into the freed tail. Row-by-row from the top so the overlapping move never
// reads a row it has already overwritten.
void slide_window(Matrix& window, const Matrix& block) {
    const Index keep = window.rows() - block.rows();
    for (Index r = 0; r < keep; ++r) window.row(r) = window.row(r + block.rows());
    window.bottomRows(block.rows()) = block;
}

}  // namespace

Matrix rollout(const PredictorWeights& w, const Matrix& seed_window, int intention,
               Index horizon_frames, RolloutStats* stats) {
    const PredictorConfig& cfg = w.config;
    check_window(seed_window, cfg.input_frames, cfg.channels, "rollout");
    if (horizon_frames < 1) {
        throw ContractError("rollout: horizon_frames must be >= 1, got " +
                            std::to_string(horizon_frames));
    }
    if (intention < 0 || intention >= cfg.intention_classes) {
        throw ContractError("rollout: intention " + std::to_string(intention) +
                            " outside [0, " + std::to_string(cfg.intention_classes) + ")");
    }

    Matrix out(horizon_frames, cfg.channels);
    Matrix window = seed_window;
    if (stats != nullptr) {
        stats->blocks = 0;
        stats->window_allocations = 1;
    }

    Index written = 0;
    while (written < horizon_frames) {
        const Matrix block = predictor_forward(w, window, intention);
        const Index take = std::min<Index>(block.rows(), horizon_frames - written);
        out.middleRows(written, take) = block.topRows(take);
        written += take;
        if (stats != nullptr) ++stats->blocks;
        if (written < horizon_frames) slide_window(window, block);
    }
    return out;
}

int classify_with_voting(const ClassifierWeights& w, const Matrix& seed_window,
                         std::vector<int>* block_labels) {
    const ClassifierConfig& cfg = w.config;
    check_window(seed_window, cfg.input_frames, cfg.channels, "classify_with_voting");

    Matrix window = seed_window;
    std::vector<int> votes;
    votes.reserve(3);
    for (int block = 0; block < 3; ++block) {
        const ClassifierOutput out = classify_forward(w, window);
        votes.push_back(predict_intention(out.logits));
        if (block + 1 < 3) slide_window(window, out.motion);
    }
    if (block_labels != nullptr) *block_labels = votes;
    return vote_mode(votes);
}

PipelineResult classify_then_predict(const ClassifierWeights& cw, const PredictorWeights& pw,
                                     const Matrix& seed_window, Index horizon_frames,
                                     bool reclassify_per_block) {
    if (cw.config.channels != pw.config.channels ||
        cw.config.input_frames != pw.config.input_frames) {
        throw ConfigError("classify_then_predict: classifier and predictor disagree on window shape");
    }

    PipelineResult result;
    if (reclassify_per_block) {
        result.label = classify_with_voting(cw, seed_window, &result.block_labels);
    } else {
        const ClassifierOutput out = classify_forward(cw, seed_window);
        result.label = predict_intention(out.logits);
        result.block_labels.assign(3, result.label);
    }
    result.motion = rollout(pw, seed_window, result.label, horizon_frames);
    return result;
}

Trajectory make_trajectory(const Matrix& motion, int intention,
                           const std::vector<int>& block_labels, double frame_rate) {
    Trajectory traj;
    traj.frames = motion;
    traj.frame_rate = frame_rate;
    traj.intention = intention;
    traj.block_labels = block_labels;
    return traj;
}

}  // namespace hmp
