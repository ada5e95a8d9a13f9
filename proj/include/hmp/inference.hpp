#pragma once

#include <vector>

#include "hmp/classifier.hpp"
#include "hmp/predictor.hpp"

namespace hmp {

struct RolloutStats {
    Index blocks = 0;
    // Number of times the sliding window buffer was (re)allocated; stays at 1
    // for any horizon because the buffer is shifted in place.
    Index window_allocations = 0;
};

// Autoregressive deployment: predicts N-frame blocks, slides the 50-frame
// window over its own output, and truncates the concatenation to
// horizon_frames.
Matrix rollout(const PredictorWeights& w, const Matrix& seed_window, int intention,
               Index horizon_frames, RolloutStats* stats = nullptr);

// Intention of a window by majority over three classifier evaluations: the
// window itself, then the window extended twice by the classifier's own
// decoded motion blocks.
int classify_with_voting(const ClassifierWeights& w, const Matrix& seed_window,
                         std::vector<int>* block_labels = nullptr);

struct PipelineResult {
    Matrix motion;
    int label = kCollaborative;
    std::vector<int> block_labels;
};

// Fig-2-style pipeline: vote the intention over three blocks, then roll out
// the predictor conditioned on the voted label. With reclassify_per_block
// off, the classifier runs once on the observed window and its label is
// used for all three votes.
PipelineResult classify_then_predict(const ClassifierWeights& cw,
                                     const PredictorWeights& pw,
                                     const Matrix& seed_window, Index horizon_frames,
                                     bool reclassify_per_block = true);

Trajectory make_trajectory(const Matrix& motion, int intention,
                           const std::vector<int>& block_labels = {},
                           double frame_rate = kFrameRateHz);

}  // namespace hmp
