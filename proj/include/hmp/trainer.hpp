#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmp/classifier.hpp"
#include "hmp/dataset.hpp"
#include "hmp/losses.hpp"
#include "hmp/predictor.hpp"

namespace hmp {

enum class LossSuite { kHandover, kIntention };

struct TrainConfig {
    Index epochs = 5000;
    Index batch_size = 256;
    double lr_max = 1e-2;
    double lr_min = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    uint64_t seed = 0;
    double augment_prob = 0.5;
    LossSuite loss_suite = LossSuite::kHandover;
    // Epochs between interval checkpoints; 0 writes only the final one.
    Index checkpoint_interval = 0;
    // Max gradient norm, 0 disables. Off by default; diagnostics only.
    double grad_clip_norm = 0.0;
    // Exclusive end epoch for this invocation; 0 runs to `epochs`. The
    // schedule always spans `epochs`, so a run stopped here and resumed from
    // its state file reproduces an uninterrupted run bit for bit.
    Index stop_epoch = 0;

    void validate() const;
};

// Cosine annealing from lr_max (epoch 0) to lr_min (last epoch), both
// endpoints exact. A single-epoch schedule stays at lr_max.
double cosine_lr(Index epoch, const TrainConfig& cfg);

struct AdamState {
    Vector m;
    Vector v;
    int64_t t = 0;
};

// Standard bias-corrected Adam update over the flat parameter vector.
// Non-finite gradient entries abort with the owning tensor's name.
void adam_step(ParamStore& params, const Vector& grad, AdamState& state, double lr,
               const TrainConfig& cfg);

// One record per optimizer step. Exactly one of the two breakdowns is
// meaningful, selected by the suite that produced the log.
struct StepRecord {
    Index epoch = 0;
    Index step = 0;
    double lr = 0.0;
    LossBreakdown handover;
    ClassLossBreakdown intention;
    double wall_ms = 0.0;
};

struct TrainLog {
    LossSuite suite = LossSuite::kHandover;
    std::vector<StepRecord> steps;

    std::string to_jsonl() const;
    void write(const std::string& path) const;
};

// Optimizer moments plus the resume position, serialized next to interval
// checkpoints so training can continue exactly where it stopped.
struct TrainState {
    AdamState adam;
    Index next_epoch = 0;
    Index global_step = 0;
};

void save_train_state(const TrainState& state, const std::string& path);
TrainState load_train_state(const std::string& path);

// Runs epochs [state.next_epoch, cfg.epochs) over samples[ids], mutating the
// weights in place. Shuffle and augmentation streams are derived per epoch
// from (seed, epoch), so a resumed run reproduces an uninterrupted one bit
// for bit. When checkpoint_path is non-empty, the weights (and the state,
// at "<checkpoint_path>.state") are written at every interval and at the end.
TrainLog train_predictor(PredictorWeights& w, const std::vector<HandoverSample>& samples,
                         const std::vector<size_t>& ids, const TrainConfig& cfg,
                         const std::string& checkpoint_path = "",
                         TrainState* state = nullptr);

TrainLog train_classifier(ClassifierWeights& w,
                          const std::vector<HandoverSample>& samples,
                          const std::vector<size_t>& ids, const TrainConfig& cfg,
                          const std::string& checkpoint_path = "",
                          TrainState* state = nullptr);

// Convenience: id list 0..n-1.
std::vector<size_t> all_ids(size_t n);

}  // namespace hmp
