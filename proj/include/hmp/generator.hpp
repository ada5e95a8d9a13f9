#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmp/dataset.hpp"

namespace hmp {

// Scenario parameters for the synthetic handover generator. A giver starts
// roughly 6 m from the robot and walks toward it; collaborative samples
// raise the right hand onto the robot end-effector point by the final
// frame, non-collaborative samples brake to a halt with the hand kept low.
struct SyntheticConfig {
    int subjects = 10;
    int samples_per_subject = 20;
    double collab_fraction = 0.5;
    double noise_std_m = 0.005;
    uint64_t seed = 0;
    std::string obstacle_tag = "open";
    // Frame index at which the two intention behaviors start to diverge.
    // Below 50 the divergence is visible inside the observed window, so the
    // classes are separable from the input alone; at 50 only the target
    // frames differ and the inputs of both classes are indistinguishable.
    int label_onset_frame = 30;

    void validate() const;
};

// Fixed handover point held by the robot end effector, world meters.
Eigen::RowVector3d handover_point();

// Deterministic for a fixed (config, seed); samples are independent of each
// other's draws, so changing counts never reshuffles earlier samples.
std::vector<HandoverSample> generate_synthetic(const SyntheticConfig& config);
std::vector<HandoverSample> generate_synthetic(const SyntheticConfig& config,
                                               uint64_t seed);

}  // namespace hmp
