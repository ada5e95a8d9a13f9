#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hmp/errors.hpp"
#include "hmp/linalg.hpp"

namespace hmp {

inline constexpr Index kInputFrames = 50;
inline constexpr Index kTargetFrames = 10;
inline constexpr Index kJointCount = 9;
inline constexpr Index kChannels = 3 * kJointCount;
inline constexpr double kFrameRateHz = 10.0;

inline constexpr int kCollaborative = 0;
inline constexpr int kNonCollaborative = 1;

// Fixed upper-body keypoint order. Column 3*j .. 3*j+2 of a frame matrix is
// the xyz position of joint j in meters, world coordinates.
struct JointLayout {
    std::vector<std::string> joint_names;
    Index right_hand = 0;

    void validate() const;
    Index right_hand_col() const { return 3 * right_hand; }
};

JointLayout default_layout();

struct MotionSequence {
    Matrix frames;  // T x 27, meters
    double frame_rate = kFrameRateHz;
    JointLayout layout = default_layout();

    Index length() const { return frames.rows(); }
    void validate() const;
};

// One training/evaluation unit: a 50-frame observed window, the 10-frame
// target window, the intention label, the robot end-effector position per
// target frame, and provenance tags.
struct HandoverSample {
    MotionSequence input;   // exactly 50 frames
    MotionSequence target;  // exactly 10 frames
    int intention = kCollaborative;
    Matrix ree;             // 10 x 3, end-effector position per target frame
    std::string subject;
    std::string scenario;

    void validate() const;
    Eigen::RowVector3d ree_final() const { return ree.row(ree.rows() - 1); }
};

struct Split {
    std::string held_out_subject;
    std::vector<size_t> train_ids;
    std::vector<size_t> test_ids;
};

// Time-reverses the concatenated 60-frame sequence with probability `p` and
// re-splits it into input/target. Label and ree are kept. Applying it twice
// at p = 1 restores the original sample.
HandoverSample augment_reverse(const HandoverSample& sample, std::mt19937_64& rng,
                               double probability);
HandoverSample augment_reverse(const HandoverSample& sample, uint64_t seed,
                               double probability);

// One split per distinct subject, each holding that subject's samples out.
// Splits are ordered by subject id; throws if fewer than 2 subjects exist.
std::vector<Split> leave_one_out(const std::vector<HandoverSample>& samples);

// Line-delimited JSON records behind a one-line schema header. Writing is
// atomic (temp file + rename); the round trip preserves 64-bit values
// exactly.
void write_dataset(const std::vector<HandoverSample>& samples, const std::string& path);
std::vector<HandoverSample> read_dataset(const std::string& path);

// Predicted-trajectory export in the same container style, so predictions
// can be read back losslessly. `block_labels` is empty unless the intention
// was inferred by the classifier pipeline.
struct Trajectory {
    Matrix frames;  // horizon x 27
    double frame_rate = kFrameRateHz;
    int intention = kCollaborative;
    std::vector<int> block_labels;
};

void write_trajectory(const Trajectory& traj, const std::string& path);
Trajectory read_trajectory(const std::string& path);
void write_trajectory_csv(const Trajectory& traj, const JointLayout& layout,
                          const std::string& path);

}  // namespace hmp
