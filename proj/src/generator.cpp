#include "hmp/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hmp/rng.hpp"

namespace hmp {

namespace {

constexpr Index kTotalFrames = kInputFrames + kTargetFrames;

double smoothstep(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * (3.0 - 2.0 * u);
}

// Identity until tau_halt, then a parabolic deceleration to a full stop over
// 2*ramp (C1 at the brake point), holding tau_halt + ramp afterwards.
double braked(double tau, double tau_halt, double ramp) {
    if (tau <= tau_halt) return tau;
    const double over = tau - tau_halt;
    if (over < 2.0 * ramp) return tau - over * over / (4.0 * ramp);
    return tau_halt + ramp;
}

struct SubjectTraits {
    double height;
    double gait_hz;
    double swing_amp;
};

SubjectTraits subject_traits(uint64_t seed, int subject) {
    std::mt19937_64 g(mix64(seed ^ mix64(0xc2b2ae3d27d4eb4fULL * (subject + 1))));
    SubjectTraits t;
    t.height = uniform(g, 0.92, 1.08);
    t.gait_hz = uniform(g, 1.5, 2.1);
    t.swing_amp = uniform(g, 0.07, 0.11);
    return t;
}

double detour_amplitude(const std::string& tag, std::mt19937_64& g) {
    if (tag.empty() || tag == "open") return 0.0;
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    const double sign = (mix64(h) & 1) ? 1.0 : -1.0;
    return sign * uniform(g, 0.28, 0.42);
}

Matrix build_frames(const SyntheticConfig& cfg, const SubjectTraits& st,
                    int intention, uint64_t sample_seed) {
    std::mt19937_64 g(sample_seed);
    const double h = st.height;
    const double x_start = 6.0 + uniform(g, -0.2, 0.2);
    const double x_end = 1.05 + uniform(g, -0.05, 0.05);
    const double y0 = uniform(g, -0.30, 0.30);
    const double phase = uniform(g, 0.0, 2.0 * M_PI);
    const double warp = uniform(g, 0.92, 1.08);
    const double detour = detour_amplitude(cfg.obstacle_tag, g);

    const Eigen::RowVector3d p = handover_point();
    const double tau_on =
        static_cast<double>(cfg.label_onset_frame) / (kTotalFrames - 1);
    const double ramp = std::min(0.06, 0.45 * (1.0 - tau_on));

    Matrix frames(kTotalFrames, kChannels);
    for (Index i = 0; i < kTotalFrames; ++i) {
        const double tau = static_cast<double>(i) / (kTotalFrames - 1);
        const double t_sec = static_cast<double>(i) / kFrameRateHz;
        double tau_eff = tau;
        double brake_v = 1.0;
        if (intention == kNonCollaborative) {
            tau_eff = braked(tau, tau_on, ramp);
            brake_v = tau <= tau_on
                          ? 1.0
                          : std::max(0.0, 1.0 - (tau - tau_on) / (2.0 * ramp));
        }
        const double u = std::pow(tau_eff, warp);
        const double s = smoothstep(u);
        const double stride = 4.0 * u * (1.0 - u) * brake_v;
        // Raise (collaborative) or lower (non-collaborative) factor; hits 1
        // exactly at the final frame so the collaborative right hand lands on
        // the end-effector point when noise is zero.
        const double r =
            tau <= tau_on ? 0.0 : smoothstep((tau - tau_on) / (1.0 - tau_on));

        const double x = x_start - (x_start - x_end) * s;
        const double y =
            y0 + detour * std::exp(-(s - 0.5) * (s - 0.5) / (2.0 * 0.15 * 0.15));
        const double bob =
            0.015 * h * std::sin(4.0 * M_PI * st.gait_hz * t_sec + phase) * stride;
        const double swing =
            st.swing_amp * h * std::sin(2.0 * M_PI * st.gait_hz * t_sec + phase) *
            stride;

        const Eigen::RowVector3d torso(x, y, 0.95 * h + bob);
        const Eigen::RowVector3d neck = torso + Eigen::RowVector3d(0, 0, 0.35 * h);
        const Eigen::RowVector3d head = torso + Eigen::RowVector3d(0, 0, 0.60 * h);
        // The giver faces the robot (-x direction), so the right side of the
        // body is at +y.
        const Eigen::RowVector3d r_sh = neck + Eigen::RowVector3d(0, 0.20 * h, -0.02);
        const Eigen::RowVector3d l_sh = neck + Eigen::RowVector3d(0, -0.20 * h, -0.02);
        const Eigen::RowVector3d l_el =
            l_sh + Eigen::RowVector3d(0.5 * swing, -0.02, -0.28 * h);
        const Eigen::RowVector3d l_ha =
            l_sh + Eigen::RowVector3d(swing, -0.03, -0.55 * h);
        const Eigen::RowVector3d r_el_nat =
            r_sh + Eigen::RowVector3d(-0.5 * swing, 0.02, -0.28 * h);
        const Eigen::RowVector3d r_ha_nat =
            r_sh + Eigen::RowVector3d(-swing, 0.03, -0.55 * h);

        Eigen::RowVector3d r_el = r_el_nat;
        Eigen::RowVector3d r_ha = r_ha_nat;
        if (intention == kCollaborative) {
            const Eigen::RowVector3d el_t =
                0.5 * (r_sh + p) + Eigen::RowVector3d(0, 0, -0.12);
            r_el = (1.0 - r) * r_el_nat + r * el_t;
            r_ha = (1.0 - r) * r_ha_nat + r * p;
        } else {
            const Eigen::RowVector3d el_t =
                r_sh + Eigen::RowVector3d(0.01, 0.02, -0.30 * h);
            const Eigen::RowVector3d ha_t =
                r_sh + Eigen::RowVector3d(0.02, 0.02, -0.62 * h);
            r_el = (1.0 - r) * r_el_nat + r * el_t;
            r_ha = (1.0 - r) * r_ha_nat + r * ha_t;
        }

        frames.block<1, 3>(i, 0) = torso;
        frames.block<1, 3>(i, 3) = neck;
        frames.block<1, 3>(i, 6) = head;
        frames.block<1, 3>(i, 9) = l_sh;
        frames.block<1, 3>(i, 12) = l_el;
        frames.block<1, 3>(i, 15) = l_ha;
        frames.block<1, 3>(i, 18) = r_sh;
        frames.block<1, 3>(i, 21) = r_el;
        frames.block<1, 3>(i, 24) = r_ha;
    }

    if (cfg.noise_std_m > 0.0) {
        std::mt19937_64 ng(mix64(sample_seed ^ 0xa5a5a5a5a5a5a5a5ULL));
        for (Index i = 0; i < frames.rows(); ++i) {
            for (Index j = 0; j < frames.cols(); ++j) {
                frames(i, j) += cfg.noise_std_m * gaussian(ng);
            }
        }
    }
    return frames;
}

}  // namespace

Eigen::RowVector3d handover_point() { return {0.60, 0.0, 1.05}; }

void SyntheticConfig::validate() const {
    if (subjects <= 0) throw ConfigError("subjects must be positive");
    if (samples_per_subject <= 0) {
        throw ConfigError("samples_per_subject must be positive");
    }
    if (collab_fraction < 0.0 || collab_fraction > 1.0) {
        throw ConfigError("collab_fraction must be in [0, 1]");
    }
    if (noise_std_m < 0.0) throw ConfigError("noise_std_m must be non-negative");
    if (label_onset_frame < 1 || label_onset_frame > kInputFrames) {
        throw ConfigError("label_onset_frame must be in [1, " +
                          std::to_string(kInputFrames) + "]");
    }
}

std::vector<HandoverSample> generate_synthetic(const SyntheticConfig& config) {
    config.validate();
    const Eigen::RowVector3d p = handover_point();
    std::vector<HandoverSample> samples;
    samples.reserve(static_cast<size_t>(config.subjects) * config.samples_per_subject);

    const int n_collab = static_cast<int>(
        std::llround(config.collab_fraction * config.samples_per_subject));
    for (int subj = 0; subj < config.subjects; ++subj) {
        const SubjectTraits traits = subject_traits(config.seed, subj);
        std::mt19937_64 label_rng(
            mix64(config.seed ^ mix64(0x5851f42d4c957f2dULL * (subj + 1))));
        std::vector<int> labels(config.samples_per_subject, kNonCollaborative);
        std::fill(labels.begin(), labels.begin() + n_collab, kCollaborative);
        const std::vector<size_t> order = shuffled_indices(label_rng, labels.size());

        char subject_id[16];
        std::snprintf(subject_id, sizeof(subject_id), "s%02d", subj);
        for (int k = 0; k < config.samples_per_subject; ++k) {
            const int intention = labels[order[k]];
            const uint64_t sample_seed =
                mix64(config.seed ^ mix64(0x9e3779b97f4a7c15ULL * (subj + 1) +
                                          static_cast<uint64_t>(k)));
            const Matrix frames =
                build_frames(config, traits, intention, sample_seed);

            HandoverSample s;
            s.subject = subject_id;
            s.scenario = config.obstacle_tag;
            s.intention = intention;
            s.input.frames = frames.topRows(kInputFrames);
            s.target.frames = frames.bottomRows(kTargetFrames);
            s.input.frame_rate = kFrameRateHz;
            s.target.frame_rate = kFrameRateHz;
            s.ree = p.replicate(kTargetFrames, 1);
            s.validate();
            samples.push_back(std::move(s));
        }
    }
    return samples;
}

std::vector<HandoverSample> generate_synthetic(const SyntheticConfig& config,
                                               uint64_t seed) {
    SyntheticConfig cfg = config;
    cfg.seed = seed;
    return generate_synthetic(cfg);
}

}  // namespace hmp
