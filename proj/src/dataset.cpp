#include "hmp/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "hmp/rng.hpp"

namespace hmp {

using nlohmann::json;

JointLayout default_layout() {
    JointLayout layout;
    layout.joint_names = {"torso",          "neck",       "head",
                          "left_shoulder",  "left_elbow", "left_hand",
                          "right_shoulder", "right_elbow", "right_hand"};
    layout.right_hand = 8;
    return layout;
}

void JointLayout::validate() const {
    if (static_cast<Index>(joint_names.size()) != kJointCount) {
        throw SchemaError("joint layout must have exactly " +
                          std::to_string(kJointCount) + " joints");
    }
    if (right_hand < 0 || right_hand >= kJointCount) {
        throw SchemaError("right-hand index out of range");
    }
}

void MotionSequence::validate() const {
    layout.validate();
    if (frames.cols() != kChannels) {
        throw SchemaError("sequence channel count: expected " +
                          std::to_string(kChannels) + ", got " +
                          std::to_string(frames.cols()));
    }
    if (!frames.allFinite()) {
        throw SchemaError("sequence contains non-finite coordinates");
    }
    if (frame_rate <= 0.0) {
        throw SchemaError("frame rate must be positive");
    }
}

void HandoverSample::validate() const {
    input.validate();
    target.validate();
    if (input.length() != kInputFrames) {
        throw SchemaError("input length: expected " + std::to_string(kInputFrames) +
                          " frames, got " + std::to_string(input.length()));
    }
    if (target.length() != kTargetFrames) {
        throw SchemaError("target length: expected " + std::to_string(kTargetFrames) +
                          " frames, got " + std::to_string(target.length()));
    }
    if (intention != kCollaborative && intention != kNonCollaborative) {
        throw SchemaError("intention label must be 0 or 1");
    }
    if (ree.rows() != target.length() || ree.cols() != 3) {
        throw SchemaError("ree shape: expected one 3D point per target frame");
    }
    if (!ree.allFinite()) {
        throw SchemaError("ree contains non-finite coordinates");
    }
}

HandoverSample augment_reverse(const HandoverSample& sample, std::mt19937_64& rng,
                               double probability) {
    if (probability < 0.0 || probability > 1.0) {
        throw ContractError("augment_reverse: probability must be in [0, 1]");
    }
    const double draw = uniform01(rng);
    if (draw >= probability) {
        return sample;
    }
    const Index total = sample.input.length() + sample.target.length();
    Matrix merged(total, kChannels);
    merged.topRows(sample.input.length()) = sample.input.frames;
    merged.bottomRows(sample.target.length()) = sample.target.frames;
    HandoverSample out = sample;
    for (Index t = 0; t < sample.input.length(); ++t) {
        out.input.frames.row(t) = merged.row(total - 1 - t);
    }
    for (Index t = 0; t < sample.target.length(); ++t) {
        out.target.frames.row(t) = merged.row(total - 1 - sample.input.length() - t);
    }
    return out;
}

HandoverSample augment_reverse(const HandoverSample& sample, uint64_t seed,
                               double probability) {
    std::mt19937_64 rng(seed);
    return augment_reverse(sample, rng, probability);
}

std::vector<Split> leave_one_out(const std::vector<HandoverSample>& samples) {
    std::map<std::string, std::vector<size_t>> by_subject;
    for (size_t i = 0; i < samples.size(); ++i) {
        by_subject[samples[i].subject].push_back(i);
    }
    if (by_subject.size() < 2) {
        throw ContractError("leave_one_out: need at least 2 distinct subjects, got " +
                            std::to_string(by_subject.size()));
    }
    std::vector<Split> splits;
    for (const auto& [subject, ids] : by_subject) {
        Split split;
        split.held_out_subject = subject;
        split.test_ids = ids;
        for (size_t i = 0; i < samples.size(); ++i) {
            if (samples[i].subject != subject) split.train_ids.push_back(i);
        }
        splits.push_back(std::move(split));
    }
    return splits;
}

namespace {

constexpr const char* kDatasetFormat = "hmp-dataset";
constexpr const char* kTrajectoryFormat = "hmp-trajectory";
constexpr int kFormatVersion = 1;

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& rows, const std::string& field) {
    if (!rows.is_array() || rows.empty() || !rows[0].is_array()) {
        throw SchemaError("field '" + field + "' must be an array of coordinate rows");
    }
    const Index r = static_cast<Index>(rows.size());
    const Index c = static_cast<Index>(rows[0].size());
    Matrix m(r, c);
    for (Index i = 0; i < r; ++i) {
        if (static_cast<Index>(rows[i].size()) != c) {
            throw SchemaError("field '" + field + "' has ragged rows");
        }
        for (Index j = 0; j < c; ++j) {
            if (!rows[i][j].is_number()) {
                throw SchemaError("field '" + field + "' holds a non-numeric entry");
            }
            m(i, j) = rows[i][j].get<double>();
        }
    }
    return m;
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot open '" + tmp + "' for writing");
        out << content;
        if (!out) throw ParseError("write failed for '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        throw ParseError("cannot rename '" + tmp + "' to '" + path + "'");
    }
}

json read_header(std::istream& in, const std::string& path, const char* format) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("'" + path + "' is empty, expected a schema header");
    }
    json header;
    try {
        header = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path + "' line 1: bad header: " + e.what());
    }
    if (!header.contains("format") || header["format"] != format) {
        throw SchemaError("'" + path + "': header field 'format' must be '" +
                          std::string(format) + "'");
    }
    if (!header.contains("version") || header["version"] != kFormatVersion) {
        throw SchemaError("'" + path + "': unsupported header field 'version'");
    }
    return header;
}

}  // namespace

void write_dataset(const std::vector<HandoverSample>& samples, const std::string& path) {
    std::string out;
    json header = {{"format", kDatasetFormat}, {"version", kFormatVersion},
                   {"records", samples.size()}};
    out += header.dump();
    out += '\n';
    for (const HandoverSample& s : samples) {
        s.validate();
        json rec = {
            {"subject", s.subject},
            {"intention", s.intention},
            {"scenario", s.scenario},
            {"frame_rate", s.input.frame_rate},
            {"input", matrix_to_json(s.input.frames)},
            {"target", matrix_to_json(s.target.frames)},
            {"ree", matrix_to_json(s.ree)},
        };
        out += rec.dump();
        out += '\n';
    }
    atomic_write(path, out);
}

std::vector<HandoverSample> read_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open dataset '" + path + "'");
    read_header(in, path, kDatasetFormat);
    std::vector<HandoverSample> samples;
    std::string line;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError("'" + path + "' line " + std::to_string(line_no) +
                             " (record " + std::to_string(samples.size()) +
                             "): " + e.what());
        }
        HandoverSample s;
        try {
            for (const char* key :
                 {"subject", "intention", "scenario", "frame_rate", "input", "target", "ree"}) {
                if (!rec.contains(key)) {
                    throw SchemaError(std::string("missing field '") + key + "'");
                }
            }
            s.subject = rec["subject"].get<std::string>();
            s.intention = rec["intention"].get<int>();
            s.scenario = rec["scenario"].get<std::string>();
            s.input.frame_rate = rec["frame_rate"].get<double>();
            s.target.frame_rate = s.input.frame_rate;
            s.input.frames = matrix_from_json(rec["input"], "input");
            s.target.frames = matrix_from_json(rec["target"], "target");
            s.ree = matrix_from_json(rec["ree"], "ree");
            s.validate();
        } catch (const SchemaError& e) {
            throw SchemaError("'" + path + "' line " + std::to_string(line_no) +
                              " (record " + std::to_string(samples.size()) +
                              "): " + e.what());
        } catch (const json::exception& e) {
            throw SchemaError("'" + path + "' line " + std::to_string(line_no) +
                              " (record " + std::to_string(samples.size()) +
                              "): " + e.what());
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

void write_trajectory(const Trajectory& traj, const std::string& path) {
    json header = {{"format", kTrajectoryFormat},
                   {"version", kFormatVersion},
                   {"frame_rate", traj.frame_rate},
                   {"intention", traj.intention}};
    if (!traj.block_labels.empty()) {
        header["block_labels"] = traj.block_labels;
    }
    std::string out = header.dump();
    out += '\n';
    json frames = {{"frames", matrix_to_json(traj.frames)}};
    out += frames.dump();
    out += '\n';
    atomic_write(path, out);
}

Trajectory read_trajectory(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open trajectory '" + path + "'");
    json header = read_header(in, path, kTrajectoryFormat);
    Trajectory traj;
    traj.frame_rate = header.value("frame_rate", kFrameRateHz);
    traj.intention = header.value("intention", kCollaborative);
    if (header.contains("block_labels")) {
        traj.block_labels = header["block_labels"].get<std::vector<int>>();
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("'" + path + "': missing frames record");
    }
    json rec;
    try {
        rec = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError("'" + path + "' line 2: " + e.what());
    }
    if (!rec.contains("frames")) {
        throw SchemaError("'" + path + "': missing field 'frames'");
    }
    traj.frames = matrix_from_json(rec["frames"], "frames");
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, const JointLayout& layout,
                          const std::string& path) {
    std::string out = "frame,time_s";
    for (const std::string& joint : layout.joint_names) {
        for (const char* axis : {"x", "y", "z"}) {
            out += "," + joint + "_" + axis;
        }
    }
    out += '\n';
    char buf[64];
    for (Index r = 0; r < traj.frames.rows(); ++r) {
        std::snprintf(buf, sizeof(buf), "%lld,%.3f", static_cast<long long>(r),
                      static_cast<double>(r) / traj.frame_rate);
        out += buf;
        for (Index c = 0; c < traj.frames.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), ",%.17g", traj.frames(r, c));
            out += buf;
        }
        out += '\n';
    }
    atomic_write(path, out);
}

}  // namespace hmp
