#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hmp/param_store.hpp"

namespace hmp {

// On-disk container shared by predictor and classifier checkpoints.
//
// Layout (all integers little-endian):
//   magic "HMPC", u32 format version,
//   u32 kind length + kind bytes ("predictor" / "classifier"),
//   u32 config entry count, entries as (u32 key length + key bytes, i64 value),
//   u64 tensor count, tensors as (u32 name length + name bytes,
//       u64 rows, u64 cols, rows*cols float64 values in row-major order).
struct Checkpoint {
    std::string kind;
    std::vector<std::pair<std::string, int64_t>> config;
    ParamStore params;
};

inline constexpr uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::string& path, const std::string& kind,
                      const std::vector<std::pair<std::string, int64_t>>& config,
                      const ParamStore& params);

Checkpoint read_checkpoint(const std::string& path);

// Looks up a config entry; throws CheckpointError naming the key if absent.
int64_t checkpoint_config_value(const Checkpoint& ck, const std::string& key);

}  // namespace hmp
