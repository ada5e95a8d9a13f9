#pragma once

#include <string>

#include "hmp/generator.hpp"
#include "hmp/trainer.hpp"

namespace hmp {

// Strict JSON config files: every file carries {"schema": "...", "version": 1};
// unknown keys are rejected by name, missing keys fall back to the defaults,
// and type mismatches name the offending field. Values are validated on read.

SyntheticConfig read_generator_config(const std::string& path);
void write_generator_config(const SyntheticConfig& cfg, const std::string& path);

TrainConfig read_train_config(const std::string& path);
void write_train_config(const TrainConfig& cfg, const std::string& path);

}  // namespace hmp
