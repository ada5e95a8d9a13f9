#include "hmp/config_io.hpp"

#include <cstdint>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "hmp/errors.hpp"

namespace hmp {
namespace {

using nlohmann::json;

json load_config(const std::string& path, const char* schema,
                 const std::set<std::string>& allowed) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open config file");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (!j.is_object()) throw SchemaError(path + ": config root must be a JSON object");
    if (!j.contains("schema") || !j["schema"].is_string()) {
        throw SchemaError(path + ": missing string field \"schema\"");
    }
    if (j["schema"].get<std::string>() != schema) {
        throw SchemaError(path + ": expected schema \"" + std::string(schema) + "\", got \"" +
                          j["schema"].get<std::string>() + "\"");
    }
    if (!j.contains("version") || !j["version"].is_number_integer() ||
        j["version"].get<std::int64_t>() != 1) {
        throw SchemaError(path + ": unsupported config version (expected 1)");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() == "schema" || it.key() == "version") continue;
        if (allowed.count(it.key()) == 0) {
            throw ConfigError(path + ": unknown config key \"" + it.key() + "\"");
        }
    }
    return j;
}

template <typename T>
void fetch(const json& j, const char* key, T& out, const std::string& path) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(path + ": field \"" + std::string(key) + "\" has the wrong type");
    }
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << content;
    out.flush();
    if (!out) throw ParseError(path + ": write failed");
}

}  // namespace

SyntheticConfig read_generator_config(const std::string& path) {
    const json j = load_config(path, "hmp-generate",
                               {"subjects", "samples_per_subject", "collab_fraction",
                                "noise_std_m", "seed", "obstacle_tag", "label_onset_frame"});
    SyntheticConfig cfg;
    fetch(j, "subjects", cfg.subjects, path);
    fetch(j, "samples_per_subject", cfg.samples_per_subject, path);
    fetch(j, "collab_fraction", cfg.collab_fraction, path);
    fetch(j, "noise_std_m", cfg.noise_std_m, path);
    fetch(j, "seed", cfg.seed, path);
    fetch(j, "obstacle_tag", cfg.obstacle_tag, path);
    fetch(j, "label_onset_frame", cfg.label_onset_frame, path);
    cfg.validate();
    return cfg;
}

void write_generator_config(const SyntheticConfig& cfg, const std::string& path) {
    json j;
    j["schema"] = "hmp-generate";
    j["version"] = 1;
    j["subjects"] = cfg.subjects;
    j["samples_per_subject"] = cfg.samples_per_subject;
    j["collab_fraction"] = cfg.collab_fraction;
    j["noise_std_m"] = cfg.noise_std_m;
    j["seed"] = cfg.seed;
    j["obstacle_tag"] = cfg.obstacle_tag;
    j["label_onset_frame"] = cfg.label_onset_frame;
    write_text(path, j.dump(2) + "\n");
}

TrainConfig read_train_config(const std::string& path) {
    const json j = load_config(path, "hmp-train",
                               {"epochs", "batch_size", "lr_max", "lr_min", "beta1", "beta2",
                                "epsilon", "seed", "augment_prob", "loss", "checkpoint_interval",
                                "grad_clip_norm"});
    TrainConfig cfg;
    fetch(j, "epochs", cfg.epochs, path);
    fetch(j, "batch_size", cfg.batch_size, path);
    fetch(j, "lr_max", cfg.lr_max, path);
    fetch(j, "lr_min", cfg.lr_min, path);
    fetch(j, "beta1", cfg.beta1, path);
    fetch(j, "beta2", cfg.beta2, path);
    fetch(j, "epsilon", cfg.epsilon, path);
    fetch(j, "seed", cfg.seed, path);
    fetch(j, "augment_prob", cfg.augment_prob, path);
    fetch(j, "checkpoint_interval", cfg.checkpoint_interval, path);
    fetch(j, "grad_clip_norm", cfg.grad_clip_norm, path);
    if (j.contains("loss")) {
        std::string suite;
        fetch(j, "loss", suite, path);
        if (suite == "handover") {
            cfg.loss_suite = LossSuite::kHandover;
        } else if (suite == "intention") {
            cfg.loss_suite = LossSuite::kIntention;
        } else {
            throw ConfigError(path + ": field \"loss\" must be \"handover\" or \"intention\", got \"" +
                              suite + "\"");
        }
    }
    cfg.validate();
    return cfg;
}

void write_train_config(const TrainConfig& cfg, const std::string& path) {
    json j;
    j["schema"] = "hmp-train";
    j["version"] = 1;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["lr_max"] = cfg.lr_max;
    j["lr_min"] = cfg.lr_min;
    j["beta1"] = cfg.beta1;
    j["beta2"] = cfg.beta2;
    j["epsilon"] = cfg.epsilon;
    j["seed"] = cfg.seed;
    j["augment_prob"] = cfg.augment_prob;
    j["loss"] = cfg.loss_suite == LossSuite::kHandover ? "handover" : "intention";
    j["checkpoint_interval"] = cfg.checkpoint_interval;
    j["grad_clip_norm"] = cfg.grad_clip_norm;
    write_text(path, j.dump(2) + "\n");
}

}  // namespace hmp
