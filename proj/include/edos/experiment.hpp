#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "edos/checkpoint.hpp"
#include "edos/heads.hpp"
#include "edos/trainer.hpp"

namespace edos {

// Table-of-experiments wiring. The experiment id fixes the architecture:
//   1  absolute encoder, last-layer head        2  disentangled, last-layer
//   3  absolute, average-of-layers head         4  disentangled, avg-of-layers
//   5  dual encoders, per-branch MLPs + concat  6  experiment 5 from DAPT init
//   7  experiment 5 wiring, joint 5-class task B
//   8  dual encoders, plain concat + MLP, DAPT init
struct ExperimentConfig {
    int experiment_id = 1;
    TaskSelect task = TaskSelect::A;
    EncoderConfig encoder_a;
    std::optional<EncoderConfig> encoder_b;
    HeadConfig head;
    TrainConfig train;

    void validate() const;
};

bool experiment_is_dual(int id);
bool experiment_requires_dapt(int id);
bool experiment_forces_joint(int id);

// Builds the wiring for one experiment id with toy-sized encoders.
ExperimentConfig make_experiment_config(int id, TaskSelect task, std::size_t vocab_size);

nlohmann::json encoder_to_json(const EncoderConfig& c);
EncoderConfig encoder_from_json(const nlohmann::json& j);
nlohmann::json head_to_json(const HeadConfig& c);
HeadConfig head_from_json(const nlohmann::json& j);
nlohmann::json train_to_json(const TrainConfig& c);
TrainConfig train_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& c);
ExperimentConfig experiment_from_json(const nlohmann::json& j);

// Applies a config file's explicit keys on top of the wired defaults.
// Recognized sections: "encoder", "encoder_a", "encoder_b", "head", "train".
void apply_config_overrides(ExperimentConfig& config, const nlohmann::json& file);

ModelBundle<float> make_bundle_from_config(const ExperimentConfig& config, std::uint64_t seed);

struct LoadedBundle {
    ExperimentConfig config;
    ModelBundle<float> bundle;
    Vocabulary vocab;
    std::uint64_t seed = 0;
};

nlohmann::json classifier_info(const ExperimentConfig& config, std::uint64_t seed);
nlohmann::json mlm_info(const EncoderConfig& config, std::uint64_t seed);

LoadedBundle bundle_from_checkpoint(const LoadedCheckpoint& ckpt);

// Copies a masked-LM pretraining checkpoint ("enc.*" tensors) into the
// bundle encoder whose attention kind matches the checkpoint's.
void init_encoder_from_dapt(ModelBundle<float>& bundle, const LoadedCheckpoint& ckpt);

} // namespace edos
