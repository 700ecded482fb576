#pragma once

// JSON (de)serialization of every configuration struct, strict merging of
// user files over defaults, and dotted command-line overrides.

#include <string>

#include <nlohmann/json.hpp>

#include "xgan/model.hpp"
#include "xgan/objectives.hpp"
#include "xgan/trainer.hpp"

namespace xgan {

using Json = nlohmann::json;

Json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const Json& j);

Json to_json(const LossWeights& w);
LossWeights loss_weights_from_json(const Json& j);

Json to_json(const LossConfig& c);
LossConfig loss_config_from_json(const Json& j);

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j);

Json to_json(const LossReport& r);

/// Recursively overlays `patch` on `base`. Keys absent from `base` are an
/// error, except inside objects whose default is empty (free-form maps).
/// Scalar type changes are rejected (integers may stand in for reals).
Json merge_strict(const Json& base, const Json& patch, const std::string& path = "");

/// Sets `a.b.c` in `config` from a command-line string; the key must exist.
/// The value is parsed as JSON when possible, otherwise taken as a string.
void apply_dotted_override(Json& config, const std::string& key, const std::string& value);

}  // namespace xgan
