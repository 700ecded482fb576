#pragma once

// Versioned binary container: magic, version, kind, embedded JSON config,
// training counters, then named shape-tagged float32 tensors.

#include <cstdint>
#include <string>

#include "xgan/config.hpp"
#include "xgan/teacher.hpp"
#include "xgan/trainer.hpp"

namespace xgan {

enum class CheckpointKind : std::uint32_t { Model = 1, Teacher = 2, Probe = 3 };
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const TrainState& state, const TrainConfig& config, const std::string& path);

struct LoadedCheckpoint {
  TrainState state;
  ModelConfig model;
  TrainConfig train;
};

LoadedCheckpoint load_checkpoint(const std::string& path);
/// Also rejects a checkpoint whose embedded model config differs from `expected`.
LoadedCheckpoint load_checkpoint(const std::string& path, const ModelConfig& expected);

void save_attribute_net(const AttributeNet<float>& net, CheckpointKind kind, const Json& meta, const std::string& path);
AttributeNet<float> load_attribute_net(const std::string& path, CheckpointKind kind, Json* meta = nullptr);

void save_teacher(const TeacherNet<float>& teacher, const std::string& path);
/// Returned frozen.
TeacherNet<float> load_teacher(const std::string& path);

}  // namespace xgan
