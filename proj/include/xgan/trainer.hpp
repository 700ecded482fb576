#pragma once

// Alternating optimization: one generator/encoder/classifier Adam update,
// then one discriminator update, with seeded sampling and metric streaming.

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "xgan/objectives.hpp"
#include "xgan/optim.hpp"

namespace xgan {

enum class TrainMode : std::uint8_t {
  FullXgan,
  RecDannOnly,
  NoTeacher,
  NoSem,
  NoGan,
  DtnFrozenEncoder,
  DtnFinetunedEncoder,
  HighDann,
};

const std::vector<TrainMode>& all_train_modes();
std::string to_string(TrainMode m);
/// Throws ConfigError listing the valid names.
TrainMode parse_train_mode(const std::string& name);

struct TrainConfig {
  double learning_rate = 1e-4;
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int batch_size = 16;
  std::int64_t total_steps = 5000;
  std::uint64_t seed = 0;
  std::int64_t checkpoint_every = 0;
  std::int64_t metrics_every = 10;
  LossWeights weights;
  LossConfig loss;
  TrainMode mode = TrainMode::FullXgan;

  void validate() const;
  AdamSettings adam() const { return {learning_rate, adam_beta1, adam_beta2, adam_epsilon}; }
  bool operator==(const TrainConfig&) const = default;
};

/// What a mode actually trains: effective weights and encoder handling.
struct ModePlan {
  LossWeights weights;
  bool needs_teacher = false;
  bool encoders_from_teacher = false;
  bool encoders_frozen = false;
  bool encoders_sem_only = false;
};

ModePlan resolve_mode(const TrainConfig& config);

/// Per-domain shuffled order and cursor; reshuffled with the state RNG when exhausted.
struct SamplerState {
  std::array<std::vector<std::uint32_t>, 2> order;
  std::array<std::uint64_t, 2> cursor{0, 0};
  bool operator==(const SamplerState&) const = default;
};

struct TrainState {
  std::int64_t step = 0;
  XganModel<float> model;
  GradSet<float> adam_m, adam_v;
  std::mt19937_64 rng;
  SamplerState sampler;

  /// Builds the model from the seed and applies the mode's encoder setup
  /// (teacher weights copied into the encoders for the DTN baselines).
  static TrainState initialize(const ModelConfig& model, const TrainConfig& config,
                               const TeacherNet<float>* teacher = nullptr);
};

/// Draws equal-size batches for both domains, advancing the sampler.
std::array<ImageBatch<float>, 2> next_batches(TrainState& state, const ImageBatch<float>& corpus1,
                                              const ImageBatch<float>& corpus2, int batch_size);

/// One Adam update of encoders, decoders and classifier. Does not advance step.
LossReport generator_step(TrainState& state, const ImageBatch<float>& b1, const ImageBatch<float>& b2,
                          const TrainConfig& config, const TeacherNet<float>* teacher = nullptr);

/// One Adam update of the discriminator(s); a no-op returning 0 when w_gan = 0.
double discriminator_step(TrainState& state, const ImageBatch<float>& b1, const ImageBatch<float>& b2,
                          const TrainConfig& config);

struct MetricRecord {
  std::int64_t step;
  LossReport report;
  double disc_loss;
  double wall_time;
};

struct TrainSinks {
  std::function<void(const MetricRecord&)> metrics;
  std::function<void(const TrainState&)> checkpoint;
};

/// Runs steps until state.step == config.total_steps.
void continue_training(TrainState& state, const TrainConfig& config, const ImageBatch<float>& corpus1,
                       const ImageBatch<float>& corpus2, const TeacherNet<float>* teacher, const TrainSinks& sinks);

TrainState train(const ModelConfig& model, const TrainConfig& config, const ImageBatch<float>& corpus1,
                 const ImageBatch<float>& corpus2, const TeacherNet<float>* teacher = nullptr,
                 const TrainSinks& sinks = {});

/// Throws NumericError naming the first non-finite component.
void check_finite(const LossReport& r);

}  // namespace xgan
