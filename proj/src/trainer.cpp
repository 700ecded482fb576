#include "xgan/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "xgan/errors.hpp"

namespace xgan {

namespace {

const std::array<std::pair<TrainMode, const char*>, 8> kModeNames{{
    {TrainMode::FullXgan, "full_xgan"},
    {TrainMode::RecDannOnly, "rec_dann_only"},
    {TrainMode::NoTeacher, "no_teacher"},
    {TrainMode::NoSem, "no_sem"},
    {TrainMode::NoGan, "no_gan"},
    {TrainMode::DtnFrozenEncoder, "dtn_frozen_encoder"},
    {TrainMode::DtnFinetunedEncoder, "dtn_finetuned_encoder"},
    {TrainMode::HighDann, "high_dann"},
}};

constexpr double kHighDannFactor = 10.0;

GroupMask generator_groups() {
  return GroupMask::of({ParamGroup::EncPrivate1, ParamGroup::EncPrivate2, ParamGroup::EncShared,
                        ParamGroup::DecShared, ParamGroup::DecPrivate1, ParamGroup::DecPrivate2,
                        ParamGroup::Classifier});
}

GroupMask without_encoders(GroupMask m) {
  return m.without(ParamGroup::EncPrivate1).without(ParamGroup::EncPrivate2).without(ParamGroup::EncShared);
}

void copy_teacher_into_encoders(XganModel<float>& model, const TeacherNet<float>& teacher) {
  if (!teacher_matches_encoder(model.config(), teacher))
    throw ConfigError("DTN modes need a teacher whose trunk matches the model encoder topology");
  std::vector<int> src;
  for (const auto& op : teacher.net().trunk.ops) {
    if (op.weight >= 0) src.push_back(op.weight);
    if (op.bias >= 0) src.push_back(op.bias);
  }
  for (DomainId d : {DomainId::D1, DomainId::D2}) {
    const auto dst = model.encoder_param_indices(d);
    if (dst.size() != src.size()) throw ConfigError("teacher trunk and encoder differ in depth");
    for (std::size_t i = 0; i < dst.size(); ++i) {
      auto& to = model.params()[dst[i]].value;
      const auto& from = teacher.params()[src[i]].value;
      if (!to.same_shape(from))
        throw ConfigError("teacher tensor " + teacher.params()[src[i]].name + " does not fit " +
                          model.params()[dst[i]].name);
      to = from;
    }
  }
}

void reshuffle(std::vector<std::uint32_t>& order, std::mt19937_64& rng) {
  std::shuffle(order.begin(), order.end(), rng);
}

}  // namespace

const std::vector<TrainMode>& all_train_modes() {
  static const std::vector<TrainMode> modes = [] {
    std::vector<TrainMode> m;
    for (const auto& [mode, _] : kModeNames) m.push_back(mode);
    return m;
  }();
  return modes;
}

std::string to_string(TrainMode m) {
  for (const auto& [mode, name] : kModeNames)
    if (mode == m) return name;
  return "unknown";
}

TrainMode parse_train_mode(const std::string& name) {
  for (const auto& [mode, n] : kModeNames)
    if (name == n) return mode;
  std::string valid;
  for (const auto& [_, n] : kModeNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
  throw ConfigError("unknown mode '" + name + "'; valid modes: " + valid);
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ConfigError("train.learning_rate: must be finite and >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ConfigError("train.adam_beta1: must be in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ConfigError("train.adam_beta2: must be in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw ConfigError("train.adam_epsilon: must be > 0");
  if (batch_size < 1) throw ConfigError("train.batch_size: must be >= 1");
  if (total_steps < 0) throw ConfigError("train.total_steps: must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("train.checkpoint_every: must be >= 0");
  if (metrics_every < 0) throw ConfigError("train.metrics_every: must be >= 0");
  loss.validate();
}

ModePlan resolve_mode(const TrainConfig& config) {
  ModePlan p;
  p.weights = config.weights;
  LossWeights& w = p.weights;
  switch (config.mode) {
    case TrainMode::FullXgan:
      break;
    case TrainMode::RecDannOnly:
      w.w_sem = w.w_gan = w.w_teach = w.tv_weight = 0.0;
      w.teach_enabled = false;
      break;
    case TrainMode::HighDann:
      w.w_dann *= kHighDannFactor;
      break;
    case TrainMode::NoTeacher:
      w.w_teach = 0.0;
      w.teach_enabled = false;
      break;
    case TrainMode::NoSem:
      w.w_sem = 0.0;
      break;
    case TrainMode::NoGan:
      w.w_gan = 0.0;
      break;
    case TrainMode::DtnFrozenEncoder:
    case TrainMode::DtnFinetunedEncoder:
      w.w_dann = 0.0;
      w.w_teach = 0.0;
      w.teach_enabled = false;
      p.needs_teacher = true;
      p.encoders_from_teacher = true;
      p.encoders_frozen = config.mode == TrainMode::DtnFrozenEncoder;
      p.encoders_sem_only = config.mode == TrainMode::DtnFinetunedEncoder;
      break;
  }
  p.needs_teacher = p.needs_teacher || w.teach_enabled;
  return p;
}

TrainState TrainState::initialize(const ModelConfig& model, const TrainConfig& config,
                                  const TeacherNet<float>* teacher) {
  config.validate();
  const ModePlan plan = resolve_mode(config);
  plan.weights.validate(teacher != nullptr);
  if (plan.needs_teacher && teacher == nullptr)
    throw ConfigError("mode " + to_string(config.mode) + " requires a teacher");
  if (teacher) check_teacher_compatible(model, *teacher);
  TrainState s;
  s.model = XganModel<float>::build(model, config.seed);
  if (plan.encoders_from_teacher) copy_teacher_into_encoders(s.model, *teacher);
  s.adam_m = GradSet<float>(s.model.params());
  s.adam_v = GradSet<float>(s.model.params());
  s.rng.seed(config.seed ^ 0x9e3779b97f4a7c15ULL);
  return s;
}

std::array<ImageBatch<float>, 2> next_batches(TrainState& state, const ImageBatch<float>& corpus1,
                                              const ImageBatch<float>& corpus2, int batch_size) {
  std::array<const ImageBatch<float>*, 2> corpora{&corpus1, &corpus2};
  std::array<ImageBatch<float>, 2> out;
  for (int d = 0; d < 2; ++d) {
    const auto n = static_cast<std::uint32_t>(corpora[d]->n);
    if (n == 0) throw DataError(std::string("corpus for domain ") + (d == 0 ? "d1" : "d2") + " is empty");
    auto& order = state.sampler.order[d];
    auto& cursor = state.sampler.cursor[d];
    if (order.size() != n) {
      order.resize(n);
      std::iota(order.begin(), order.end(), 0u);
      reshuffle(order, state.rng);
      cursor = 0;
    }
    std::vector<std::size_t> idx(static_cast<std::size_t>(batch_size));
    for (auto& i : idx) {
      if (cursor == n) {
        reshuffle(order, state.rng);
        cursor = 0;
      }
      i = order[cursor++];
    }
    out[d] = gather_batch(*corpora[d], idx);
  }
  return out;
}

void check_finite(const LossReport& r) {
  const std::pair<const char*, double> terms[] = {{"rec_1", r.rec_1},   {"rec_2", r.rec_2},       {"dann", r.dann},
                                                  {"sem_1to2", r.sem_1to2}, {"sem_2to1", r.sem_2to1},
                                                  {"gan_gen", r.gan_gen}, {"gan_disc", r.gan_disc}, {"teach", r.teach},
                                                  {"tv", r.tv},         {"total", r.total}};
  for (const auto& [name, v] : terms)
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite loss term '") + name + "'; training aborted");
}

LossReport generator_step(TrainState& state, const ImageBatch<float>& b1, const ImageBatch<float>& b2,
                          const TrainConfig& config, const TeacherNet<float>* teacher) {
  const ModePlan plan = resolve_mode(config);
  GeneratorPass<float> pass(state.model, teacher, b1, b2, plan.weights, config.loss);
  const LossReport report = pass.report();
  check_finite(report);
  GradSet<float> grads(state.model.params());
  GroupMask mask = generator_groups();
  if (plan.encoders_frozen) {
    mask = without_encoders(mask);
    pass.backward(grads, mask);
  } else if (plan.encoders_sem_only) {
    pass.backward(grads, without_encoders(mask), TermMask::all().without(Term::Sem));
    pass.backward(grads, mask, TermMask::only(Term::Sem));
  } else {
    pass.backward(grads, mask);
  }
  adam_step(state.model.params(), grads, state.adam_m, state.adam_v, state.step + 1, config.adam(), mask);
  return report;
}

double discriminator_step(TrainState& state, const ImageBatch<float>& b1, const ImageBatch<float>& b2,
                          const TrainConfig& config) {
  const ModePlan plan = resolve_mode(config);
  if (plan.weights.w_gan == 0.0) return 0.0;
  GradSet<float> grads(state.model.params());
  const double loss = discriminator_gradients(state.model, b1, b2, plan.weights, grads);
  if (!std::isfinite(loss)) throw NumericError("non-finite loss term 'gan_disc'; training aborted");
  GroupMask mask = GroupMask::of({ParamGroup::Discriminator});
  if (plan.weights.gan_2to1_enabled) mask = mask.with(ParamGroup::Discriminator2to1);
  adam_step(state.model.params(), grads, state.adam_m, state.adam_v, state.step + 1, config.adam(), mask);
  return loss;
}

void continue_training(TrainState& state, const TrainConfig& config, const ImageBatch<float>& corpus1,
                       const ImageBatch<float>& corpus2, const TeacherNet<float>* teacher, const TrainSinks& sinks) {
  config.validate();
  if (corpus1.n == 0 || corpus2.n == 0) throw DataError("training corpora must be non-empty");
  const auto t0 = std::chrono::steady_clock::now();
  while (state.step < config.total_steps) {
    auto batches = next_batches(state, corpus1, corpus2, config.batch_size);
    const LossReport report = generator_step(state, batches[0], batches[1], config, teacher);
    const double disc = discriminator_step(state, batches[0], batches[1], config);
    ++state.step;
    if (sinks.metrics && config.metrics_every > 0 && state.step % config.metrics_every == 0) {
      const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      sinks.metrics(MetricRecord{state.step, report, disc, wall});
    }
    if (sinks.checkpoint && config.checkpoint_every > 0 && state.step % config.checkpoint_every == 0)
      sinks.checkpoint(state);
  }
}

TrainState train(const ModelConfig& model, const TrainConfig& config, const ImageBatch<float>& corpus1,
                 const ImageBatch<float>& corpus2, const TeacherNet<float>* teacher, const TrainSinks& sinks) {
  TrainState state = TrainState::initialize(model, config, teacher);
  continue_training(state, config, corpus1, corpus2, teacher, sinks);
  return state;
}

}  // namespace xgan
