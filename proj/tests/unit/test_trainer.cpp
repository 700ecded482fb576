#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "../support/micro.hpp"
#include "xgan/checkpoint.hpp"
#include "xgan/config.hpp"
#include "xgan/errors.hpp"
#include "xgan/trainer.hpp"

using namespace xgan;
using xgan::testing::micro_config;
using xgan::testing::random_tensor;
namespace fs = std::filesystem;

namespace {

TeacherNet<float> micro_teacher(std::uint64_t seed = 5) {
  auto tc = TeacherConfig::matching(micro_config());
  TeacherNet<float> t(build_attribute_net<float>({tc.trunk, {3, 2}}, seed), {});
  t.freeze();
  return t;
}

TrainConfig micro_train(TrainMode mode = TrainMode::FullXgan) {
  TrainConfig c;
  c.batch_size = 4;
  c.total_steps = 20;
  c.seed = 3;
  c.metrics_every = 1;
  c.learning_rate = 1e-3;
  c.mode = mode;
  c.weights.teach_enabled = true;
  return c;
}

struct Corpora {
  ImageBatch<float> d1 = random_tensor<float>(24, 2, 8, 8, 100);
  ImageBatch<float> d2 = random_tensor<float>(20, 2, 8, 8, 200);
};

bool group_equal(const ParamSet<float>& a, const ParamSet<float>& b, std::function<bool(ParamGroup)> pick) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (pick(a[i].group) && a[i].value.data != b[i].value.data) return false;
  return true;
}

bool is_disc(ParamGroup g) { return g == ParamGroup::Discriminator || g == ParamGroup::Discriminator2to1; }
bool is_enc(ParamGroup g) {
  return g == ParamGroup::EncPrivate1 || g == ParamGroup::EncPrivate2 || g == ParamGroup::EncShared;
}

std::vector<std::string> metric_stream(const TrainConfig& cfg, const Corpora& c, const TeacherNet<float>* t) {
  std::vector<std::string> out;
  TrainSinks sinks;
  sinks.metrics = [&](const MetricRecord& r) { out.push_back(to_json(r.report).dump() + std::to_string(r.disc_loss)); };
  train(micro_config(), cfg, c.d1, c.d2, t, sinks);
  return out;
}

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / ("xgan_test_" + std::to_string(::getpid()) + "_" + name)).string();
}

}  // namespace

TEST(Modes, PresetsResolveWeights) {
  TrainConfig c = micro_train(TrainMode::RecDannOnly);
  auto p = resolve_mode(c);
  EXPECT_EQ(p.weights.w_sem, 0.0);
  EXPECT_EQ(p.weights.w_gan, 0.0);
  EXPECT_EQ(p.weights.w_teach, 0.0);
  EXPECT_FALSE(p.weights.teach_enabled);
  EXPECT_EQ(p.weights.w_dann, c.weights.w_dann);
  c.mode = TrainMode::HighDann;
  EXPECT_DOUBLE_EQ(resolve_mode(c).weights.w_dann, 10 * c.weights.w_dann);
  EXPECT_EQ(resolve_mode(c).weights.w_sem, c.weights.w_sem);
  EXPECT_EQ(resolve_mode(c).weights.w_gan, c.weights.w_gan);
  c.mode = TrainMode::NoSem;
  EXPECT_EQ(resolve_mode(c).weights.w_sem, 0.0);
  c.mode = TrainMode::NoGan;
  EXPECT_EQ(resolve_mode(c).weights.w_gan, 0.0);
  c.mode = TrainMode::NoTeacher;
  EXPECT_FALSE(resolve_mode(c).weights.teach_enabled);
  c.mode = TrainMode::DtnFrozenEncoder;
  p = resolve_mode(c);
  EXPECT_TRUE(p.encoders_frozen && p.needs_teacher && p.encoders_from_teacher);
  EXPECT_EQ(p.weights.w_dann, 0.0);
  for (auto m : all_train_modes()) EXPECT_EQ(parse_train_mode(to_string(m)), m);
  try {
    parse_train_mode("bogus");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rec_dann_only"), std::string::npos);
  }
}

TEST(GeneratorStep, RecDannOnlyLeavesDiscAndTeacherUntouched) {
  Corpora c;
  auto teacher = micro_teacher();
  const auto teacher_before = teacher.params();
  TrainConfig cfg = micro_train(TrainMode::RecDannOnly);
  auto s = TrainState::initialize(micro_config(), cfg, &teacher);
  const auto before = s.model.params();
  auto b = next_batches(s, c.d1, c.d2, 4);
  generator_step(s, b[0], b[1], cfg, &teacher);
  EXPECT_TRUE(group_equal(before, s.model.params(), is_disc));
  EXPECT_FALSE(group_equal(before, s.model.params(), is_enc));
  for (std::size_t i = 0; i < teacher.params().size(); ++i)
    EXPECT_EQ(teacher.params()[i].value.data, teacher_before[i].value.data);
}

TEST(GeneratorStep, ZeroLearningRateKeepsParams) {
  Corpora c;
  auto teacher = micro_teacher();
  TrainConfig cfg = micro_train();
  cfg.learning_rate = 0.0;
  auto s = TrainState::initialize(micro_config(), cfg, &teacher);
  const auto before = s.model.params();
  auto b = next_batches(s, c.d1, c.d2, 4);
  const LossReport r = generator_step(s, b[0], b[1], cfg, &teacher);
  EXPECT_TRUE(group_equal(before, s.model.params(), [](ParamGroup) { return true; }));
  EXPECT_GT(r.rec_1, 0.0);
  EXPECT_TRUE(std::isfinite(r.total));
}

TEST(GeneratorStep, MatchesIndependentAdamOnOracleGradients) {
  Corpora c;
  auto teacher = micro_teacher();
  TrainConfig cfg = micro_train();
  cfg.learning_rate = 1e-1;
  auto s = TrainState::initialize(micro_config(), cfg, &teacher);
  std::vector<std::vector<double>> m, v;
  for (const auto& p : s.model.params()) {
    m.emplace_back(p.value.size(), 0.0);
    v.emplace_back(p.value.size(), 0.0);
  }
  const GroupMask gen = GroupMask::all().without(ParamGroup::Discriminator).without(ParamGroup::Discriminator2to1);
  for (int t = 1; t <= 3; ++t) {
    auto b = next_batches(s, c.d1, c.d2, 4);
    GradSet<float> g(s.model.params());
    GeneratorPass<float>(s.model, &teacher, b[0], b[1], resolve_mode(cfg).weights, cfg.loss).backward(g, gen);
    const auto before = s.model.params();
    generator_step(s, b[0], b[1], cfg, &teacher);
    std::size_t checked = 0;
    for (std::size_t i = 0; i < before.size(); ++i) {
      const bool active = gen.contains(before[i].group);
      for (std::size_t k = 0; k < before[i].value.size(); ++k) {
        const double gk = g[i].data[k];
        double expected = 0.0;
        if (active) {
          m[i][k] = 0.5 * m[i][k] + 0.5 * gk;
          v[i][k] = 0.999 * v[i][k] + 0.001 * gk * gk;
          const double mh = m[i][k] / (1 - std::pow(0.5, t));
          const double vh = v[i][k] / (1 - std::pow(0.999, t));
          expected = -1e-1 * mh / (std::sqrt(vh) + 1e-8);
        }
        const double got = static_cast<double>(s.model.params()[i].value.data[k]) - before[i].value.data[k];
        if (std::abs(expected) < 1e-3) {
          EXPECT_NEAR(got, expected, 2e-7);
          continue;
        }
        ++checked;
        // Later steps see float32 moment storage, so only the first is held to 1e-6.
        const double tol = t == 1 ? 1e-6 : 1e-4;
        ASSERT_LT(std::abs(got - expected) / std::abs(expected), tol) << before[i].name << "[" << k << "] t=" << t;
      }
    }
    EXPECT_GT(checked, 500u);
    ++s.step;
  }
}

TEST(GeneratorStep, NonFiniteLossNamesTerm) {
  Corpora c;
  TrainConfig cfg = micro_train(TrainMode::NoTeacher);
  auto s = TrainState::initialize(micro_config(), cfg);
  auto& P = s.model.params();
  P[*P.find("dec_private.d1.deconv3.bias")].value.data[0] = NAN;
  auto b = next_batches(s, c.d1, c.d2, 4);
  try {
    generator_step(s, b[0], b[1], cfg);
    FAIL();
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("rec_1"), std::string::npos) << e.what();
  }
}

TEST(DiscriminatorStep, NoGanIsNoOp) {
  Corpora c;
  TrainConfig cfg = micro_train(TrainMode::NoGan);
  cfg.weights.teach_enabled = false;
  auto s = TrainState::initialize(micro_config(), cfg);
  const auto before = s.model.params();
  auto b = next_batches(s, c.d1, c.d2, 4);
  EXPECT_EQ(discriminator_step(s, b[0], b[1], cfg), 0.0);
  EXPECT_TRUE(group_equal(before, s.model.params(), [](ParamGroup) { return true; }));
  for (auto& mm : s.adam_m.grads)
    for (float x : mm.data) ASSERT_EQ(x, 0.0f);
}

TEST(DiscriminatorStep, IsolatedAndFitsFrozenGenerator) {
  Corpora c;
  TrainConfig cfg = micro_train(TrainMode::NoTeacher);
  cfg.learning_rate = 2e-3;
  auto s = TrainState::initialize(micro_config(), cfg);
  // Real D2 images are bright, generator output is near zero: separable.
  ImageBatch<float> real = random_tensor<float>(8, 2, 8, 8, 5, 0.5, 1.0);
  ImageBatch<float> src = random_tensor<float>(8, 2, 8, 8, 6);
  const auto before = s.model.params();
  double first = 0, last = 0;
  for (int i = 0; i < 50; ++i) {
    const double l = discriminator_step(s, src, real, cfg);
    if (i == 0) first = l;
    last = l;
    ++s.step;
  }
  EXPECT_TRUE(group_equal(before, s.model.params(), [](ParamGroup g) { return !is_disc(g); }));
  EXPECT_FALSE(group_equal(before, s.model.params(), is_disc));
  EXPECT_LT(last, first * 0.5) << first << " -> " << last;
}

TEST(Train, PhaseIsolationEveryStep) {
  Corpora c;
  auto teacher = micro_teacher();
  TrainConfig cfg = micro_train();
  auto s = TrainState::initialize(micro_config(), cfg, &teacher);
  for (int i = 0; i < 15; ++i) {
    auto b = next_batches(s, c.d1, c.d2, 4);
    auto p0 = s.model.params();
    generator_step(s, b[0], b[1], cfg, &teacher);
    ASSERT_TRUE(group_equal(p0, s.model.params(), is_disc));
    auto p1 = s.model.params();
    discriminator_step(s, b[0], b[1], cfg);
    ASSERT_TRUE(group_equal(p1, s.model.params(), [](ParamGroup g) { return !is_disc(g); }));
    ++s.step;
  }
}

TEST(Train, DeterministicMetricStreams) {
  Corpora c;
  auto teacher = micro_teacher();
  TrainConfig cfg = micro_train();
  cfg.total_steps = 200;
  const auto a = metric_stream(cfg, c, &teacher);
  const auto b = metric_stream(cfg, c, &teacher);
  ASSERT_EQ(a.size(), 200u);
  EXPECT_EQ(a, b);
  cfg.seed = 4;
  cfg.total_steps = 5;
  EXPECT_NE(metric_stream(cfg, c, &teacher)[0], a[0]);
}

TEST(Train, ZeroStepsReturnsInitialState) {
  Corpora c;
  TrainConfig cfg = micro_train(TrainMode::NoTeacher);
  cfg.total_steps = 0;
  int records = 0;
  TrainSinks sinks;
  sinks.metrics = [&](const MetricRecord&) { ++records; };
  auto s = train(micro_config(), cfg, c.d1, c.d2, nullptr, sinks);
  EXPECT_EQ(records, 0);
  EXPECT_EQ(s.step, 0);
  auto fresh = XganModel<float>::build(micro_config(), cfg.seed);
  EXPECT_TRUE(group_equal(fresh.params(), s.model.params(), [](ParamGroup) { return true; }));
}

TEST(Train, EmptyCorpusAndMissingTeacher) {
  Corpora c;
  TrainConfig cfg = micro_train(TrainMode::NoTeacher);
  EXPECT_THROW(train(micro_config(), cfg, ImageBatch<float>(0, 2, 8, 8), c.d2), DataError);
  cfg.mode = TrainMode::FullXgan;
  EXPECT_THROW(train(micro_config(), cfg, c.d1, c.d2), ConfigError);
  cfg.mode = TrainMode::DtnFrozenEncoder;
  EXPECT_THROW(train(micro_config(), cfg, c.d1, c.d2), ConfigError);
}

TEST(Train, SharedParametersStaySingleInstance) {
  Corpora c;
  auto teacher = micro_teacher();
  TrainConfig cfg = micro_train();
  cfg.total_steps = 100;
  auto s = train(micro_config(), cfg, c.d1, c.d2, &teacher);
  const auto e1 = s.model.encoder_param_indices(DomainId::D1), e2 = s.model.encoder_param_indices(DomainId::D2);
  EXPECT_TRUE(std::equal(e1.end() - 6, e1.end(), e2.end() - 6));
  EXPECT_EQ(s.model.params().scalar_count(), micro_config().parameter_count());
  // Zeroing the private blocks makes both paths agree exactly, which only holds
  // if the shared tail is the same storage.
  auto m = s.model;
  for (auto& p : m.params())
    if (p.group == ParamGroup::EncPrivate1 || p.group == ParamGroup::EncPrivate2) p.value.zero();
  EXPECT_EQ(encode(m, c.d1, DomainId::D1).data, encode(m, c.d1, DomainId::D2).data);
}

TEST(Train, DtnFrozenEncodersAliasTeacher) {
  Corpora c;
  auto teacher = micro_teacher(9);
  TrainConfig cfg = micro_train(TrainMode::DtnFrozenEncoder);
  cfg.total_steps = 10;
  auto s = train(micro_config(), cfg, c.d1, c.d2, &teacher);
  for (DomainId d : {DomainId::D1, DomainId::D2}) {
    EXPECT_EQ(encode(s.model, c.d1, d).data, teacher_embed(teacher, c.d1).data);
  }
  auto init = TrainState::initialize(micro_config(), cfg, &teacher);
  EXPECT_TRUE(group_equal(init.model.params(), s.model.params(), is_enc));
  EXPECT_FALSE(group_equal(init.model.params(), s.model.params(), [](ParamGroup g) { return g == ParamGroup::DecShared; }));
}

TEST(Train, DtnFinetunedEncodersMoveOnlyThroughSem) {
  Corpora c;
  auto teacher = micro_teacher(9);
  TrainConfig cfg = micro_train(TrainMode::DtnFinetunedEncoder);
  cfg.total_steps = 5;
  auto init = TrainState::initialize(micro_config(), cfg, &teacher);
  auto moved = train(micro_config(), cfg, c.d1, c.d2, &teacher);
  EXPECT_FALSE(group_equal(init.model.params(), moved.model.params(), is_enc));
  cfg.weights.w_sem = 0.0;
  auto still = train(micro_config(), cfg, c.d1, c.d2, &teacher);
  EXPECT_TRUE(group_equal(init.model.params(), still.model.params(), is_enc));
  EXPECT_FALSE(group_equal(init.model.params(), still.model.params(), [](ParamGroup g) { return g == ParamGroup::DecShared; }));
}

TEST(Checkpoint, ResumeEqualsUninterrupted) {
  Corpora c;
  auto teacher = micro_teacher();
  TrainConfig cfg = micro_train();
  cfg.total_steps = 12;
  auto full = train(micro_config(), cfg, c.d1, c.d2, &teacher);

  TrainConfig half = cfg;
  half.total_steps = 7;
  auto part = train(micro_config(), half, c.d1, c.d2, &teacher);
  const auto path = temp_path("resume.ckpt");
  save_checkpoint(part, half, path);
  auto loaded = load_checkpoint(path, micro_config());
  EXPECT_EQ(loaded.state.step, 7);
  EXPECT_EQ(loaded.train, half);
  EXPECT_EQ(loaded.state.sampler, part.sampler);
  EXPECT_TRUE(loaded.state.rng == part.rng);
  for (std::size_t i = 0; i < part.model.params().size(); ++i) {
    ASSERT_EQ(loaded.state.model.params()[i].value.data, part.model.params()[i].value.data);
    ASSERT_EQ(loaded.state.adam_v[i].data, part.adam_v[i].data);
  }
  continue_training(loaded.state, cfg, c.d1, c.d2, &teacher, {});
  EXPECT_TRUE(group_equal(full.model.params(), loaded.state.model.params(), [](ParamGroup) { return true; }));
  fs::remove(path);
}

TEST(Checkpoint, SizeFormulaAndErrors) {
  TrainConfig cfg = micro_train(TrainMode::NoTeacher);
  auto s = TrainState::initialize(micro_config(), cfg);
  const auto path = temp_path("size.ckpt");
  save_checkpoint(s, cfg, path);
  const double payload = 4.0 * 3 * micro_config().parameter_count();
  const double size = static_cast<double>(fs::file_size(path));
  EXPECT_GT(size, payload);
  EXPECT_LT(size, payload + 16 * 1024);

  ModelConfig other = micro_config();
  other.embed_dim = 6;
  try {
    load_checkpoint(path, other);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("model.embed_dim"), std::string::npos) << e.what();
  }
  // Truncation and bad version.
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 10));
  }
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  bytes[8] = 7;
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  EXPECT_THROW(load_checkpoint(temp_path("missing.ckpt")), CheckpointError);
  fs::remove(path);
}

TEST(Checkpoint, TeacherRoundTripStaysFrozen) {
  auto t = micro_teacher();
  const auto path = temp_path("teacher.ckpt");
  save_teacher(t, path);
  auto back = load_teacher(path);
  EXPECT_TRUE(back.frozen());
  auto x = random_tensor<float>(2, 2, 8, 8, 1);
  EXPECT_EQ(teacher_embed(back, x).data, teacher_embed(t, x).data);
  EXPECT_THROW(load_checkpoint(path), CheckpointError);  // wrong kind
  fs::remove(path);
}

TEST(Config, RoundTripsAndStrictness) {
  TrainConfig t = micro_train(TrainMode::NoSem);
  t.loss.sem_distance = Distance::L1;
  t.loss.gan_generator_form = GanForm::Minimax;
  EXPECT_EQ(train_config_from_json(to_json(t)), t);
  EXPECT_EQ(model_config_from_json(to_json(micro_config())), micro_config());
  EXPECT_EQ(model_config_from_json(Json::object()), ModelConfig{});
  EXPECT_THROW(model_config_from_json(Json{{"image_sise", 32}}), ConfigError);
  EXPECT_THROW(model_config_from_json(Json{{"image_size", "big"}}), ConfigError);
  EXPECT_THROW(train_config_from_json(Json{{"weights", {{"w_foo", 1.0}}}}), ConfigError);
  EXPECT_THROW(train_config_from_json(Json{{"mode", "nope"}}), ConfigError);
  // Integers may stand in for reals.
  EXPECT_EQ(train_config_from_json(Json{{"learning_rate", 1}}).learning_rate, 1.0);

  Json j{{"train", to_json(TrainConfig{})}, {"model", to_json(ModelConfig{})}};
  apply_dotted_override(j, "train.weights.w_sem", "0.25");
  apply_dotted_override(j, "train.mode", "no_gan");
  apply_dotted_override(j, "model.encoder_widths", "[8,16]");
  EXPECT_EQ(j["train"]["weights"]["w_sem"], 0.25);
  EXPECT_EQ(j["train"]["mode"], "no_gan");
  EXPECT_EQ(j["model"]["encoder_widths"].size(), 2u);
  EXPECT_THROW(apply_dotted_override(j, "train.weights.w_nope", "1"), ConfigError);
}
