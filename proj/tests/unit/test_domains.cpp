#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "xgan/domains.hpp"
#include "xgan/errors.hpp"

using namespace xgan;
namespace fs = std::filesystem;

namespace {

AttributeSchema one_attribute(std::vector<std::string> options, std::vector<std::string> forbidden = {}) {
  AttributeSchema s = AttributeSchema::default_schema();
  s.attributes = {{"hair_color", AttributeKind::Color, std::move(options), std::move(forbidden),
                   {"hair_back", "hair_front", "eyebrows"}}};
  s.rules.clear();
  return s;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("xgan_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

double mean_abs_diff(const ImageBatch<float>& a, const ImageBatch<float>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.data[i] - b.data[i]);
  return s / static_cast<double>(a.size());
}

}  // namespace

TEST(Schema, DefaultIsValidWithEightLayers) {
  const auto s = AttributeSchema::default_schema();
  EXPECT_NO_THROW(s.validate());
  const std::vector<std::string> layers{"hair_back", "face",     "hair_front",  "eyes",
                                        "eyebrows",  "mouth",    "facial_hair", "glasses"};
  EXPECT_EQ(s.layers, layers);
  EXPECT_EQ(s.attributes.size(), 6u);
  for (int c : s.option_counts()) EXPECT_GE(c, 2);
}

TEST(Schema, StructuralErrors) {
  auto s = AttributeSchema::default_schema();
  s.attributes[0].options = {"only"};
  EXPECT_THROW(s.validate(), SchemaError);
  s = AttributeSchema::default_schema();
  s.attributes[0].layers = {"tail"};
  EXPECT_THROW(s.validate(), SchemaError);
  s = AttributeSchema::default_schema();
  s.rules.push_back({"hair_front", "nonexistent"});
  EXPECT_THROW(s.validate(), SchemaError);
  s = AttributeSchema::default_schema();
  s.attributes.clear();
  EXPECT_THROW(s.validate(), SchemaError);
}

TEST(Schema, JsonRoundTrip) {
  auto s = AttributeSchema::default_schema();
  s.forbidden_combinations.push_back({{{"hair_style", "bald"}, {"glasses", "glasses"}}});
  const auto back = schema_from_json(to_json(s));
  EXPECT_EQ(to_json(back), to_json(s));
}

TEST(SampleAttributes, UniformFrequencies) {
  const auto s = one_attribute({"black", "brown", "blond"});
  std::mt19937_64 rng(11);
  std::vector<int> counts(3, 0);
  const int n = 30000;
  for (int i = 0; i < n; ++i) ++counts[sample_attributes(s, rng)[0]];
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / n, 1.0 / 3.0, 0.01);
}

TEST(SampleAttributes, DegenerateBiasAlwaysFirst) {
  const auto s = one_attribute({"black", "brown", "blond"});
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_attributes(s, rng, {{"hair_color", {1, 0, 0}}})[0], 0);
}

TEST(SampleAttributes, SameSeedSameSequence) {
  const auto s = AttributeSchema::default_schema();
  std::mt19937_64 a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_attributes(s, a), sample_attributes(s, b));
}

TEST(SampleAttributes, MalformedBias) {
  const auto s = AttributeSchema::default_schema();
  std::mt19937_64 rng(1);
  EXPECT_THROW(sample_attributes(s, rng, {{"hair_color", {1, 1}}}), ConfigError);
  EXPECT_THROW(sample_attributes(s, rng, {{"hair_color", {0, 0, 0, 0, 0, 0}}}), ConfigError);
  EXPECT_THROW(sample_attributes(s, rng, {{"hair_color", {1, -1, 1, 1, 1, 1}}}), ConfigError);
  EXPECT_THROW(sample_attributes(s, rng, {{"tail", {1, 1}}}), ConfigError);
}

TEST(PlausibilityFilter, ForbiddenOptionRejected) {
  const auto s = AttributeSchema::default_schema();
  AttributeVector a(s.attributes.size(), 0);
  EXPECT_TRUE(plausibility_filter(s, a));
  a[static_cast<std::size_t>(s.attribute_index("hair_color"))] = 4;  // green
  EXPECT_FALSE(plausibility_filter(s, a));
}

TEST(PlausibilityFilter, ForbiddenCombination) {
  auto s = AttributeSchema::default_schema();
  s.forbidden_combinations.push_back({{{"hair_style", "bald"}, {"glasses", "glasses"}}});
  AttributeVector a(s.attributes.size(), 0);
  a[static_cast<std::size_t>(s.attribute_index("glasses"))] = 1;
  EXPECT_FALSE(plausibility_filter(s, a));
  a[static_cast<std::size_t>(s.attribute_index("hair_style"))] = 1;
  EXPECT_TRUE(plausibility_filter(s, a));
}

TEST(PlausibilityFilter, RejectionRenormalizesOverAllowed) {
  const auto s = one_attribute({"black", "brown", "green", "pink"}, {"green", "pink"});
  CorpusSpec spec;
  spec.n_samples = 20000;
  spec.image_size = 16;
  spec.seed = 3;
  const auto corpus = build_corpus(s, spec);
  std::vector<int> counts(4, 0);
  for (const auto& l : corpus.labels) ++counts[l[0]];
  EXPECT_EQ(counts[2] + counts[3], 0);
  EXPECT_NEAR(counts[0] / 20000.0, 0.5, 0.01);
  EXPECT_NEAR(counts[1] / 20000.0, 0.5, 0.01);
}

TEST(BuildCorpus, FilterSoundness) {
  const auto s = AttributeSchema::default_schema();
  CorpusSpec spec;
  spec.n_samples = 10000;
  spec.image_size = 16;
  spec.seed = 9;
  const auto corpus = build_corpus(s, spec);
  ASSERT_EQ(corpus.labels.size(), 10000u);
  EXPECT_EQ(corpus.images.n, 10000);
  for (const auto& l : corpus.labels) ASSERT_TRUE(plausibility_filter(s, l));
}

TEST(BuildCorpus, DegenerateSchemaAborts) {
  auto s = one_attribute({"black", "brown"});
  s.forbidden_combinations.push_back({{{"hair_color", "black"}}});
  CorpusSpec spec;
  spec.n_samples = 10;
  spec.image_size = 16;
  spec.bias = {{"hair_color", {1000, 1}}};
  EXPECT_THROW(build_corpus(s, spec), SchemaError);
}

TEST(BuildCorpus, SizeBounds) {
  const auto s = AttributeSchema::default_schema();
  CorpusSpec spec;
  spec.n_samples = 0;
  EXPECT_THROW(build_corpus(s, spec), ConfigError);
  spec.n_samples = 1;
  spec.image_size = 16;
  const auto c = build_corpus(s, spec);
  EXPECT_EQ(c.images.n, 1);
  EXPECT_EQ(c.labels.size(), 1u);
}

TEST(BuildCorpus, MatchesSequentialRender) {
  const auto s = AttributeSchema::default_schema();
  CorpusSpec spec;
  spec.n_samples = 20;
  spec.image_size = 24;
  spec.seed = 4;
  const auto c = build_corpus(s, spec);
  for (int i = 0; i < c.images.n; ++i) {
    const auto img = render(s, c.labels[static_cast<std::size_t>(i)], spec.style, spec.image_size);
    ASSERT_TRUE(std::equal(img.data.begin(), img.data.end(), c.images.sample(i).begin()));
  }
}

TEST(BuildCorpus, StylesArePixelDistinct) {
  const auto s = AttributeSchema::default_schema();
  CorpusSpec a, b;
  a.n_samples = b.n_samples = 200;
  a.seed = b.seed = 17;
  b.style = StyleId::StyleB;
  const auto ca = build_corpus(s, a), cb = build_corpus(s, b);
  ASSERT_EQ(ca.labels, cb.labels);
  EXPECT_GT(mean_abs_diff(ca.images, cb.images), 0.1);
}

TEST(Split, EightyTwenty) {
  const auto sp = split_train_test(100);
  EXPECT_EQ(sp.train.size(), 80u);
  EXPECT_EQ(sp.test.size(), 20u);
  EXPECT_EQ(sp.test.front(), 80u);
  const auto one = split_train_test(1);
  EXPECT_EQ(one.train.size(), 1u);
  EXPECT_TRUE(one.test.empty());
}

TEST(Render, DeterministicAndBounded) {
  const auto s = AttributeSchema::default_schema();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto a = sample_attributes(s, rng);
    for (auto st : {StyleId::StyleA, StyleId::StyleB}) {
      const auto x = render(s, a, st, 32), y = render(s, a, st, 32);
      ASSERT_EQ(x.data, y.data);
      EXPECT_EQ(x.n, 1);
      EXPECT_EQ(x.c, 3);
      for (float v : x.data) ASSERT_TRUE(v >= -1.0f && v <= 1.0f);
    }
  }
}

TEST(Render, TooSmallRejected) {
  const auto s = AttributeSchema::default_schema();
  EXPECT_THROW(render(s, AttributeVector(s.attributes.size(), 0), StyleId::StyleA, 8), ConfigError);
}

TEST(Render, UpperLayerWinsWhereBothOpaque) {
  Sprite lower{"lower", 2, std::vector<float>(12, 0.0f), std::vector<float>(4, 1.0f)};
  Sprite upper{"upper", 2, std::vector<float>(12, 1.0f), std::vector<float>(4, 0.0f)};
  upper.alpha[0] = 1.0f;
  const auto img = composite({lower, upper});
  EXPECT_FLOAT_EQ(img.at(0, 0, 0, 0), 1.0f);
  EXPECT_FLOAT_EQ(img.at(0, 0, 0, 1), -1.0f);
  const auto swapped = composite({upper, lower});
  EXPECT_FLOAT_EQ(swapped.at(0, 0, 0, 0), -1.0f);
}

TEST(Render, RenderedLayersComposeInSchemaOrder) {
  const auto s = AttributeSchema::default_schema();
  AttributeVector a(s.attributes.size(), 0);
  const auto sprites = render_layers(s, a, StyleId::StyleA, 32);
  ASSERT_EQ(sprites.size(), s.layers.size());
  const int face = 1, eyes = 3;
  EXPECT_EQ(sprites[face].layer, "face");
  const auto img = composite(sprites);
  int checked = 0;
  for (int p = 0; p < 32 * 32; ++p) {
    if (sprites[face].alpha[p] < 1.0f || sprites[eyes].alpha[p] < 1.0f) continue;
    bool above = false;
    for (std::size_t l = eyes + 1; l < sprites.size(); ++l) above = above || sprites[l].alpha[p] > 0.0f;
    if (above) continue;
    for (int k = 0; k < 3; ++k)
      EXPECT_FLOAT_EQ(img.at(0, k, p / 32, p % 32), 2.0f * sprites[eyes].rgb[3 * p + k] - 1.0f);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(Render, ChangingOneAttributeOnlyTouchesItsLayers) {
  const auto s = AttributeSchema::default_schema();
  std::mt19937_64 rng(8);
  const int S = 32;
  int trials = 0;
  for (int t = 0; t < 60; ++t) {
    const auto a = sample_attributes(s, rng);
    for (std::size_t k = 0; k < s.attributes.size(); ++k) {
      auto b = a;
      b[k] = (a[k] + 1) % static_cast<int>(s.attributes[k].options.size());
      for (auto st : {StyleId::StyleA, StyleId::StyleB}) {
        const auto ia = render(s, a, st, S), ib = render(s, b, st, S);
        std::vector<PixelRect> allowed;
        for (const auto& layer : s.affected_layers(s.attributes[k].name)) {
          allowed.push_back(layer_bounds(s, a, layer, S));
          allowed.push_back(layer_bounds(s, b, layer, S));
        }
        for (int y = 0; y < S; ++y)
          for (int x = 0; x < S; ++x) {
            bool diff = false;
            for (int c = 0; c < 3; ++c) diff = diff || ia.at(0, c, y, x) != ib.at(0, c, y, x);
            if (!diff) continue;
            bool inside = false;
            for (const auto& r : allowed) inside = inside || r.contains(x, y);
            ASSERT_TRUE(inside) << s.attributes[k].name << " changed pixel (" << x << "," << y << ")";
          }
        ++trials;
      }
    }
  }
  EXPECT_EQ(trials, 60 * 6 * 2);
}

TEST(Render, UnresolvableInteractionRule) {
  auto s = AttributeSchema::default_schema();
  s.rules = {{"hair_front", "hair_color"}};
  AttributeVector a(s.attributes.size(), 0);
  a[static_cast<std::size_t>(s.attribute_index("hair_style"))] = 1;
  a[static_cast<std::size_t>(s.attribute_index("hair_color"))] = 3;
  EXPECT_THROW(render(s, a, StyleId::StyleA, 32), SchemaError);
}

TEST(Render, FaceShapeSelectsHairFrontVariant) {
  const auto s = AttributeSchema::default_schema();
  AttributeVector a(s.attributes.size(), 0);
  a[static_cast<std::size_t>(s.attribute_index("hair_style"))] = 1;
  auto b = a;
  b[static_cast<std::size_t>(s.attribute_index("face_shape"))] = 1;
  const auto la = render_layers(s, a, StyleId::StyleA, 32), lb = render_layers(s, b, StyleId::StyleA, 32);
  EXPECT_NE(la[2].alpha, lb[2].alpha);
}

TEST(ImageIo, PngRoundTrip) {
  const auto dir = scratch_dir("png");
  std::vector<std::uint8_t> rgb(3 * 5 * 4);
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = static_cast<std::uint8_t>(i * 7);
  write_png((dir / "a.png").string(), rgb, 5, 4);
  int w = 0, h = 0;
  EXPECT_EQ(read_png((dir / "a.png").string(), w, h), rgb);
  EXPECT_EQ(w, 5);
  EXPECT_EQ(h, 4);
  fs::remove_all(dir);
}

TEST(ImageIo, EmptyDirectoryIsError) {
  const auto dir = scratch_dir("empty");
  EXPECT_THROW(load_image_dir(dir.string(), 64), DataError);
  fs::remove_all(dir);
}

TEST(ImageIo, ResizeAndAffineMap) {
  const auto dir = scratch_dir("resize");
  std::vector<std::uint8_t> rgb(3 * 128 * 128);
  for (int y = 0; y < 128; ++y)
    for (int x = 0; x < 128; ++x)
      for (int k = 0; k < 3; ++k) rgb[(y * 128 + x) * 3 + k] = x < 64 ? 255 : 0;
  write_png((dir / "img.png").string(), rgb, 128, 128);
  const auto loaded = load_image_dir(dir.string(), 64);
  ASSERT_EQ(loaded.images.n, 1);
  EXPECT_EQ(loaded.images.c, 3);
  EXPECT_EQ(loaded.images.h, 64);
  EXPECT_EQ(loaded.images.w, 64);
  EXPECT_FLOAT_EQ(loaded.images.at(0, 0, 10, 0), 1.0f);
  EXPECT_FLOAT_EQ(loaded.images.at(0, 2, 10, 63), -1.0f);
  for (float v : loaded.images.data) ASSERT_TRUE(v >= -1.0f && v <= 1.0f);
  fs::remove_all(dir);
}

TEST(ImageIo, AreaResizeAveragesFootprint) {
  // 4x4 checker -> 2x2 blocks of average 127.5 -> 0.
  std::vector<std::uint8_t> rgb(3 * 16);
  for (int i = 0; i < 16; ++i)
    for (int k = 0; k < 3; ++k) rgb[i * 3 + k] = ((i / 4 + i % 4) % 2) ? 255 : 0;
  const auto img = from_rgb8(rgb, 4, 4, 2);
  for (float v : img.data) EXPECT_NEAR(v, 0.0f, 1e-6);
}

TEST(ImageIo, UnreadableFilesReportedAndSkipped) {
  const auto dir = scratch_dir("bad");
  std::vector<std::uint8_t> rgb(3 * 16 * 16, 200);
  write_png((dir / "b_good.png").string(), rgb, 16, 16);
  write_png((dir / "a_good.png").string(), rgb, 16, 16);
  std::ofstream(dir / "c_bad.png") << "definitely not a png";
  const auto loaded = load_image_dir(dir.string(), 16);
  EXPECT_EQ(loaded.images.n, 2);
  EXPECT_EQ(loaded.files, (std::vector<std::string>{"a_good.png", "b_good.png"}));
  ASSERT_EQ(loaded.errors.size(), 1u);
  EXPECT_NE(loaded.errors[0].find("c_bad.png"), std::string::npos);
  fs::remove_all(dir);
}

TEST(ImageIo, ExportAndReloadCorpus) {
  const auto dir = scratch_dir("export");
  const auto s = AttributeSchema::default_schema();
  CorpusSpec spec;
  spec.n_samples = 10;
  spec.seed = 6;
  const auto c = build_corpus(s, spec);
  export_corpus(c, s, dir.string());
  const auto train = load_corpus(dir.string(), "train", 32);
  const auto test = load_corpus(dir.string(), "test", 32);
  EXPECT_EQ(train.labels.size(), 8u);
  EXPECT_EQ(test.labels.size(), 2u);
  EXPECT_EQ(test.labels[1], c.labels[9]);
  // 8-bit quantization bounds the round-trip error.
  for (std::size_t i = 0; i < test.images.sample_size(); ++i)
    ASSERT_NEAR(test.images.sample(1)[i], c.images.sample(9)[i], 1.0 / 127.5 + 1e-6);
  EXPECT_EQ(to_json(load_schema((dir / "schema.json").string())), to_json(s));
  fs::remove_all(dir);
}
