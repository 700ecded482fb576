#pragma once

// Procedural two-style avatar corpora with ground-truth attributes, plus
// PNG corpus export and a loader for plain image directories.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgan/tensor.hpp"

namespace xgan {

enum class AttributeKind : std::uint8_t { Categorical, Color };
enum class StyleId : std::uint8_t { StyleA, StyleB };

std::string to_string(StyleId s);
StyleId parse_style(const std::string& s);

struct AttributeDef {
  std::string name;
  AttributeKind kind = AttributeKind::Categorical;
  std::vector<std::string> options;
  std::vector<std::string> forbidden;  // option names rejected by the filter
  std::vector<std::string> layers;     // layers whose artwork depends on this attribute
};

/// Artwork of `layer` is selected by the value of `attribute`.
struct InteractionRule {
  std::string layer;
  std::string attribute;
};

/// Rejected when every (attribute, option) pair matches.
struct ForbiddenCombination {
  std::vector<std::pair<std::string, std::string>> when;
};

using AttributeVector = std::vector<int>;

struct AttributeSchema {
  std::vector<AttributeDef> attributes;
  std::vector<std::string> layers;  // back to front
  std::vector<InteractionRule> rules;
  std::vector<ForbiddenCombination> forbidden_combinations;

  /// Six attributes over the eight-layer ordering.
  static AttributeSchema default_schema();

  /// Throws SchemaError on structural problems (unknown names, < 2 options...).
  void validate() const;
  int attribute_index(const std::string& name) const;  // -1 if absent
  std::vector<int> option_counts() const;
  /// Option value of `name` in attrs, or -1 when the schema lacks it.
  int value_of(const AttributeVector& attrs, const std::string& name) const;
  /// Layers affected by an attribute: its declared layers plus rule targets.
  std::vector<std::string> affected_layers(const std::string& attribute) const;
};

nlohmann::json to_json(const AttributeSchema& s);
AttributeSchema schema_from_json(const nlohmann::json& j);
AttributeSchema load_schema(const std::string& path);

/// attribute name -> nonnegative weight per option.
using AttributeBias = std::map<std::string, std::vector<double>>;

/// Throws ConfigError on unknown attributes, wrong lengths, negative or all-zero weights.
void validate_bias(const AttributeSchema& schema, const AttributeBias& bias);

AttributeVector sample_attributes(const AttributeSchema& schema, std::mt19937_64& rng, const AttributeBias& bias = {});

bool plausibility_filter(const AttributeSchema& schema, const AttributeVector& attrs);

/// One layer's artwork at output resolution: premultiplied-free RGB in [0, 1]
/// plus coverage alpha in [0, 1], row-major.
struct Sprite {
  std::string layer;
  int size = 0;
  std::vector<float> rgb;    // 3 * size * size, interleaved
  std::vector<float> alpha;  // size * size
};

struct PixelRect {
  int x0 = 0, y0 = 0, x1 = -1, y1 = -1;  // inclusive; empty when x1 < x0
  bool empty() const { return x1 < x0 || y1 < y0; }
  bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

/// Per-layer sprites in schema Z-order.
std::vector<Sprite> render_layers(const AttributeSchema& schema, const AttributeVector& attrs, StyleId style,
                                  int image_size);
/// Back-to-front "over" compositing onto a white background; output 1 x 3 x S x S in [-1, 1].
ImageBatch<float> composite(const std::vector<Sprite>& sprites);
ImageBatch<float> render(const AttributeSchema& schema, const AttributeVector& attrs, StyleId style, int image_size);

/// Geometric bounding box of a layer's shapes (1px margin), independent of rasterization.
PixelRect layer_bounds(const AttributeSchema& schema, const AttributeVector& attrs, const std::string& layer,
                       int image_size);

struct CorpusSpec {
  int n_samples = 2000;
  StyleId style = StyleId::StyleA;
  std::uint64_t seed = 0;
  AttributeBias bias;
  int image_size = 32;

  void validate(const AttributeSchema& schema) const;
};

struct Corpus {
  ImageBatch<float> images;
  std::vector<AttributeVector> labels;
};

Corpus build_corpus(const AttributeSchema& schema, const CorpusSpec& spec);

struct Split {
  std::vector<std::size_t> train, test;
};

/// First n - floor(n/5) indices train, the remaining floor(n/5) test.
Split split_train_test(std::size_t n);

Corpus subset(const Corpus& c, const std::vector<std::size_t>& idx);

/// Writes NNNNNN.png per sample, attributes.jsonl, train.txt, test.txt and schema.json.
void export_corpus(const Corpus& corpus, const AttributeSchema& schema, const std::string& dir);

/// Reads an exported corpus; `manifest` is "train", "test" or "all".
Corpus load_corpus(const std::string& dir, const std::string& manifest, int image_size);

struct LoadedImages {
  ImageBatch<float> images;
  std::vector<std::string> files;
  std::vector<std::string> errors;  // "file: reason" for each skipped file
};

/// PNG files of a directory in filename order, area-resized to image_size and
/// mapped to [-1, 1]. Throws DataError when nothing loads.
LoadedImages load_image_dir(const std::string& dir, int image_size);

/// 8-bit RGB PNG I/O.
void write_png(const std::string& path, const std::vector<std::uint8_t>& rgb, int width, int height);
std::vector<std::uint8_t> read_png(const std::string& path, int& width, int& height);

/// [-1, 1] sample i of a batch to 8-bit interleaved RGB (channels beyond 3 ignored, fewer replicated).
std::vector<std::uint8_t> to_rgb8(const ImageBatch<float>& images, int i);
/// Area-average resize of interleaved RGB8 to size x size, mapped to [-1, 1].
ImageBatch<float> from_rgb8(const std::vector<std::uint8_t>& rgb, int width, int height, int size);

}  // namespace xgan
