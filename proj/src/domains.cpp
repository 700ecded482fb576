#include "xgan/domains.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>

#include "xgan/errors.hpp"

namespace xgan {

using nlohmann::json;

namespace {

using Color = std::array<float, 3>;

struct Shape {
  Color color;
  double x0, y0, x1, y1;  // normalized bounding box
  std::function<bool(double, double)> inside;
};

Shape ellipse(double cx, double cy, double rx, double ry, Color c) {
  return {c, cx - rx, cy - ry, cx + rx, cy + ry, [=](double x, double y) {
            const double dx = (x - cx) / rx, dy = (y - cy) / ry;
            return dx * dx + dy * dy <= 1.0;
          }};
}

Shape rect(double x0, double y0, double x1, double y1, Color c) {
  return {c, x0, y0, x1, y1, [=](double x, double y) { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }};
}

Shape rounded_rect(double cx, double cy, double hw, double hh, double r, Color c) {
  return {c, cx - hw, cy - hh, cx + hw, cy + hh, [=](double x, double y) {
            const double dx = std::max(std::abs(x - cx) - (hw - r), 0.0);
            const double dy = std::max(std::abs(y - cy) - (hh - r), 0.0);
            return std::abs(x - cx) <= hw && std::abs(y - cy) <= hh && dx * dx + dy * dy <= r * r;
          }};
}

Shape ring(double cx, double cy, double ro, double ri, Color c) {
  return {c, cx - ro, cy - ro, cx + ro, cy + ro, [=](double x, double y) {
            const double d = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            return d <= ro * ro && d >= ri * ri;
          }};
}

/// Upper part of an ellipse, cut at y <= cut.
Shape cap(double cx, double cy, double rx, double ry, double cut, Color c) {
  return {c, cx - rx, cy - ry, cx + rx, std::min(cut, cy + ry), [=](double x, double y) {
            const double dx = (x - cx) / rx, dy = (y - cy) / ry;
            return y <= cut && dx * dx + dy * dy <= 1.0;
          }};
}

Shape triangle(double ax, double ay, double bx, double by, double cx, double cy, Color c) {
  return {c, std::min({ax, bx, cx}), std::min({ay, by, cy}), std::max({ax, bx, cx}), std::max({ay, by, cy}),
          [=](double x, double y) {
            auto side = [](double px, double py, double qx, double qy, double x_, double y_) {
              return (qx - px) * (y_ - py) - (qy - py) * (x_ - px);
            };
            const double d1 = side(ax, ay, bx, by, x, y), d2 = side(bx, by, cx, cy, x, y),
                         d3 = side(cx, cy, ax, ay, x, y);
            const bool neg = d1 < 0 || d2 < 0 || d3 < 0, pos = d1 > 0 || d2 > 0 || d3 > 0;
            return !(neg && pos);
          }};
}

struct FaceGeom {
  double cx = 0.5, cy = 0.56, rx, ry;
  bool square;
  double top() const { return cy - ry; }
};

constexpr int kFaceVariants = 3;

FaceGeom face_geom(int variant) {
  switch (variant) {
    case 0: return {0.5, 0.56, 0.27, 0.27, false};
    case 1: return {0.5, 0.56, 0.22, 0.32, false};
    default: return {0.5, 0.56, 0.25, 0.28, true};
  }
}

const std::map<std::string, Color>& named_colors() {
  static const std::map<std::string, Color> c{
      {"black", {0.10f, 0.09f, 0.08f}}, {"brown", {0.45f, 0.27f, 0.11f}}, {"blond", {0.96f, 0.84f, 0.40f}},
      {"red", {0.82f, 0.20f, 0.10f}},   {"green", {0.20f, 0.70f, 0.25f}}, {"pink", {0.98f, 0.50f, 0.75f}},
      {"white", {0.95f, 0.95f, 0.95f}}, {"gray", {0.55f, 0.55f, 0.55f}},  {"blue", {0.15f, 0.30f, 0.85f}},
      {"purple", {0.50f, 0.20f, 0.65f}}, {"orange", {0.95f, 0.55f, 0.10f}}};
  return c;
}

const std::array<Color, 3> kSkin{{{0.98f, 0.85f, 0.72f}, {0.84f, 0.63f, 0.43f}, {0.52f, 0.35f, 0.22f}}};
constexpr Color kEye{0.08f, 0.08f, 0.14f};
constexpr Color kSclera{1.0f, 1.0f, 1.0f};
constexpr Color kMouth{0.75f, 0.22f, 0.24f};
constexpr Color kFrame{0.12f, 0.12f, 0.12f};

int variant_count(const std::string& layer) {
  if (layer == "hair_front" || layer == "face") return kFaceVariants;
  return 1;
}

class Artist {
 public:
  Artist(const AttributeSchema& s, const AttributeVector& a) : schema_(s), attrs_(a) {
    if (attrs_.size() != schema_.attributes.size())
      throw SchemaError("attribute vector has " + std::to_string(attrs_.size()) + " entries, schema has " +
                        std::to_string(schema_.attributes.size()));
    for (std::size_t i = 0; i < attrs_.size(); ++i)
      if (attrs_[i] < 0 || attrs_[i] >= static_cast<int>(schema_.attributes[i].options.size()))
        throw SchemaError("attribute '" + schema_.attributes[i].name + "' value out of range");
  }

  std::vector<Shape> shapes(const std::string& layer) const {
    std::vector<Shape> out;
    const FaceGeom face = face_geom(value_or_zero("face_shape", kFaceVariants));
    if (layer == "hair_back") {
      if (hair_style() == 2) {
        out.push_back(ellipse(0.5, 0.44, 0.33, 0.22, hair_color()));
        out.push_back(rect(0.17, 0.44, 0.83, 0.9, hair_color()));
      }
    } else if (layer == "face") {
      const Color skin = kSkin[static_cast<std::size_t>(value_or_zero("skin_tone", 3))];
      out.push_back(face.square ? rounded_rect(face.cx, face.cy, face.rx, face.ry, 0.07, skin)
                                : ellipse(face.cx, face.cy, face.rx, face.ry, skin));
    } else if (layer == "hair_front") {
      const int style = hair_style();
      if (style == 0) return out;
      const FaceGeom g = face_geom(rule_variant("hair_front"));
      const Color c = hair_color();
      const double top = g.top();
      out.push_back(cap(g.cx, top + 0.11, g.rx + 0.03, 0.17, top + 0.12, c));
      if (style == 2) {
        out.push_back(rect(g.cx - g.rx - 0.04, top + 0.05, g.cx - g.rx + 0.05, g.cy + 0.06, c));
        out.push_back(rect(g.cx + g.rx - 0.05, top + 0.05, g.cx + g.rx + 0.04, g.cy + 0.06, c));
      } else if (style == 3) {
        const double x0 = g.cx - g.rx - 0.02, w = (2 * g.rx + 0.04) / 5;
        for (int k = 0; k < 5; ++k)
          out.push_back(triangle(x0 + k * w, top + 0.03, x0 + (k + 1) * w, top + 0.03, x0 + (k + 0.5) * w,
                                 top - 0.13, c));
      }
    } else if (layer == "eyes") {
      for (double ex : {0.4, 0.6}) {
        switch (value_or_zero("eye_type", 3)) {
          case 0: out.push_back(ellipse(ex, 0.55, 0.055, 0.055, kEye)); break;
          case 1: out.push_back(ellipse(ex, 0.55, 0.08, 0.022, kEye)); break;
          default:
            out.push_back(ellipse(ex, 0.55, 0.075, 0.06, kSclera));
            out.push_back(ellipse(ex, 0.55, 0.03, 0.03, kEye));
        }
      }
    } else if (layer == "eyebrows") {
      for (double ex : {0.4, 0.6}) out.push_back(rect(ex - 0.065, 0.432, ex + 0.065, 0.478, hair_color()));
    } else if (layer == "mouth") {
      out.push_back(rect(0.42, 0.715, 0.58, 0.75, kMouth));
    } else if (layer == "glasses") {
      if (value_or_zero("glasses", 2) == 1) {
        for (double ex : {0.4, 0.6}) out.push_back(ring(ex, 0.55, 0.1, 0.066, kFrame));
        out.push_back(rect(0.46, 0.535, 0.54, 0.565, kFrame));
      }
    }
    return out;
  }

 private:
  int value_or_zero(const std::string& name, int artwork_variants) const {
    const int v = schema_.value_of(attrs_, name);
    if (v < 0) return 0;
    if (v >= artwork_variants)
      throw SchemaError("attribute '" + name + "' option " + std::to_string(v) + " has no artwork");
    return v;
  }

  int hair_style() const { return value_or_zero("hair_style", 4); }

  Color hair_color() const {
    const int idx = schema_.attribute_index("hair_color");
    if (idx < 0) return named_colors().at("black");
    const auto& name = schema_.attributes[idx].options[attrs_[idx]];
    auto it = named_colors().find(name);
    if (it == named_colors().end()) throw SchemaError("hair_color option '" + name + "' has no palette entry");
    return it->second;
  }

  int rule_variant(const std::string& layer) const {
    for (const auto& r : schema_.rules) {
      if (r.layer != layer) continue;
      const int v = schema_.value_of(attrs_, r.attribute);
      if (v < 0) throw SchemaError("interaction rule for layer '" + layer + "' names unknown attribute '" +
                                   r.attribute + "'");
      if (v >= variant_count(layer))
        throw SchemaError("interaction rule for layer '" + layer + "': value " + std::to_string(v) + " of '" +
                          r.attribute + "' has no artwork variant");
      return v;
    }
    return 0;
  }

  const AttributeSchema& schema_;
  const AttributeVector& attrs_;
};

Color styled(Color c, StyleId style) {
  if (style == StyleId::StyleA) return c;
  return {c[1], c[2], c[0]};
}

Sprite rasterize(const std::string& layer, const std::vector<Shape>& shapes, StyleId style, int S) {
  Sprite sp;
  sp.layer = layer;
  sp.size = S;
  sp.rgb.assign(static_cast<std::size_t>(3) * S * S, 1.0f);
  sp.alpha.assign(static_cast<std::size_t>(S) * S, 0.0f);
  constexpr int kSS = 4;
  if (shapes.empty()) return sp;
  double bx0 = 1, by0 = 1, bx1 = 0, by1 = 0;
  for (const auto& sh : shapes) {
    bx0 = std::min(bx0, sh.x0);
    by0 = std::min(by0, sh.y0);
    bx1 = std::max(bx1, sh.x1);
    by1 = std::max(by1, sh.y1);
  }
  const int px0 = std::max(0, static_cast<int>(std::floor(bx0 * S)));
  const int py0 = std::max(0, static_cast<int>(std::floor(by0 * S)));
  const int px1 = std::min(S - 1, static_cast<int>(std::ceil(bx1 * S)));
  const int py1 = std::min(S - 1, static_cast<int>(std::ceil(by1 * S)));
  for (int py = py0; py <= py1; ++py) {
    for (int px = px0; px <= px1; ++px) {
      int hits = 0;
      float acc[3] = {0, 0, 0};
      for (int sy = 0; sy < kSS; ++sy) {
        for (int sx = 0; sx < kSS; ++sx) {
          const double x = (px + (sx + 0.5) / kSS) / S, y = (py + (sy + 0.5) / kSS) / S;
          for (auto it = shapes.rbegin(); it != shapes.rend(); ++it) {
            if (x < it->x0 || x > it->x1 || y < it->y0 || y > it->y1 || !it->inside(x, y)) continue;
            const Color c = styled(it->color, style);
            for (int k = 0; k < 3; ++k) acc[k] += c[k];
            ++hits;
            break;
          }
        }
      }
      if (hits == 0) continue;
      const std::size_t p = static_cast<std::size_t>(py) * S + px;
      sp.alpha[p] = static_cast<float>(hits) / (kSS * kSS);
      for (int k = 0; k < 3; ++k) sp.rgb[3 * p + k] = acc[k] / static_cast<float>(hits);
    }
  }
  if (style == StyleId::StyleB) {
    // Dark 1px outline on the coverage boundary, diagonal hatching inside.
    const std::vector<float> a = sp.alpha;
    auto solid = [&](int x, int y) { return x >= 0 && y >= 0 && x < S && y < S && a[y * S + x] >= 0.5f; };
    for (int y = py0; y <= py1; ++y) {
      for (int x = px0; x <= px1; ++x) {
        const std::size_t p = static_cast<std::size_t>(y) * S + x;
        if (a[p] <= 0.0f) continue;
        const bool edge = !solid(x - 1, y) || !solid(x + 1, y) || !solid(x, y - 1) || !solid(x, y + 1);
        const float k = edge ? 0.25f : ((x + y) % 4 == 0 ? 0.72f : 1.0f);
        for (int c = 0; c < 3; ++c) sp.rgb[3 * p + c] *= k;
        if (edge) sp.alpha[p] = std::max(sp.alpha[p], 0.75f);
      }
    }
  }
  return sp;
}

}  // namespace

std::string to_string(StyleId s) { return s == StyleId::StyleA ? "style_a" : "style_b"; }

StyleId parse_style(const std::string& s) {
  if (s == "style_a" || s == "A" || s == "a") return StyleId::StyleA;
  if (s == "style_b" || s == "B" || s == "b") return StyleId::StyleB;
  throw ConfigError("unknown style '" + s + "' (expected style_a or style_b)");
}

AttributeSchema AttributeSchema::default_schema() {
  AttributeSchema s;
  s.layers = {"hair_back", "face", "hair_front", "eyes", "eyebrows", "mouth", "facial_hair", "glasses"};
  s.attributes = {
      {"face_shape", AttributeKind::Categorical, {"round", "oval", "square"}, {}, {"face"}},
      {"hair_style", AttributeKind::Categorical, {"bald", "short", "long", "spiky"}, {}, {"hair_back", "hair_front"}},
      {"hair_color",
       AttributeKind::Color,
       {"black", "brown", "blond", "red", "green", "pink"},
       {"green", "pink"},
       {"hair_back", "hair_front", "eyebrows"}},
      {"eye_type", AttributeKind::Categorical, {"round", "narrow", "wide"}, {}, {"eyes"}},
      {"glasses", AttributeKind::Categorical, {"none", "glasses"}, {}, {"glasses"}},
      {"skin_tone", AttributeKind::Color, {"light", "medium", "dark"}, {}, {"face"}},
  };
  s.rules = {{"hair_front", "face_shape"}};
  return s;
}

void AttributeSchema::validate() const {
  if (attributes.empty()) throw SchemaError("schema needs at least one attribute");
  if (layers.empty()) throw SchemaError("schema needs at least one layer");
  std::set<std::string> layer_set;
  for (const auto& l : layers)
    if (!layer_set.insert(l).second) throw SchemaError("layer '" + l + "' listed twice");
  std::set<std::string> names;
  for (const auto& a : attributes) {
    if (!names.insert(a.name).second) throw SchemaError("attribute '" + a.name + "' declared twice");
    if (a.options.size() < 2) throw SchemaError("attribute '" + a.name + "' needs at least 2 options");
    std::set<std::string> opts(a.options.begin(), a.options.end());
    if (opts.size() != a.options.size()) throw SchemaError("attribute '" + a.name + "' has duplicate options");
    for (const auto& f : a.forbidden)
      if (!opts.count(f)) throw SchemaError("attribute '" + a.name + "' forbids unknown option '" + f + "'");
    if (a.forbidden.size() >= a.options.size()) throw SchemaError("attribute '" + a.name + "' forbids every option");
    for (const auto& l : a.layers)
      if (!layer_set.count(l)) throw SchemaError("attribute '" + a.name + "' references unknown layer '" + l + "'");
  }
  for (const auto& r : rules) {
    if (!layer_set.count(r.layer)) throw SchemaError("interaction rule references unknown layer '" + r.layer + "'");
    if (!names.count(r.attribute))
      throw SchemaError("interaction rule references unknown attribute '" + r.attribute + "'");
  }
  for (const auto& fc : forbidden_combinations) {
    if (fc.when.empty()) throw SchemaError("empty forbidden combination");
    for (const auto& [attr, opt] : fc.when) {
      const int i = attribute_index(attr);
      if (i < 0) throw SchemaError("forbidden combination references unknown attribute '" + attr + "'");
      const auto& o = attributes[i].options;
      if (std::find(o.begin(), o.end(), opt) == o.end())
        throw SchemaError("forbidden combination references unknown option '" + opt + "' of '" + attr + "'");
    }
  }
}

int AttributeSchema::attribute_index(const std::string& name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<int> AttributeSchema::option_counts() const {
  std::vector<int> c;
  for (const auto& a : attributes) c.push_back(static_cast<int>(a.options.size()));
  return c;
}

int AttributeSchema::value_of(const AttributeVector& attrs, const std::string& name) const {
  const int i = attribute_index(name);
  return i < 0 ? -1 : attrs.at(static_cast<std::size_t>(i));
}

std::vector<std::string> AttributeSchema::affected_layers(const std::string& attribute) const {
  std::vector<std::string> out;
  const int i = attribute_index(attribute);
  if (i >= 0) out = attributes[i].layers;
  for (const auto& r : rules)
    if (r.attribute == attribute && std::find(out.begin(), out.end(), r.layer) == out.end()) out.push_back(r.layer);
  return out;
}

json to_json(const AttributeSchema& s) {
  json attrs = json::array();
  for (const auto& a : s.attributes)
    attrs.push_back({{"name", a.name},
                     {"kind", a.kind == AttributeKind::Color ? "color" : "categorical"},
                     {"options", a.options},
                     {"forbidden", a.forbidden},
                     {"layers", a.layers}});
  json rules = json::array();
  for (const auto& r : s.rules) rules.push_back({{"layer", r.layer}, {"attribute", r.attribute}});
  json combos = json::array();
  for (const auto& c : s.forbidden_combinations) {
    json when = json::object();
    for (const auto& [k, v] : c.when) when[k] = v;
    combos.push_back({{"when", when}});
  }
  return {{"attributes", attrs}, {"layers", s.layers}, {"interaction_rules", rules},
          {"forbidden_combinations", combos}};
}

AttributeSchema schema_from_json(const json& j) {
  AttributeSchema s;
  try {
    for (const auto& a : j.at("attributes")) {
      AttributeDef d;
      d.name = a.at("name").get<std::string>();
      const auto kind = a.value("kind", std::string("categorical"));
      if (kind == "color") d.kind = AttributeKind::Color;
      else if (kind != "categorical") throw SchemaError("attribute '" + d.name + "' has unknown kind '" + kind + "'");
      d.options = a.at("options").get<std::vector<std::string>>();
      d.forbidden = a.value("forbidden", std::vector<std::string>{});
      d.layers = a.value("layers", std::vector<std::string>{});
      s.attributes.push_back(std::move(d));
    }
    s.layers = j.at("layers").get<std::vector<std::string>>();
    for (const auto& r : j.value("interaction_rules", json::array()))
      s.rules.push_back({r.at("layer").get<std::string>(), r.at("attribute").get<std::string>()});
    for (const auto& c : j.value("forbidden_combinations", json::array())) {
      ForbiddenCombination fc;
      for (auto it = c.at("when").begin(); it != c.at("when").end(); ++it)
        fc.when.emplace_back(it.key(), it.value().get<std::string>());
      s.forbidden_combinations.push_back(std::move(fc));
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed schema: ") + e.what());
  }
  s.validate();
  return s;
}

AttributeSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read schema file '" + path + "'");
  try {
    return schema_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw SchemaError("schema file '" + path + "' is not valid JSON: " + e.what());
  }
}

void validate_bias(const AttributeSchema& schema, const AttributeBias& bias) {
  for (const auto& [name, w] : bias) {
    const int i = schema.attribute_index(name);
    if (i < 0) throw ConfigError("bias references unknown attribute '" + name + "'");
    if (w.size() != schema.attributes[i].options.size())
      throw ConfigError("bias for '" + name + "' has " + std::to_string(w.size()) + " weights, attribute has " +
                        std::to_string(schema.attributes[i].options.size()) + " options");
    double total = 0;
    for (double x : w) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError("bias for '" + name + "' has a negative weight");
      total += x;
    }
    if (total <= 0.0) throw ConfigError("bias for '" + name + "' is all zero");
  }
}

AttributeVector sample_attributes(const AttributeSchema& schema, std::mt19937_64& rng, const AttributeBias& bias) {
  validate_bias(schema, bias);
  AttributeVector v;
  v.reserve(schema.attributes.size());
  for (const auto& a : schema.attributes) {
    auto it = bias.find(a.name);
    std::vector<double> w = it != bias.end() ? it->second : std::vector<double>(a.options.size(), 1.0);
    std::discrete_distribution<int> d(w.begin(), w.end());
    v.push_back(d(rng));
  }
  return v;
}

bool plausibility_filter(const AttributeSchema& schema, const AttributeVector& attrs) {
  for (std::size_t i = 0; i < schema.attributes.size(); ++i) {
    const auto& a = schema.attributes[i];
    const auto& opt = a.options.at(static_cast<std::size_t>(attrs.at(i)));
    if (std::find(a.forbidden.begin(), a.forbidden.end(), opt) != a.forbidden.end()) return false;
  }
  for (const auto& fc : schema.forbidden_combinations) {
    bool all = true;
    for (const auto& [attr, opt] : fc.when) {
      const int i = schema.attribute_index(attr);
      all = all && schema.attributes[i].options[attrs[i]] == opt;
    }
    if (all) return false;
  }
  return true;
}

std::vector<Sprite> render_layers(const AttributeSchema& schema, const AttributeVector& attrs, StyleId style,
                                  int image_size) {
  if (image_size < 16) throw ConfigError("image_size must be >= 16 for rendering");
  Artist artist(schema, attrs);
  std::vector<Sprite> out;
  for (const auto& layer : schema.layers) out.push_back(rasterize(layer, artist.shapes(layer), style, image_size));
  return out;
}

ImageBatch<float> composite(const std::vector<Sprite>& sprites) {
  if (sprites.empty()) throw SchemaError("nothing to composite");
  const int S = sprites.front().size;
  std::vector<float> canvas(static_cast<std::size_t>(3) * S * S, 1.0f);
  for (const auto& sp : sprites) {
    for (std::size_t p = 0; p < sp.alpha.size(); ++p) {
      const float a = sp.alpha[p];
      if (a <= 0.0f) continue;
      for (int k = 0; k < 3; ++k) canvas[3 * p + k] = sp.rgb[3 * p + k] * a + canvas[3 * p + k] * (1.0f - a);
    }
  }
  ImageBatch<float> img(1, 3, S, S);
  for (int y = 0; y < S; ++y)
    for (int x = 0; x < S; ++x)
      for (int k = 0; k < 3; ++k)
        img.at(0, k, y, x) = std::clamp(2.0f * canvas[3 * (static_cast<std::size_t>(y) * S + x) + k] - 1.0f, -1.0f, 1.0f);
  return img;
}

ImageBatch<float> render(const AttributeSchema& schema, const AttributeVector& attrs, StyleId style, int image_size) {
  return composite(render_layers(schema, attrs, style, image_size));
}

PixelRect layer_bounds(const AttributeSchema& schema, const AttributeVector& attrs, const std::string& layer,
                       int image_size) {
  Artist artist(schema, attrs);
  const auto shapes = artist.shapes(layer);
  PixelRect r;
  if (shapes.empty()) return r;
  double x0 = 1, y0 = 1, x1 = 0, y1 = 0;
  for (const auto& s : shapes) {
    x0 = std::min(x0, s.x0);
    y0 = std::min(y0, s.y0);
    x1 = std::max(x1, s.x1);
    y1 = std::max(y1, s.y1);
  }
  const int S = image_size;
  r.x0 = std::max(0, static_cast<int>(std::floor(x0 * S)) - 1);
  r.y0 = std::max(0, static_cast<int>(std::floor(y0 * S)) - 1);
  r.x1 = std::min(S - 1, static_cast<int>(std::ceil(x1 * S)) + 1);
  r.y1 = std::min(S - 1, static_cast<int>(std::ceil(y1 * S)) + 1);
  return r;
}

void CorpusSpec::validate(const AttributeSchema& schema) const {
  if (n_samples < 1) throw ConfigError("data.n_samples: must be >= 1");
  if (image_size < 16) throw ConfigError("data.image_size: must be >= 16");
  validate_bias(schema, bias);
}

Corpus build_corpus(const AttributeSchema& schema, const CorpusSpec& spec) {
  schema.validate();
  spec.validate(schema);
  std::mt19937_64 rng(spec.seed);
  Corpus c;
  std::size_t draws = 0;
  while (static_cast<int>(c.labels.size()) < spec.n_samples) {
    AttributeVector a = sample_attributes(schema, rng, spec.bias);
    ++draws;
    if (plausibility_filter(schema, a)) c.labels.push_back(std::move(a));
    if (draws >= 1000 && c.labels.size() * 100 < draws)
      throw SchemaError("plausibility filter accepts fewer than 1% of draws (" + std::to_string(c.labels.size()) +
                        "/" + std::to_string(draws) + "); schema is degenerate");
  }
  const int S = spec.image_size;
  c.images = ImageBatch<float>(spec.n_samples, 3, S, S);
  const std::ptrdiff_t n = spec.n_samples;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto img = render(schema, c.labels[static_cast<std::size_t>(i)], spec.style, S);
    std::copy(img.data.begin(), img.data.end(), c.images.data.begin() + i * img.sample_size());
  }
  return c;
}

Split split_train_test(std::size_t n) {
  Split s;
  const std::size_t n_test = n * 20 / 100;
  for (std::size_t i = 0; i < n; ++i) (i < n - n_test ? s.train : s.test).push_back(i);
  return s;
}

Corpus subset(const Corpus& c, const std::vector<std::size_t>& idx) {
  Corpus out;
  out.images = gather_batch(c.images, idx);
  for (auto i : idx) out.labels.push_back(c.labels.at(i));
  return out;
}

}  // namespace xgan
