#include "xgan/evalkit.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "xgan/checkpoint.hpp"
#include "xgan/errors.hpp"

namespace xgan {

namespace {

constexpr int kChunk = 64;

template <typename F>
void for_chunks(int n, int chunk, F&& f) {
  for (int b = 0; b < n; b += chunk) f(b, std::min(n, b + chunk));
}

void require_nonempty(const ImageBatch<float>& x, const char* what) {
  if (x.n < 1) throw DataError(std::string(what) + " is empty");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<double> majority_rates(const std::vector<AttributeVector>& labels, const std::vector<int>& counts) {
  std::vector<double> out;
  for (std::size_t a = 0; a < counts.size(); ++a) {
    std::vector<int> hist(static_cast<std::size_t>(counts[a]), 0);
    for (const auto& l : labels) ++hist.at(static_cast<std::size_t>(l[a]));
    out.push_back(static_cast<double>(*std::max_element(hist.begin(), hist.end())) /
                  static_cast<double>(labels.size()));
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

ProbeSpec ProbeSpec::for_image_size(int image_size, int channels) {
  ProbeSpec s;
  std::vector<int> conv;
  const int widths[] = {32, 64, 128, 128, 128};
  for (int size = image_size, i = 0; size > 4; size /= 2, ++i) conv.push_back(widths[std::min(i, 4)]);
  s.trunk = ConvStackSpec{image_size, channels, conv, {256}};
  return s;
}

double ProbeClassifier::min_heldout_accuracy() const {
  return heldout_.empty() ? 0.0 : *std::min_element(heldout_.begin(), heldout_.end());
}

std::vector<AttributeVector> ProbeClassifier::predict(const ImageBatch<float>& images) const {
  if (images.c != net_.spec.trunk.channels || images.h != image_size() || images.w != image_size())
    throw DimensionError("probe expects Nx" + std::to_string(net_.spec.trunk.channels) + "x" +
                         std::to_string(image_size()) + "x" + std::to_string(image_size()) + ", got " +
                         images.shape_string());
  return predict_attributes(net_, images);
}

void ProbeClassifier::check_schema(const AttributeSchema& schema) const {
  if (schema.attributes.size() != names_.size())
    throw ConfigError("probe covers " + std::to_string(names_.size()) + " attributes, schema has " +
                      std::to_string(schema.attributes.size()));
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (schema.attributes[i].name != names_[i])
      throw ConfigError("probe attribute " + std::to_string(i) + " is '" + names_[i] + "', schema has '" +
                        schema.attributes[i].name + "'");
    if (static_cast<int>(schema.attributes[i].options.size()) != option_counts()[i])
      throw ConfigError("probe attribute '" + names_[i] + "' has " + std::to_string(option_counts()[i]) +
                        " options, schema has " + std::to_string(schema.attributes[i].options.size()));
  }
}

void ProbeClassifier::check_valid(double gate) const {
  if (heldout_.size() != names_.size()) throw DataError("probe has no recorded held-out accuracy");
  for (std::size_t i = 0; i < heldout_.size(); ++i)
    if (heldout_[i] < gate) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "probe held-out accuracy for '%s' is %.4f, below the %.2f validity gate",
                    names_[i].c_str(), heldout_[i], gate);
      throw DataError(buf);
    }
}

ProbeClassifier train_probe(const Corpus& corpus, const AttributeSchema& schema, const ProbeSpec& spec,
                            const std::string& style, std::uint64_t seed) {
  schema.validate();
  if (corpus.labels.size() != static_cast<std::size_t>(corpus.images.n))
    throw DataError("probe corpus image/label count mismatch");
  if (!(spec.holdout_fraction > 0.0 && spec.holdout_fraction < 1.0))
    throw ConfigError("probe.holdout_fraction must be in (0, 1)");
  const int n = corpus.images.n;
  const int n_test = static_cast<int>(std::floor(n * spec.holdout_fraction));
  const int n_train = n - n_test;
  if (n_test < 1 || n_train < 1) throw DataError("probe corpus too small for a held-out split");
  AttributeNet<float> net = build_attribute_net<float>({spec.trunk, schema.option_counts()}, seed);
  AttributeFitOptions fit = spec.fit;
  fit.seed = seed;
  std::vector<AttributeVector> train_labels(corpus.labels.begin(), corpus.labels.begin() + n_train);
  std::vector<AttributeVector> test_labels(corpus.labels.begin() + n_train, corpus.labels.end());
  fit_attribute_net(net, slice_batch(corpus.images, 0, n_train), train_labels, fit);
  auto acc = attribute_accuracy(predict_attributes(net, slice_batch(corpus.images, n_train, n)), test_labels);
  std::vector<std::string> names;
  for (const auto& a : schema.attributes) names.push_back(a.name);
  return ProbeClassifier(std::move(net), std::move(names), std::move(acc), style);
}

void save_probe(const ProbeClassifier& probe, const std::string& path) {
  save_attribute_net(probe.net(), CheckpointKind::Probe,
                     Json{{"attributes", probe.attribute_names()},
                          {"heldout_accuracy", probe.heldout_accuracy()},
                          {"style", probe.style()}},
                     path);
}

ProbeClassifier load_probe(const std::string& path) {
  Json meta;
  AttributeNet<float> net = load_attribute_net(path, CheckpointKind::Probe, &meta);
  try {
    return ProbeClassifier(std::move(net), meta.at("attributes").get<std::vector<std::string>>(),
                           meta.at("heldout_accuracy").get<std::vector<double>>(), meta.value("style", ""));
  } catch (const Json::exception& e) {
    throw CheckpointError("probe checkpoint '" + path + "' has malformed metadata: " + e.what());
  }
}

PreservationResult attribute_preservation(const Translator& translator, const ProbeClassifier& probe,
                                          const ImageBatch<float>& images, const std::vector<AttributeVector>& labels,
                                          int chunk) {
  require_nonempty(images, "preservation test set");
  if (labels.size() != static_cast<std::size_t>(images.n)) throw DataError("preservation image/label count mismatch");
  const auto& counts = probe.option_counts();
  for (const auto& l : labels)
    if (l.size() != counts.size())
      throw ConfigError("label vectors have " + std::to_string(l.size()) + " attributes, probe has " +
                        std::to_string(counts.size()));
  std::vector<AttributeVector> predicted;
  predicted.reserve(labels.size());
  for_chunks(images.n, chunk, [&](int b, int e) {
    const auto out = translator(slice_batch(images, b, e));
    if (out.n != e - b) throw DimensionError("translator changed the batch size");
    auto p = probe.predict(out);
    predicted.insert(predicted.end(), p.begin(), p.end());
  });
  PreservationResult r;
  r.attributes = probe.attribute_names();
  r.rates = attribute_accuracy(predicted, labels);
  r.chance = majority_rates(labels, counts);
  r.macro = mean_of(r.rates);
  r.chance_macro = mean_of(r.chance);
  return r;
}

PreservationResult attribute_preservation(const XganModel<float>& model, const ProbeClassifier& target_probe,
                                          const ImageBatch<float>& images, const std::vector<AttributeVector>& labels,
                                          DomainId from) {
  return attribute_preservation([&](const ImageBatch<float>& x) { return translate(model, x, from); }, target_probe,
                                images, labels, kChunk);
}

double domain_confusion(const XganModel<float>& model, const ImageBatch<float>& test1,
                        const ImageBatch<float>& test2) {
  require_nonempty(test1, "domain-confusion D1 test set");
  require_nonempty(test2, "domain-confusion D2 test set");
  std::size_t correct = 0;
  for (DomainId d : {DomainId::D1, DomainId::D2}) {
    const auto& x = d == DomainId::D1 ? test1 : test2;
    for_chunks(x.n, kChunk, [&](int b, int e) {
      const auto p = classify_domain(model, encode(model, slice_batch(x, b, e), d));
      for (float v : p.data) correct += (v >= 0.5f) == (d == DomainId::D2);
    });
  }
  return static_cast<double>(correct) / static_cast<double>(test1.n + test2.n);
}

SemanticTerms<double> embedding_consistency(const XganModel<float>& model, const ImageBatch<float>& test1,
                                            const ImageBatch<float>& test2, Distance d) {
  require_nonempty(test1, "embedding-consistency D1 test set");
  require_nonempty(test2, "embedding-consistency D2 test set");
  SemanticTerms<double> out;
  // Each direction depends only on its own domain's inputs, so the two sets
  // are chunked independently and weighted by chunk size.
  auto direction = [&](const ImageBatch<float>& x, bool first) {
    double acc = 0;
    for_chunks(x.n, kChunk, [&](int b, int e) {
      const auto part = slice_batch(x, b, e);
      const auto t = first ? semantic_consistency_loss(model, part, slice_batch(test2, 0, 1), d)
                           : semantic_consistency_loss(model, slice_batch(test1, 0, 1), part, d);
      acc += static_cast<double>(first ? t.one_to_two : t.two_to_one) * (e - b);
    });
    return acc / x.n;
  };
  out.one_to_two = direction(test1, true);
  out.two_to_one = direction(test2, false);
  return out;
}

double mean_reconstruction_error(const XganModel<float>& model, const ImageBatch<float>& x, DomainId d) {
  require_nonempty(x, "reconstruction test set");
  double acc = 0;
  for_chunks(x.n, kChunk, [&](int b, int e) {
    acc += static_cast<double>(reconstruction_loss(model, slice_batch(x, b, e), d)) * (e - b);
  });
  return acc / x.n;
}

double translation_roughness(const XganModel<float>& model, const ImageBatch<float>& x, DomainId from) {
  require_nonempty(x, "roughness test set");
  double acc = 0;
  for_chunks(x.n, kChunk, [&](int b, int e) {
    acc += static_cast<double>(total_variation_loss(translate(model, slice_batch(x, b, e), from))) * (e - b);
  });
  return acc / x.n;
}

std::pair<int, int> write_sample_grid(const ImageBatch<float>& inputs, const ImageBatch<float>& outputs,
                                      const std::string& path, const GridLayout& layout) {
  if (inputs.n < 1) throw DataError("sample grid needs at least one input");
  if (outputs.n != inputs.n || outputs.h != inputs.h || outputs.w != inputs.w)
    throw DimensionError("sample grid: outputs " + outputs.shape_string() + " do not match inputs " +
                         inputs.shape_string());
  if (layout.pairs_per_row < 1) throw ConfigError("grid.pairs_per_row must be >= 1");
  const int tile = layout.tile_size > 0 ? layout.tile_size : inputs.h;
  const int per_row = layout.pairs_per_row;
  const int rows = (inputs.n + per_row - 1) / per_row;
  const int W = tile * 2 * per_row, H = tile * rows;
  std::vector<std::uint8_t> canvas(static_cast<std::size_t>(3) * W * H, 255);
  for (int i = 0; i < inputs.n; ++i) {
    for (int side = 0; side < 2; ++side) {
      const auto& src = side == 0 ? inputs : outputs;
      auto rgb = to_rgb8(src, i);
      if (tile != src.h) {
        const auto resized = from_rgb8(rgb, src.w, src.h, tile);
        rgb = to_rgb8(resized, 0);
      }
      const int ox = ((i % per_row) * 2 + side) * tile, oy = (i / per_row) * tile;
      for (int y = 0; y < tile; ++y)
        std::copy_n(rgb.begin() + static_cast<std::ptrdiff_t>(3) * y * tile, 3 * tile,
                    canvas.begin() + (static_cast<std::ptrdiff_t>(oy + y) * W + ox) * 3);
    }
  }
  write_png(path, canvas, W, H);
  return {W, H};
}

std::pair<int, int> sample_grid(const XganModel<float>& model, const ImageBatch<float>& inputs, DomainId from,
                                const std::string& path, const GridLayout& layout) {
  return write_sample_grid(inputs, translate(model, inputs, from), path, layout);
}

std::string config_fingerprint(const ModelConfig& m, const TrainConfig& t) {
  const std::string s = to_json(m).dump() + to_json(t).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

Json to_json(const EvalReport& r) {
  Json j{{"mode", r.mode},
         {"seed", r.seed},
         {"step", r.step},
         {"config_fingerprint", r.config_fingerprint},
         {"domain_confusion", r.domain_confusion},
         {"embedding_distance", {{"1to2", r.embedding_distance_1to2}, {"2to1", r.embedding_distance_2to1}}},
         {"mean_embedding_distance", r.mean_embedding_distance()},
         {"reconstruction", {{"d1", r.reconstruction_1}, {"d2", r.reconstruction_2}}},
         {"roughness_1to2", r.roughness_1to2}};
  auto block = [&](const std::vector<double>& rates, const std::vector<double>& chance, double macro,
                   double chance_macro) {
    Json per = Json::object(), ch = Json::object();
    for (std::size_t i = 0; i < r.attributes.size() && i < rates.size(); ++i) {
      per[r.attributes[i]] = rates[i];
      ch[r.attributes[i]] = chance[i];
    }
    return Json{{"per_attribute", per}, {"chance", ch}, {"macro", macro}, {"chance_macro", chance_macro}};
  };
  if (r.has_1to2) j["preservation_1to2"] = block(r.preservation_1to2, r.chance_1to2, r.macro_1to2, r.chance_macro_1to2);
  if (r.has_2to1) j["preservation_2to1"] = block(r.preservation_2to1, r.chance_2to1, r.macro_2to1, r.chance_macro_2to1);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

EvalReport eval_report_from_json(const Json& j) {
  EvalReport r;
  try {
    r.mode = j.at("mode").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.step = j.at("step").get<std::int64_t>();
    r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    r.domain_confusion = j.at("domain_confusion").get<double>();
    r.embedding_distance_1to2 = j.at("embedding_distance").at("1to2").get<double>();
    r.embedding_distance_2to1 = j.at("embedding_distance").at("2to1").get<double>();
    r.reconstruction_1 = j.at("reconstruction").at("d1").get<double>();
    r.reconstruction_2 = j.at("reconstruction").at("d2").get<double>();
    r.roughness_1to2 = j.at("roughness_1to2").get<double>();
    r.error = j.value("error", "");
    auto read = [&](const char* key, std::vector<double>& rates, std::vector<double>& chance, double& macro,
                    double& chance_macro) {
      if (!j.contains(key)) return false;
      const auto& b = j.at(key);
      std::vector<std::string> names;
      rates.clear();
      chance.clear();
      for (auto it = b.at("per_attribute").begin(); it != b.at("per_attribute").end(); ++it) {
        names.push_back(it.key());
        rates.push_back(it.value().get<double>());
        chance.push_back(b.at("chance").at(it.key()).get<double>());
      }
      r.attributes = names;
      macro = b.at("macro").get<double>();
      chance_macro = b.at("chance_macro").get<double>();
      return true;
    };
    r.has_1to2 = read("preservation_1to2", r.preservation_1to2, r.chance_1to2, r.macro_1to2, r.chance_macro_1to2);
    r.has_2to1 = read("preservation_2to1", r.preservation_2to1, r.chance_2to1, r.macro_2to1, r.chance_macro_2to1);
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed eval report: ") + e.what());
  }
  return r;
}

void append_report(const EvalReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw DataError("cannot append to '" + path + "'");
  out << to_json(r).dump() << '\n';
  if (!out) throw DataError("failed writing '" + path + "'");
}

EvalReport evaluate(const XganModel<float>& model, const EvalData& data, const ProbeClassifier* probe_d2,
                    const ProbeClassifier* probe_d1, Distance sem_distance) {
  EvalReport r;
  if (probe_d2) {
    probe_d2->check_valid();
    const auto p = attribute_preservation(model, *probe_d2, data.test1, data.labels1, DomainId::D1);
    r.attributes = p.attributes;
    r.preservation_1to2 = p.rates;
    r.chance_1to2 = p.chance;
    r.macro_1to2 = p.macro;
    r.chance_macro_1to2 = p.chance_macro;
    r.has_1to2 = true;
  }
  if (probe_d1) {
    probe_d1->check_valid();
    const auto p = attribute_preservation(model, *probe_d1, data.test2, data.labels2, DomainId::D2);
    r.attributes = p.attributes;
    r.preservation_2to1 = p.rates;
    r.chance_2to1 = p.chance;
    r.macro_2to1 = p.macro;
    r.chance_macro_2to1 = p.chance_macro;
    r.has_2to1 = true;
  }
  r.domain_confusion = domain_confusion(model, data.test1, data.test2);
  const auto sem = embedding_consistency(model, data.test1, data.test2, sem_distance);
  r.embedding_distance_1to2 = sem.one_to_two;
  r.embedding_distance_2to1 = sem.two_to_one;
  r.reconstruction_1 = mean_reconstruction_error(model, data.test1, DomainId::D1);
  r.reconstruction_2 = mean_reconstruction_error(model, data.test2, DomainId::D2);
  r.roughness_1to2 = translation_roughness(model, data.test1, DomainId::D1);
  return r;
}

EvalReport median_report(const std::vector<EvalReport>& runs) {
  std::vector<const EvalReport*> ok;
  for (const auto& r : runs)
    if (r.error.empty()) ok.push_back(&r);
  EvalReport m;
  if (ok.empty()) {
    m.error = "no successful runs";
    return m;
  }
  auto med = [&](auto get) {
    std::vector<double> v;
    for (const auto* r : ok) v.push_back(get(*r));
    return median(v);
  };
  m.mode = ok.front()->mode;
  m.config_fingerprint = ok.front()->config_fingerprint;
  m.step = ok.front()->step;
  m.attributes = ok.front()->attributes;
  m.has_1to2 = ok.front()->has_1to2;
  m.has_2to1 = ok.front()->has_2to1;
  m.domain_confusion = med([](const EvalReport& r) { return r.domain_confusion; });
  m.embedding_distance_1to2 = med([](const EvalReport& r) { return r.embedding_distance_1to2; });
  m.embedding_distance_2to1 = med([](const EvalReport& r) { return r.embedding_distance_2to1; });
  m.reconstruction_1 = med([](const EvalReport& r) { return r.reconstruction_1; });
  m.reconstruction_2 = med([](const EvalReport& r) { return r.reconstruction_2; });
  m.roughness_1to2 = med([](const EvalReport& r) { return r.roughness_1to2; });
  m.macro_1to2 = med([](const EvalReport& r) { return r.macro_1to2; });
  m.chance_macro_1to2 = med([](const EvalReport& r) { return r.chance_macro_1to2; });
  m.macro_2to1 = med([](const EvalReport& r) { return r.macro_2to1; });
  m.chance_macro_2to1 = med([](const EvalReport& r) { return r.chance_macro_2to1; });
  auto med_vec = [&](auto get) {
    std::vector<double> out;
    const std::size_t k = get(*ok.front()).size();
    for (std::size_t i = 0; i < k; ++i) out.push_back(med([&](const EvalReport& r) { return get(r).at(i); }));
    return out;
  };
  m.preservation_1to2 = med_vec([](const EvalReport& r) -> const std::vector<double>& { return r.preservation_1to2; });
  m.chance_1to2 = med_vec([](const EvalReport& r) -> const std::vector<double>& { return r.chance_1to2; });
  m.preservation_2to1 = med_vec([](const EvalReport& r) -> const std::vector<double>& { return r.preservation_2to1; });
  m.chance_2to1 = med_vec([](const EvalReport& r) -> const std::vector<double>& { return r.chance_2to1; });
  return m;
}

std::vector<AblationRow> ablation_suite(const AblationInputs& in, const AblationOptions& opts) {
  std::vector<AblationRow> rows;
  for (TrainMode mode : opts.modes) {
    AblationRow row;
    row.mode = mode;
    for (std::uint64_t seed : opts.seeds) {
      TrainConfig cfg = in.train;
      cfg.mode = mode;
      cfg.seed = seed;
      EvalReport r;
      try {
        TrainSinks sinks;
        if (opts.on_metrics) sinks.metrics = [&](const MetricRecord& m) { opts.on_metrics(mode, seed, m); };
        const TrainState state = train(in.model, cfg, in.train1, in.train2, in.teacher, sinks);
        r = evaluate(state.model, in.eval, in.probe_d2, in.probe_d1, cfg.loss.sem_distance);
        r.step = state.step;
      } catch (const std::exception& e) {
        r = EvalReport{};
        r.error = e.what();
      }
      r.mode = to_string(mode);
      r.seed = seed;
      r.config_fingerprint = config_fingerprint(in.model, cfg);
      if (opts.on_run) opts.on_run(r);
      row.runs.push_back(std::move(r));
    }
    row.median = median_report(row.runs);
    row.median.mode = to_string(mode);
    if (!row.median.error.empty()) row.error = row.runs.empty() ? "no seeds" : row.runs.front().error;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  const std::vector<std::string> head{"mode",   "runs",   "pres_1to2", "chance", "confusion",
                                      "emb_dist", "rec_d1", "rec_d2",   "tv_1to2", "status"};
  std::vector<std::vector<std::string>> cells{head};
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    int ok = 0;
    for (const auto& run : r.runs) ok += run.error.empty();
    const auto& m = r.median;
    const std::string runs = std::to_string(ok) + "/" + std::to_string(r.runs.size());
    if (!r.error.empty()) {
      cells.push_back({to_string(r.mode), runs, "-", "-", "-", "-", "-", "-", "-", "failed: " + r.error});
      continue;
    }
    cells.push_back({to_string(r.mode), runs, m.has_1to2 ? num(m.macro_1to2) : "-",
                     m.has_1to2 ? num(m.chance_macro_1to2) : "-", num(m.domain_confusion),
                     num(m.mean_embedding_distance()), num(m.reconstruction_1), num(m.reconstruction_2),
                     num(m.roughness_1to2), ok == static_cast<int>(r.runs.size()) ? "ok" : "partial"});
  }
  std::vector<std::size_t> width(head.size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream os;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    for (std::size_t i = 0; i < cells[k].size(); ++i) {
      os << cells[k][i];
      if (i + 1 < cells[k].size()) os << std::string(width[i] - cells[k][i].size() + 2, ' ');
    }
    os << '\n';
    if (k == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < width.size(); ++i) total += width[i] + (i + 1 < width.size() ? 2 : 0);
      os << std::string(total, '-') << '\n';
    }
  }
  return os.str();
}

}  // namespace xgan
