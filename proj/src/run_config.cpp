#include "xgan/run_config.hpp"

#include <filesystem>
#include <fstream>

#include "xgan/errors.hpp"

namespace xgan {

namespace fs = std::filesystem;

namespace {

const AttributeBias& default_shift() {
  static const AttributeBias b{{"hair_color", {1, 1, 1, 2, 1, 1}}};
  return b;
}

std::string domain_key(int i) { return i == 0 ? "d1" : "d2"; }

DataSource data_source_from_json(const Json& j, const std::string& where) {
  DataSource d;
  try {
    const auto kind = j.at("source").get<std::string>();
    if (kind == "synthetic") d.kind = DataSourceKind::Synthetic;
    else if (kind == "directory") d.kind = DataSourceKind::Directory;
    else throw ConfigError(where + ".source: expected 'synthetic' or 'directory', got '" + kind + "'");
    d.dir = j.at("dir").get<std::string>();
    d.synthetic.n_samples = j.at("n_samples").get<int>();
    d.synthetic.style = parse_style(j.at("style").get<std::string>());
    d.synthetic.seed = j.at("seed").get<std::uint64_t>();
    for (auto it = j.at("bias").begin(); it != j.at("bias").end(); ++it)
      d.synthetic.bias[it.key()] = it.value().get<std::vector<double>>();
  } catch (const Json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return d;
}

}  // namespace

RunConfig::RunConfig() {
  data[0].synthetic.seed = 1;
  data[1].synthetic.seed = 2;
  data[1].synthetic.style = StyleId::StyleB;
  data[1].synthetic.bias = default_shift();
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  for (int i = 0; i < 2; ++i) {
    const auto& d = data[static_cast<std::size_t>(i)];
    const std::string where = "data." + domain_key(i);
    if (d.kind == DataSourceKind::Directory && d.dir.empty())
      throw ConfigError(where + ": source 'directory' needs a non-empty 'dir'");
    if (d.kind == DataSourceKind::Synthetic && !d.dir.empty())
      throw ConfigError(where + ": exactly one data source allowed; clear 'dir' or set source to 'directory'");
    if (d.kind == DataSourceKind::Synthetic && d.synthetic.n_samples < 1)
      throw ConfigError(where + ".n_samples: must be >= 1");
  }
  if (teacher_steps < 1) throw ConfigError("teacher.steps: must be >= 1");
  if (probe_samples < 10) throw ConfigError("probe.n_samples: must be >= 10");
  if (probe_steps < 1) throw ConfigError("probe.steps: must be >= 1");
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
}

Json to_json(const DataSource& d) {
  Json bias = Json::object();
  for (const auto& [k, v] : d.synthetic.bias) bias[k] = v;
  return Json{{"source", d.kind == DataSourceKind::Synthetic ? "synthetic" : "directory"},
              {"dir", d.dir},
              {"n_samples", d.synthetic.n_samples},
              {"style", to_string(d.synthetic.style)},
              {"seed", d.synthetic.seed},
              {"bias", bias}};
}

Json to_json(const RunConfig& c) {
  return Json{{"model", to_json(c.model)},
              {"train", to_json(c.train)},
              {"data", {{"schema", c.schema_path}, {"d1", to_json(c.data[0])}, {"d2", to_json(c.data[1])}}},
              {"teacher", {{"path", c.teacher_path}, {"steps", c.teacher_steps}}},
              {"probe", {{"n_samples", c.probe_samples}, {"steps", c.probe_steps}, {"seed", c.probe_seed}}},
              {"output_dir", c.output_dir}};
}

RunConfig run_config_from_json(const Json& j) {
  // Bias maps are free-form: merge them over empty objects, then restore the
  // default content shift where the input leaves it unspecified.
  Json base = to_json(RunConfig{});
  base["data"]["d1"]["bias"] = Json::object();
  base["data"]["d2"]["bias"] = Json::object();
  Json full = merge_strict(base, j);
  for (int i = 0; i < 2; ++i) {
    const auto key = domain_key(i);
    const bool given = j.contains("data") && j["data"].contains(key) && j["data"][key].contains("bias");
    if (!given) full["data"][key]["bias"] = to_json(RunConfig{}.data[static_cast<std::size_t>(i)])["bias"];
  }
  RunConfig c;
  c.model = model_config_from_json(full.at("model"));
  c.train = train_config_from_json(full.at("train"));
  try {
    c.schema_path = full.at("data").at("schema").get<std::string>();
    c.teacher_path = full.at("teacher").at("path").get<std::string>();
    c.teacher_steps = full.at("teacher").at("steps").get<int>();
    c.probe_samples = full.at("probe").at("n_samples").get<int>();
    c.probe_steps = full.at("probe").at("steps").get<int>();
    c.probe_seed = full.at("probe").at("seed").get<std::uint64_t>();
    c.output_dir = full.at("output_dir").get<std::string>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (int i = 0; i < 2; ++i) {
    c.data[static_cast<std::size_t>(i)] = data_source_from_json(full.at("data").at(domain_key(i)), "data." + domain_key(i));
    c.data[static_cast<std::size_t>(i)].synthetic.image_size = c.model.image_size;
  }
  c.validate();
  return c;
}

Json load_run_config_json(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides) {
  Json j = Json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
  }
  Json full = to_json(run_config_from_json(j));
  for (const auto& [k, v] : overrides) apply_dotted_override(full, k, v);
  run_config_from_json(full);
  return full;
}

AttributeSchema schema_for(const RunConfig& c) {
  if (c.schema_path.empty()) return AttributeSchema::default_schema();
  return load_schema(c.schema_path);
}

DomainData load_domain(const RunConfig& c, const AttributeSchema& schema, DomainId d) {
  const auto& src = c.data[d == DomainId::D1 ? 0 : 1];
  DomainData out;
  if (src.kind == DataSourceKind::Synthetic) {
    CorpusSpec spec = src.synthetic;
    spec.image_size = c.model.image_size;
    const Corpus all = build_corpus(schema, spec);
    const Split split = split_train_test(all.labels.size());
    out.train = subset(all, split.train);
    out.test = subset(all, split.test);
    return out;
  }
  if (!fs::is_directory(src.dir)) throw ConfigError("data directory '" + src.dir + "' does not exist");
  if (fs::exists(fs::path(src.dir) / "attributes.jsonl")) {
    out.train = load_corpus(src.dir, "train", c.model.image_size);
    out.test = load_corpus(src.dir, "test", c.model.image_size);
    return out;
  }
  const LoadedImages loaded = load_image_dir(src.dir, c.model.image_size);
  const Split split = split_train_test(static_cast<std::size_t>(loaded.images.n));
  out.train.images = gather_batch(loaded.images, split.train);
  out.test.images = gather_batch(loaded.images, split.test);
  out.labeled = false;
  return out;
}

Corpus probe_corpus(const RunConfig& c, const AttributeSchema& schema, DomainId d) {
  const int i = d == DomainId::D1 ? 0 : 1;
  const auto& src = c.data[static_cast<std::size_t>(i)];
  if (src.kind == DataSourceKind::Synthetic) {
    CorpusSpec spec;
    spec.n_samples = c.probe_samples;
    spec.style = src.synthetic.style;
    spec.seed = c.probe_seed + static_cast<std::uint64_t>(i);
    spec.image_size = c.model.image_size;
    return build_corpus(schema, spec);
  }
  if (!fs::exists(fs::path(src.dir) / "attributes.jsonl"))
    throw ConfigError("data." + domain_key(i) + ": probes need labeled data (an exported corpus with attributes.jsonl)");
  return load_corpus(src.dir, "train", c.model.image_size);
}

ProbeSpec probe_spec(const RunConfig& c) {
  ProbeSpec s = ProbeSpec::for_image_size(c.model.image_size, c.model.channels);
  s.fit.steps = c.probe_steps;
  return s;
}

}  // namespace xgan
