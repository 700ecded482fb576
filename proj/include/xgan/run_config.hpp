#pragma once

// Top-level run configuration shared by the command-line tool: model and
// training settings, one data source per domain, teacher/probe settings and
// the output directory.

#include <array>
#include <optional>
#include <string>

#include "xgan/config.hpp"
#include "xgan/domains.hpp"
#include "xgan/evalkit.hpp"

namespace xgan {

enum class DataSourceKind : std::uint8_t { Synthetic, Directory };

struct DataSource {
  DataSourceKind kind = DataSourceKind::Synthetic;
  CorpusSpec synthetic;  // image_size follows the model
  std::string dir;       // exported corpus (with attributes.jsonl) or plain PNG directory
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::string schema_path;  // empty selects the built-in schema
  std::array<DataSource, 2> data;
  std::string teacher_path;
  int teacher_steps = 3000;
  int probe_samples = 2500;
  int probe_steps = 2000;
  std::uint64_t probe_seed = 100;
  std::string output_dir = "runs/default";

  RunConfig();
  void validate() const;
};

Json to_json(const DataSource& d);
Json to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);
/// Reads a JSON file (empty path: defaults) and applies dotted overrides in order.
Json load_run_config_json(const std::string& path, const std::vector<std::pair<std::string, std::string>>& overrides);

AttributeSchema schema_for(const RunConfig& c);

struct DomainData {
  Corpus train, test;
  bool labeled = true;
};

/// Synthetic sources are generated and split 80/20; exported corpora use
/// their manifests; plain image directories are split by filename order.
DomainData load_domain(const RunConfig& c, const AttributeSchema& schema, DomainId d);

/// Labeled corpus for fitting a style probe of domain d: a fresh synthetic
/// corpus with the domain's style, or the train split of a labeled export.
Corpus probe_corpus(const RunConfig& c, const AttributeSchema& schema, DomainId d);

ProbeSpec probe_spec(const RunConfig& c);

}  // namespace xgan
