#pragma once

// Quantitative evaluation: attribute preservation through probe classifiers,
// domain confusion of the shared embedding, embedding consistency,
// reconstruction error, output roughness, sample grids and the ablation suite.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xgan/attribute_net.hpp"
#include "xgan/config.hpp"
#include "xgan/domains.hpp"
#include "xgan/objectives.hpp"
#include "xgan/teacher.hpp"
#include "xgan/trainer.hpp"

namespace xgan {

inline constexpr double kProbeValidityGate = 0.95;
inline constexpr double kProbeAlignmentGate = 0.99;

struct ProbeSpec {
  ConvStackSpec trunk;
  AttributeFitOptions fit{2000, 32, {1e-3, 0.9, 0.999, 1e-8}, 0};
  double holdout_fraction = 0.2;

  static ProbeSpec for_image_size(int image_size, int channels = 3);
};

/// Frozen per-attribute classifier trained on one style's labeled renders.
class ProbeClassifier {
 public:
  ProbeClassifier() = default;
  ProbeClassifier(AttributeNet<float> net, std::vector<std::string> attribute_names, std::vector<double> heldout,
                  std::string style)
      : net_(std::move(net)), names_(std::move(attribute_names)), heldout_(std::move(heldout)),
        style_(std::move(style)) {}

  const AttributeNet<float>& net() const { return net_; }
  const std::vector<std::string>& attribute_names() const { return names_; }
  const std::vector<int>& option_counts() const { return net_.spec.option_counts; }
  const std::vector<double>& heldout_accuracy() const { return heldout_; }
  const std::string& style() const { return style_; }
  int image_size() const { return net_.spec.trunk.image_size; }
  double min_heldout_accuracy() const;

  std::vector<AttributeVector> predict(const ImageBatch<float>& images) const;

  /// ConfigError unless attribute names and option counts match the schema.
  void check_schema(const AttributeSchema& schema) const;
  /// DataError when any held-out accuracy is below the gate.
  void check_valid(double gate = kProbeValidityGate) const;

 private:
  AttributeNet<float> net_;
  std::vector<std::string> names_;
  std::vector<double> heldout_;
  std::string style_;
};

/// Fits on the leading (1 - holdout) part of the corpus and records accuracy on the rest.
ProbeClassifier train_probe(const Corpus& corpus, const AttributeSchema& schema, const ProbeSpec& spec,
                            const std::string& style, std::uint64_t seed);

void save_probe(const ProbeClassifier& probe, const std::string& path);
ProbeClassifier load_probe(const std::string& path);

using Translator = std::function<ImageBatch<float>(const ImageBatch<float>&)>;

struct PreservationResult {
  std::vector<std::string> attributes;
  std::vector<double> rates;
  std::vector<double> chance;  // majority-class rate of the scored labels
  double macro = 0.0;
  double chance_macro = 0.0;
};

/// Translates every image, predicts attributes with the target-style probe and
/// scores them against the source ground truth.
PreservationResult attribute_preservation(const Translator& translator, const ProbeClassifier& probe,
                                          const ImageBatch<float>& images, const std::vector<AttributeVector>& labels,
                                          int chunk = 64);
PreservationResult attribute_preservation(const XganModel<float>& model, const ProbeClassifier& target_probe,
                                          const ImageBatch<float>& images, const std::vector<AttributeVector>& labels,
                                          DomainId from);

/// Accuracy of the model's domain classifier on held-out embeddings of both
/// domains; p >= 0.5 is read as D2.
double domain_confusion(const XganModel<float>& model, const ImageBatch<float>& test1, const ImageBatch<float>& test2);

/// Semantic consistency distances per direction, batch-weighted over chunks.
SemanticTerms<double> embedding_consistency(const XganModel<float>& model, const ImageBatch<float>& test1,
                                            const ImageBatch<float>& test2, Distance d = Distance::L2);

double mean_reconstruction_error(const XganModel<float>& model, const ImageBatch<float>& x, DomainId d);
/// Mean total variation of the translations of x.
double translation_roughness(const XganModel<float>& model, const ImageBatch<float>& x, DomainId from);

struct GridLayout {
  int pairs_per_row = 4;
  int tile_size = 0;  // 0 keeps the image size
};

/// (input, output) tiles row-wise; returns the written width and height.
std::pair<int, int> write_sample_grid(const ImageBatch<float>& inputs, const ImageBatch<float>& outputs,
                                      const std::string& path, const GridLayout& layout = {});
std::pair<int, int> sample_grid(const XganModel<float>& model, const ImageBatch<float>& inputs, DomainId from,
                                const std::string& path, const GridLayout& layout = {});

struct EvalData {
  ImageBatch<float> test1, test2;
  std::vector<AttributeVector> labels1, labels2;
};

struct EvalReport {
  std::string mode;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  std::string config_fingerprint;
  std::vector<std::string> attributes;
  std::vector<double> preservation_1to2, chance_1to2;
  double macro_1to2 = 0, chance_macro_1to2 = 0;
  std::vector<double> preservation_2to1, chance_2to1;
  double macro_2to1 = 0, chance_macro_2to1 = 0;
  bool has_1to2 = false, has_2to1 = false;
  double domain_confusion = 0;
  double embedding_distance_1to2 = 0, embedding_distance_2to1 = 0;
  double reconstruction_1 = 0, reconstruction_2 = 0;
  double roughness_1to2 = 0;
  std::string error;  // set when the mode failed to train or evaluate

  double mean_embedding_distance() const { return 0.5 * (embedding_distance_1to2 + embedding_distance_2to1); }
};

Json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const Json& j);
void append_report(const EvalReport& r, const std::string& path);
std::string config_fingerprint(const ModelConfig& m, const TrainConfig& t);

/// Probes are optional per direction; a probe failing the validity gate makes
/// this throw instead of reporting preservation.
EvalReport evaluate(const XganModel<float>& model, const EvalData& data, const ProbeClassifier* probe_d2,
                    const ProbeClassifier* probe_d1, Distance sem_distance = Distance::L2);

struct AblationInputs {
  ModelConfig model;
  TrainConfig train;
  ImageBatch<float> train1, train2;
  EvalData eval;
  const ProbeClassifier* probe_d2 = nullptr;
  const ProbeClassifier* probe_d1 = nullptr;
  const TeacherNet<float>* teacher = nullptr;
};

struct AblationRow {
  TrainMode mode;
  std::vector<EvalReport> runs;  // one per seed
  EvalReport median;             // component-wise median over successful runs
  std::string error;             // non-empty when every seed failed
};

struct AblationOptions {
  std::vector<TrainMode> modes{TrainMode::FullXgan};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  /// Called after each finished run; may write partial results.
  std::function<void(const EvalReport&)> on_run;
  /// Training metric stream of each (mode, seed) run.
  std::function<void(TrainMode, std::uint64_t, const MetricRecord&)> on_metrics;
};

/// Trains and evaluates every (mode, seed); failures are recorded per run and
/// the suite moves on.
std::vector<AblationRow> ablation_suite(const AblationInputs& in, const AblationOptions& opts);

EvalReport median_report(const std::vector<EvalReport>& runs);
std::string format_ablation_table(const std::vector<AblationRow>& rows);

}  // namespace xgan
