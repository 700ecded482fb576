#include "xgan/teacher.hpp"

#include <cmath>

namespace xgan {

TeacherConfig TeacherConfig::matching(const ModelConfig& model) {
  TeacherConfig c;
  c.trunk = ConvStackSpec{model.image_size, model.channels, model.encoder_widths,
                          {model.encoder_fc_width, model.embed_dim}, model.instance_norm};
  return c;
}

TeacherNet<float> train_teacher(const ImageBatch<float>& corpus, const std::vector<std::vector<int>>& labels,
                                const std::vector<int>& option_counts, const TeacherConfig& config) {
  if (labels.size() != static_cast<std::size_t>(corpus.n))
    throw DataError("teacher corpus has " + std::to_string(corpus.n) + " images but " +
                    std::to_string(labels.size()) + " label vectors");
  if (!(config.holdout_fraction > 0.0 && config.holdout_fraction < 1.0))
    throw ConfigError("teacher.holdout_fraction must be in (0, 1)");
  const int n_test = static_cast<int>(std::floor(corpus.n * config.holdout_fraction));
  const int n_train = corpus.n - n_test;
  if (n_train < 1 || n_test < 1) throw DataError("teacher corpus too small for a held-out split");

  AttributeNet<float> net = build_attribute_net<float>({config.trunk, option_counts}, config.seed);
  std::vector<std::vector<int>> train_labels(labels.begin(), labels.begin() + n_train);
  std::vector<std::vector<int>> test_labels(labels.begin() + n_train, labels.end());
  AttributeFitOptions fit = config.fit;
  fit.seed = config.seed;
  fit_attribute_net(net, slice_batch(corpus, 0, n_train), train_labels, fit);
  auto acc = attribute_accuracy(predict_attributes(net, slice_batch(corpus, n_train, corpus.n)), test_labels);
  TeacherNet<float> teacher(std::move(net), std::move(acc));
  teacher.freeze();
  return teacher;
}

template <typename T>
EmbeddingBatch<T> teacher_embed(const TeacherNet<T>& teacher, const ImageBatch<T>& x) {
  return run_forward(teacher.params(), teacher.net().trunk, x);
}

template <typename T>
void check_teacher_compatible(const ModelConfig& model, const TeacherNet<T>& teacher) {
  if (teacher.embed_dim() != model.embed_dim)
    throw ConfigError("teacher output width " + std::to_string(teacher.embed_dim()) +
                      " does not match model.embed_dim " + std::to_string(model.embed_dim));
  if (teacher.image_size() != model.image_size || teacher.net().spec.trunk.channels != model.channels)
    throw ConfigError("teacher input size does not match model.image_size/channels");
}

template <typename T>
bool teacher_matches_encoder(const ModelConfig& model, const TeacherNet<T>& teacher) {
  const auto& s = teacher.net().spec.trunk;
  return s.image_size == model.image_size && s.channels == model.channels && s.conv_widths == model.encoder_widths &&
         s.fc_widths == std::vector<int>{model.encoder_fc_width, model.embed_dim} &&
         s.instance_norm == model.instance_norm;
}

template EmbeddingBatch<float> teacher_embed<float>(const TeacherNet<float>&, const ImageBatch<float>&);
template EmbeddingBatch<double> teacher_embed<double>(const TeacherNet<double>&, const ImageBatch<double>&);
template void check_teacher_compatible<float>(const ModelConfig&, const TeacherNet<float>&);
template void check_teacher_compatible<double>(const ModelConfig&, const TeacherNet<double>&);
template bool teacher_matches_encoder<float>(const ModelConfig&, const TeacherNet<float>&);
template bool teacher_matches_encoder<double>(const ModelConfig&, const TeacherNet<double>&);

}  // namespace xgan
