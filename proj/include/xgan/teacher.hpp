#pragma once

// Frozen attribute-supervised teacher embedding. Its trunk is built with the
// model encoder's topology so the representation width is the embedding width
// and the weights can seed the encoders in the DTN baselines.

#include <vector>

#include "xgan/attribute_net.hpp"
#include "xgan/errors.hpp"
#include "xgan/model.hpp"

namespace xgan {

struct TeacherConfig {
  ConvStackSpec trunk;
  AttributeFitOptions fit{3000, 32, {1e-3, 0.9, 0.999, 1e-8}, 0};
  double holdout_fraction = 0.2;
  std::uint64_t seed = 0;

  /// Trunk identical in shape to the model encoder (conv widths, fc1, fc2).
  static TeacherConfig matching(const ModelConfig& model);
};

template <typename T>
class TeacherNet {
 public:
  TeacherNet() = default;
  TeacherNet(AttributeNet<T> net, std::vector<double> heldout_accuracy)
      : net_(std::move(net)), heldout_accuracy_(std::move(heldout_accuracy)) {}

  const AttributeNet<T>& net() const { return net_; }
  const ParamSet<T>& params() const { return net_.params; }
  bool frozen() const { return frozen_; }
  int embed_dim() const { return net_.representation_width(); }
  int image_size() const { return net_.spec.trunk.image_size; }
  const std::vector<double>& heldout_accuracy() const { return heldout_accuracy_; }

  /// Write access to the parameters; any use on a frozen teacher is a
  /// contract violation.
  ParamSet<T>& mutable_params() {
    if (frozen_) throw FrozenError("teacher is frozen; parameter updates are not allowed");
    return net_.params;
  }
  void freeze() { frozen_ = true; }

  template <typename U>
  TeacherNet<U> cast() const {
    AttributeNet<U> n{net_.spec, net_.params.template cast<U>(), net_.trunk, net_.heads};
    TeacherNet<U> out(std::move(n), heldout_accuracy_);
    if (frozen_) out.freeze();
    return out;
  }

 private:
  AttributeNet<T> net_;
  std::vector<double> heldout_accuracy_;
  bool frozen_ = false;
};

/// Fits an attribute classifier on the first (1 - holdout) fraction of the
/// corpus, measures accuracy on the rest and returns it frozen.
TeacherNet<float> train_teacher(const ImageBatch<float>& corpus, const std::vector<std::vector<int>>& labels,
                                const std::vector<int>& option_counts, const TeacherConfig& config);

template <typename T>
EmbeddingBatch<T> teacher_embed(const TeacherNet<T>& teacher, const ImageBatch<T>& x);

/// Throws ConfigError unless the teacher output width and input size match the model.
template <typename T>
void check_teacher_compatible(const ModelConfig& model, const TeacherNet<T>& teacher);

/// True when the teacher trunk has exactly the model encoder's layer shapes.
template <typename T>
bool teacher_matches_encoder(const ModelConfig& model, const TeacherNet<T>& teacher);

}  // namespace xgan
