#pragma once

// Multi-head attribute classifier: a conv stack producing a representation,
// followed by one linear head per attribute. Backs both the teacher (whose
// representation is the teacher embedding) and the evaluation probes.

#include <cstdint>
#include <vector>

#include "xgan/model.hpp"
#include "xgan/optim.hpp"

namespace xgan {

struct AttributeNetSpec {
  ConvStackSpec trunk;
  std::vector<int> option_counts;
};

template <typename T>
struct AttributeNet {
  AttributeNetSpec spec;
  ParamSet<T> params;
  Net trunk;
  std::vector<Net> heads;

  int representation_width() const { return spec.trunk.fc_widths.back(); }
};

template <typename T>
AttributeNet<T> build_attribute_net(const AttributeNetSpec& spec, std::uint64_t seed);

struct AttributeFitOptions {
  int steps = 1500;
  int batch_size = 32;
  AdamSettings adam{1e-3, 0.9, 0.999, 1e-8};
  std::uint64_t seed = 0;
};

/// Supervised cross-entropy fit of all heads jointly.
template <typename T>
void fit_attribute_net(AttributeNet<T>& net, const ImageBatch<T>& images, const std::vector<std::vector<int>>& labels,
                       const AttributeFitOptions& opts);

/// Returns predictions[sample][attribute].
template <typename T>
std::vector<std::vector<int>> predict_attributes(const AttributeNet<T>& net, const ImageBatch<T>& images);

/// Per-attribute accuracy of predictions against labels.
std::vector<double> attribute_accuracy(const std::vector<std::vector<int>>& predicted,
                                       const std::vector<std::vector<int>>& labels);

}  // namespace xgan
