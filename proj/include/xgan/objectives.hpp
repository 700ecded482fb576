#pragma once

// XGAN loss terms, their weighted sum, gradient assembly for the two training
// phases and a central-difference gradient oracle.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "xgan/model.hpp"
#include "xgan/teacher.hpp"

namespace xgan {

enum class Distance : std::uint8_t { L1, L2 };
enum class GanForm : std::uint8_t { Minimax, NonSaturating };

struct LossWeights {
  double w_dann = 0.3;
  double w_sem = 0.5;
  double w_gan = 0.05;
  double w_teach = 0.1;
  bool gan_2to1_enabled = false;
  bool teach_enabled = false;
  double tv_weight = 0.0;

  /// Throws ConfigError for negative/non-finite weights or teach without a teacher.
  void validate(bool teacher_available) const;
  bool operator==(const LossWeights&) const = default;
};

struct LossConfig {
  Distance sem_distance = Distance::L2;
  Distance teach_distance = Distance::L2;
  GanForm gan_generator_form = GanForm::NonSaturating;
  std::vector<DomainId> teacher_domains{DomainId::D1};

  void validate() const;
  bool operator==(const LossConfig&) const = default;
};

struct LossReport {
  double rec_1 = 0, rec_2 = 0, dann = 0, sem_1to2 = 0, sem_2to1 = 0, gan_gen = 0, gan_disc = 0, teach = 0, tv = 0,
         total = 0;
};

/// rec_1 + rec_2 + w_dann dann + w_sem (sem_1to2 + sem_2to1) + w_gan gan_gen
/// + w_teach teach (when enabled) + tv_weight tv.
double weighted_total(const LossReport& r, const LossWeights& w);

/// Mean over samples of the per-sample distance between a and b.
template <typename T>
T batch_distance(const Tensor<T>& a, const Tensor<T>& b, Distance d);

template <typename T>
T reconstruction_loss(const XganModel<T>& model, const ImageBatch<T>& x, DomainId dom);

template <typename T>
T dann_loss(const XganModel<T>& model, const EmbeddingBatch<T>& z1, const EmbeddingBatch<T>& z2);

/// Gradients the encoders receive from the dann term: -w_dann dL/dz.
template <typename T>
struct DannGradient {
  Tensor<T> dz1, dz2;
};

/// Accumulates w_dann * dL/dtheta into the classifier gradients (if grads
/// non-null and the Classifier group is in mask) and returns the reversed,
/// scaled embedding gradients.
template <typename T>
DannGradient<T> dann_backward(const XganModel<T>& model, const EmbeddingBatch<T>& z1, const EmbeddingBatch<T>& z2,
                              double w_dann, GradSet<T>* grads, GroupMask mask);

template <typename T>
struct SemanticTerms {
  T one_to_two = 0, two_to_one = 0;
  T total() const { return one_to_two + two_to_one; }
};

template <typename T>
SemanticTerms<T> semantic_consistency_loss(const XganModel<T>& model, const ImageBatch<T>& x1,
                                           const ImageBatch<T>& x2, Distance d = Distance::L2);

template <typename T>
struct GanTerms {
  T gen = 0, disc = 0;
};

/// D1->D2 generator/discriminator losses.
template <typename T>
GanTerms<T> gan_losses(const XganModel<T>& model, const ImageBatch<T>& x1, const ImageBatch<T>& x2,
                       GanForm form = GanForm::NonSaturating);

/// E[log D(x2)] + E[log(1 - D(g12(x1)))], the value of the max objective.
template <typename T>
T gan_minimax_value(const XganModel<T>& model, const ImageBatch<T>& x1, const ImageBatch<T>& x2);

template <typename T>
T teacher_loss(const XganModel<T>& model, const TeacherNet<T>& teacher, const ImageBatch<T>& x,
               Distance d = Distance::L2);

/// Mean absolute difference over all horizontally and vertically adjacent pixel pairs.
template <typename T>
T total_variation_loss(const ImageBatch<T>& x);

/// dx += scale * dTV/dx.
template <typename T>
void total_variation_backward(const ImageBatch<T>& x, T scale, ImageBatch<T>& dx);

template <typename T>
LossReport total_loss(const XganModel<T>& model, const TeacherNet<T>* teacher, const ImageBatch<T>& b1,
                      const ImageBatch<T>& b2, const LossWeights& w, const LossConfig& cfg);

enum class Term : std::uint8_t { Rec = 1, Dann = 2, Sem = 4, Gan = 8, Teach = 16, Tv = 32 };

class TermMask {
 public:
  constexpr TermMask() = default;
  static constexpr TermMask all() { return TermMask(0x3f); }
  static constexpr TermMask only(Term t) { return TermMask(static_cast<std::uint8_t>(t)); }
  constexpr TermMask without(Term t) const { return TermMask(bits_ & ~static_cast<std::uint8_t>(t)); }
  constexpr bool contains(Term t) const { return (bits_ & static_cast<std::uint8_t>(t)) != 0; }

 private:
  constexpr explicit TermMask(std::uint8_t b) : bits_(b) {}
  std::uint8_t bits_ = 0;
};

/// Forward pass of the generator phase with every activation recorded, so
/// the weighted objective can be backpropagated once or several times with
/// different group/term masks.
template <typename T>
class GeneratorPass {
 public:
  GeneratorPass(const XganModel<T>& model, const TeacherNet<T>* teacher, const ImageBatch<T>& b1,
                const ImageBatch<T>& b2, const LossWeights& w, const LossConfig& cfg);
  ~GeneratorPass();
  GeneratorPass(GeneratorPass&&) noexcept;

  const LossReport& report() const;
  /// Accumulates gradients of the weighted objective restricted to `terms`
  /// into `grads` for the groups in `mask`. Terms with zero weight contribute nothing.
  void backward(GradSet<T>& grads, GroupMask mask, TermMask terms = TermMask::all()) const;

 private:
  struct State;
  std::unique_ptr<State> s_;
};

/// Accumulates the discriminator-phase gradients into the discriminator
/// groups only and returns the discriminator loss (both directions when the
/// second discriminator is enabled).
template <typename T>
T discriminator_gradients(const XganModel<T>& model, const ImageBatch<T>& b1, const ImageBatch<T>& b2,
                          const LossWeights& w, GradSet<T>& grads);

/// Central differences (f(t+e) - f(t-e)) / 2e per coordinate.
std::vector<double> finite_difference_gradient(const std::function<double(std::span<const double>)>& f,
                                               std::vector<double> theta, double epsilon = 1e-4);

/// Same, over every scalar of the parameters whose group is in `groups`
/// (other entries are left at zero).
GradSet<double> finite_difference_gradient(const std::function<double(const ParamSet<double>&)>& f,
                                           ParamSet<double> params, double epsilon = 1e-4,
                                           GroupMask groups = GroupMask::all());

}  // namespace xgan
