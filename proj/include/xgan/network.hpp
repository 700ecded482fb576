#pragma once

// Parameter storage and a minimal sequential executor with an explicit tape.
// A Net is a path of ops referencing parameters by index into a ParamSet, so
// two Nets that name the same index share storage physically.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xgan/tensor.hpp"

namespace xgan {

enum class ParamGroup : std::uint8_t {
  EncPrivate1,
  EncPrivate2,
  EncShared,
  DecShared,
  DecPrivate1,
  DecPrivate2,
  Classifier,
  Discriminator,
  Discriminator2to1,
  Trunk,
  Head,
};

class GroupMask {
 public:
  constexpr GroupMask() = default;
  static constexpr GroupMask all() { return GroupMask(~0u); }
  static constexpr GroupMask none() { return GroupMask(0u); }
  static constexpr GroupMask of(std::initializer_list<ParamGroup> gs) {
    std::uint32_t b = 0;
    for (auto g : gs) b |= bit(g);
    return GroupMask(b);
  }
  constexpr GroupMask with(ParamGroup g) const { return GroupMask(bits_ | bit(g)); }
  constexpr GroupMask without(ParamGroup g) const { return GroupMask(bits_ & ~bit(g)); }
  constexpr bool contains(ParamGroup g) const { return (bits_ & bit(g)) != 0; }
  constexpr bool operator==(const GroupMask&) const = default;

 private:
  constexpr explicit GroupMask(std::uint32_t b) : bits_(b) {}
  static constexpr std::uint32_t bit(ParamGroup g) { return 1u << static_cast<unsigned>(g); }
  std::uint32_t bits_ = 0;
};

template <typename T>
struct Param {
  std::string name;
  ParamGroup group;
  Tensor<T> value;
};

template <typename T>
class ParamSet {
 public:
  int add(std::string name, ParamGroup group, Tensor<T> value);

  std::size_t size() const { return params_.size(); }
  Param<T>& operator[](std::size_t i) { return params_[i]; }
  const Param<T>& operator[](std::size_t i) const { return params_[i]; }
  std::optional<std::size_t> find(const std::string& name) const;

  /// Total number of scalar values.
  std::size_t scalar_count() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    for (const auto& p : params_) out.add(p.name, p.group, p.value.template cast<U>());
    return out;
  }

 private:
  std::vector<Param<T>> params_;
};

/// Gradient (or optimizer moment) buffers parallel to a ParamSet.
template <typename T>
struct GradSet {
  std::vector<Tensor<T>> grads;

  GradSet() = default;
  explicit GradSet(const ParamSet<T>& params) {
    grads.reserve(params.size());
    for (const auto& p : params) grads.emplace_back(p.value.n, p.value.c, p.value.h, p.value.w);
  }
  void zero() {
    for (auto& g : grads) g.zero();
  }
  Tensor<T>& operator[](std::size_t i) { return grads[i]; }
  const Tensor<T>& operator[](std::size_t i) const { return grads[i]; }
  std::size_t size() const { return grads.size(); }
};

enum class OpKind : std::uint8_t { Conv, Deconv, Linear, LeakyRelu, Relu, Tanh, InstanceNorm, Reshape };

struct Op {
  Op() = default;
  explicit Op(OpKind k) : kind(k) {}

  OpKind kind = OpKind::Linear;
  int weight = -1;
  int bias = -1;
  // Reshape target; ignored otherwise.
  int c = 0, h = 0, w = 0;
  // Non-empty on the op that closes a named block (e.g. "conv3").
  std::string block;
};

struct Net {
  int in_c = 0, in_h = 1, in_w = 1;
  std::vector<Op> ops;
};

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kInstanceNormEps = 1e-5;

/// acts[i] is the input of op i; acts.back() is the output.
template <typename T>
struct Trace {
  std::vector<Tensor<T>> acts;
};

struct BlockShape {
  std::string name;
  int c, h, w;
  bool operator==(const BlockShape&) const = default;
};

template <typename T>
Tensor<T> run_forward(const ParamSet<T>& params, const Net& net, const Tensor<T>& x, Trace<T>* trace = nullptr);

/// Backpropagates dy through a recorded trace. Parameter gradients are
/// accumulated into `grads` only for groups in `mask` (and only if grads is
/// non-null). Returns the gradient w.r.t. the net input when want_dx.
template <typename T>
Tensor<T> run_backward(const ParamSet<T>& params, const Net& net, const Trace<T>& trace, const Tensor<T>& dy,
                       GradSet<T>* grads, GroupMask mask, bool want_dx = true);

/// Output shape of every named block in a recorded trace, in order.
template <typename T>
std::vector<BlockShape> block_shapes(const Net& net, const Trace<T>& trace);

}  // namespace xgan
