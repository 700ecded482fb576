#pragma once

#include <cstdint>

#include "xgan/network.hpp"

namespace xgan {

struct AdamSettings {
  double learning_rate = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One Adam update on every parameter whose group is in `mask`. `t` is the
/// 1-based update count used for bias correction.
template <typename T>
void adam_step(ParamSet<T>& params, const GradSet<T>& grads, GradSet<T>& m, GradSet<T>& v, std::int64_t t,
               const AdamSettings& s, GroupMask mask);

}  // namespace xgan
