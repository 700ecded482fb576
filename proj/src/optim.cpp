#include "xgan/optim.hpp"

#include <cmath>

namespace xgan {

template <typename T>
void adam_step(ParamSet<T>& params, const GradSet<T>& grads, GradSet<T>& m, GradSet<T>& v, std::int64_t t,
               const AdamSettings& s, GroupMask mask) {
  // Update arithmetic runs in double; only storage is T.
  const double b1 = s.beta1, b2 = s.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
  const double lr = s.learning_rate, eps = s.epsilon;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!mask.contains(params[i].group)) continue;
    auto& p = params[i].value.data;
    const auto& g = grads[i].data;
    auto& mi = m[i].data;
    auto& vi = v[i].data;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(p.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) {
      const double gk = g[k];
      const double mk = b1 * mi[k] + (1.0 - b1) * gk;
      const double vk = b2 * vi[k] + (1.0 - b2) * gk * gk;
      mi[k] = static_cast<T>(mk);
      vi[k] = static_cast<T>(vk);
      p[k] = static_cast<T>(p[k] - lr * (mk / c1) / (std::sqrt(vk / c2) + eps));
    }
  }
}

template void adam_step<float>(ParamSet<float>&, const GradSet<float>&, GradSet<float>&, GradSet<float>&,
                               std::int64_t, const AdamSettings&, GroupMask);
template void adam_step<double>(ParamSet<double>&, const GradSet<double>&, GradSet<double>&, GradSet<double>&,
                                std::int64_t, const AdamSettings&, GroupMask);

}  // namespace xgan
