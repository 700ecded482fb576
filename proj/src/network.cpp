#include "xgan/network.hpp"

#include "xgan/kernels.hpp"

namespace xgan {

template <typename T>
int ParamSet<T>::add(std::string name, ParamGroup group, Tensor<T> value) {
  if (find(name)) throw ConfigError("duplicate parameter name: " + name);
  params_.push_back({std::move(name), group, std::move(value)});
  return static_cast<int>(params_.size() - 1);
}

template <typename T>
std::optional<std::size_t> ParamSet<T>::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return i;
  return std::nullopt;
}

template <typename T>
std::size_t ParamSet<T>::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

namespace {


template <typename T>
const Tensor<T>& bias_of(const ParamSet<T>& params, const Op& op) {
  static const Tensor<T> empty;
  return op.bias >= 0 ? params[op.bias].value : empty;
}

template <typename T>
Tensor<T> apply(const ParamSet<T>& params, const Op& op, const Tensor<T>& x) {
  Tensor<T> y;
  switch (op.kind) {
    case OpKind::Conv:
      kernels::conv2d_forward(x, params[op.weight].value, bias_of(params, op), y);
      break;
    case OpKind::Deconv:
      kernels::deconv2d_forward(x, params[op.weight].value, bias_of(params, op), y);
      break;
    case OpKind::Linear:
      kernels::linear_forward(x, params[op.weight].value, bias_of(params, op), y);
      break;
    case OpKind::LeakyRelu:
      kernels::leaky_relu_forward(x, y, static_cast<T>(kLeakySlope));
      break;
    case OpKind::Relu:
      kernels::relu_forward(x, y);
      break;
    case OpKind::Tanh:
      kernels::tanh_forward(x, y);
      break;
    case OpKind::InstanceNorm:
      kernels::instance_norm_forward(x, y, static_cast<T>(kInstanceNormEps));
      break;
    case OpKind::Reshape:
      if (x.sample_size() != static_cast<std::size_t>(op.c) * op.h * op.w)
        throw DimensionError("reshape: element count mismatch");
      y = x;
      y.c = op.c;
      y.h = op.h;
      y.w = op.w;
      break;
  }
  return y;
}

}  // namespace

template <typename T>
Tensor<T> run_forward(const ParamSet<T>& params, const Net& net, const Tensor<T>& x, Trace<T>* trace) {
  require_shape(x, net.in_c, net.in_h, net.in_w, "network input");
  if (trace) {
    trace->acts.clear();
    trace->acts.reserve(net.ops.size() + 1);
    trace->acts.push_back(x);
    for (const auto& op : net.ops) trace->acts.push_back(apply(params, op, trace->acts.back()));
    return trace->acts.back();
  }
  Tensor<T> cur = x;
  for (const auto& op : net.ops) cur = apply(params, op, cur);
  return cur;
}

template <typename T>
Tensor<T> run_backward(const ParamSet<T>& params, const Net& net, const Trace<T>& trace, const Tensor<T>& dy,
                       GradSet<T>* grads, GroupMask mask, bool want_dx) {
  if (trace.acts.size() != net.ops.size() + 1) throw DimensionError("run_backward: trace does not match net");
  if (!dy.same_shape(trace.acts.back())) {
    throw DimensionError("run_backward: gradient " + dy.shape_string() + " vs output " +
                         trace.acts.back().shape_string());
  }
  // Lowest op index that still needs a parameter gradient; below it only dx matters.
  int lowest_param = static_cast<int>(net.ops.size());
  if (grads) {
    for (int i = 0; i < static_cast<int>(net.ops.size()); ++i) {
      const Op& op = net.ops[i];
      if (op.weight >= 0 && mask.contains(params[op.weight].group)) {
        lowest_param = i;
        break;
      }
    }
  }
  const int stop = want_dx ? 0 : lowest_param;

  Tensor<T> g = dy;
  Tensor<T> dx;
  for (int i = static_cast<int>(net.ops.size()) - 1; i >= stop; --i) {
    const Op& op = net.ops[i];
    const Tensor<T>& in = trace.acts[i];
    const Tensor<T>& out = trace.acts[i + 1];
    const bool need_dx = want_dx || i > stop;
    Tensor<T>* dw = nullptr;
    Tensor<T>* db = nullptr;
    if (grads && op.weight >= 0 && mask.contains(params[op.weight].group)) {
      dw = &(*grads)[op.weight];
      if (op.bias >= 0) db = &(*grads)[op.bias];
    }
    switch (op.kind) {
      case OpKind::Conv:
        kernels::conv2d_backward(in, params[op.weight].value, g, need_dx ? &dx : nullptr, dw, db);
        break;
      case OpKind::Deconv:
        kernels::deconv2d_backward(in, params[op.weight].value, g, need_dx ? &dx : nullptr, dw, db);
        break;
      case OpKind::Linear:
        kernels::linear_backward(in, params[op.weight].value, g, need_dx ? &dx : nullptr, dw, db);
        break;
      case OpKind::LeakyRelu:
        kernels::leaky_relu_backward(in, g, dx, static_cast<T>(kLeakySlope));
        break;
      case OpKind::Relu:
        kernels::relu_backward(in, g, dx);
        break;
      case OpKind::Tanh:
        kernels::tanh_backward(out, g, dx);
        break;
      case OpKind::InstanceNorm:
        kernels::instance_norm_backward(in, g, dx, static_cast<T>(kInstanceNormEps));
        break;
      case OpKind::Reshape:
        dx = g;
        dx.c = in.c;
        dx.h = in.h;
        dx.w = in.w;
        break;
    }
    if (need_dx) g = std::move(dx);
  }
  if (!want_dx) return {};
  return g;
}

template <typename T>
std::vector<BlockShape> block_shapes(const Net& net, const Trace<T>& trace) {
  std::vector<BlockShape> out;
  for (std::size_t i = 0; i < net.ops.size(); ++i) {
    if (net.ops[i].block.empty()) continue;
    const auto& a = trace.acts[i + 1];
    out.push_back({net.ops[i].block, a.c, a.h, a.w});
  }
  return out;
}

template class ParamSet<float>;
template class ParamSet<double>;
template Tensor<float> run_forward(const ParamSet<float>&, const Net&, const Tensor<float>&, Trace<float>*);
template Tensor<double> run_forward(const ParamSet<double>&, const Net&, const Tensor<double>&, Trace<double>*);
template Tensor<float> run_backward(const ParamSet<float>&, const Net&, const Trace<float>&, const Tensor<float>&,
                                    GradSet<float>*, GroupMask, bool);
template Tensor<double> run_backward(const ParamSet<double>&, const Net&, const Trace<double>&,
                                     const Tensor<double>&, GradSet<double>*, GroupMask, bool);
template std::vector<BlockShape> block_shapes(const Net&, const Trace<float>&);
template std::vector<BlockShape> block_shapes(const Net&, const Trace<double>&);

}  // namespace xgan
