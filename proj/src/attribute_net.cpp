#include "xgan/attribute_net.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "xgan/errors.hpp"

namespace xgan {

template <typename T>
AttributeNet<T> build_attribute_net(const AttributeNetSpec& spec, std::uint64_t seed) {
  if (spec.option_counts.empty()) throw ConfigError("attribute net needs at least one attribute");
  if (spec.trunk.fc_widths.empty()) throw ConfigError("attribute net trunk needs at least one fc layer");
  AttributeNet<T> net;
  net.spec = spec;
  net.trunk = build_conv_stack(net.params, spec.trunk, "trunk", ParamGroup::Trunk);
  const int rep = spec.trunk.fc_widths.back();
  for (std::size_t a = 0; a < spec.option_counts.size(); ++a) {
    if (spec.option_counts[a] < 2) throw ConfigError("attribute " + std::to_string(a) + " needs >= 2 options");
    Net head{rep, 1, 1, {}};
    head.ops.push_back(Op{OpKind::LeakyRelu});
    Op lin{OpKind::Linear};
    const std::string p = "head." + std::to_string(a);
    lin.weight = net.params.add(p + ".weight", ParamGroup::Head, Tensor<T>(spec.option_counts[a], rep, 1, 1));
    lin.bias = net.params.add(p + ".bias", ParamGroup::Head, Tensor<T>(spec.option_counts[a], 1, 1, 1));
    lin.block = "logits";
    head.ops.push_back(lin);
    net.heads.push_back(std::move(head));
  }
  init_gaussian(net.params, seed, 0.02);
  // He-style scaling keeps the small trunk trainable from a cold start.
  for (auto& p : net.params) {
    if (p.value.n == 0 || p.name.ends_with(".bias")) continue;
    const double fan_in = static_cast<double>(p.value.sample_size());
    const T scale = static_cast<T>(std::sqrt(2.0 / fan_in) / 0.02);
    for (auto& v : p.value.data) v *= scale;
  }
  return net;
}

namespace {

void check_labels(std::size_t n, const std::vector<std::vector<int>>& labels, const std::vector<int>& counts) {
  if (labels.size() != n)
    throw DataError("label count " + std::to_string(labels.size()) + " does not match corpus size " +
                    std::to_string(n));
  for (const auto& l : labels) {
    if (l.size() != counts.size()) throw DataError("label vector has wrong attribute count");
    for (std::size_t a = 0; a < l.size(); ++a)
      if (l[a] < 0 || l[a] >= counts[a]) throw DataError("label out of range for attribute " + std::to_string(a));
  }
}

}  // namespace

template <typename T>
void fit_attribute_net(AttributeNet<T>& net, const ImageBatch<T>& images, const std::vector<std::vector<int>>& labels,
                       const AttributeFitOptions& opts) {
  const std::size_t n = static_cast<std::size_t>(images.n);
  check_labels(n, labels, net.spec.option_counts);
  if (n == 0) throw DataError("empty training corpus");
  GradSet<T> grads(net.params), m(net.params), v(net.params);
  std::mt19937_64 rng(opts.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t cursor = 0;
  const std::size_t bs = std::min<std::size_t>(static_cast<std::size_t>(opts.batch_size), n);
  const std::size_t A = net.heads.size();
  std::vector<std::size_t> idx(bs);
  for (int step = 0; step < opts.steps; ++step) {
    for (auto& i : idx) {
      if (cursor == n) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      i = order[cursor++];
    }
    ImageBatch<T> x = gather_batch(images, idx);
    Trace<T> trunk_trace;
    Tensor<T> rep = run_forward(net.params, net.trunk, x, &trunk_trace);
    Tensor<T> drep(rep.n, rep.c, rep.h, rep.w);
    grads.zero();
    for (std::size_t a = 0; a < A; ++a) {
      Trace<T> tr;
      Tensor<T> logits = run_forward(net.params, net.heads[a], rep, &tr);
      Tensor<T> dl(logits.n, logits.c, 1, 1);
      const int K = logits.c;
      for (int s = 0; s < logits.n; ++s) {
        const T* l = logits.ptr() + static_cast<std::size_t>(s) * K;
        T* d = dl.ptr() + static_cast<std::size_t>(s) * K;
        const T mx = *std::max_element(l, l + K);
        T z = 0;
        for (int k = 0; k < K; ++k) z += std::exp(l[k] - mx);
        for (int k = 0; k < K; ++k) d[k] = std::exp(l[k] - mx) / z / static_cast<T>(logits.n * A);
        d[labels[idx[s]][a]] -= T(1) / static_cast<T>(logits.n * A);
      }
      Tensor<T> dr = run_backward(net.params, net.heads[a], tr, dl, &grads, GroupMask::all());
      for (std::size_t k = 0; k < dr.data.size(); ++k) drep.data[k] += dr.data[k];
    }
    run_backward(net.params, net.trunk, trunk_trace, drep, &grads, GroupMask::all(), false);
    adam_step(net.params, grads, m, v, step + 1, opts.adam, GroupMask::all());
  }
}

template <typename T>
std::vector<std::vector<int>> predict_attributes(const AttributeNet<T>& net, const ImageBatch<T>& images) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(images.n), std::vector<int>(net.heads.size()));
  constexpr int kChunk = 64;
  for (int b = 0; b < images.n; b += kChunk) {
    const int e = std::min(images.n, b + kChunk);
    Tensor<T> rep = run_forward(net.params, net.trunk, slice_batch(images, b, e));
    for (std::size_t a = 0; a < net.heads.size(); ++a) {
      Tensor<T> logits = run_forward(net.params, net.heads[a], rep);
      for (int s = 0; s < logits.n; ++s) {
        const T* l = logits.ptr() + static_cast<std::size_t>(s) * logits.c;
        out[static_cast<std::size_t>(b + s)][a] = static_cast<int>(std::max_element(l, l + logits.c) - l);
      }
    }
  }
  return out;
}

std::vector<double> attribute_accuracy(const std::vector<std::vector<int>>& predicted,
                                       const std::vector<std::vector<int>>& labels) {
  if (predicted.size() != labels.size() || predicted.empty())
    throw DataError("prediction/label count mismatch or empty set");
  const std::size_t A = labels.front().size();
  std::vector<double> acc(A, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predicted[i].size() != A || labels[i].size() != A) throw DataError("attribute count mismatch");
    for (std::size_t a = 0; a < A; ++a) acc[a] += predicted[i][a] == labels[i][a] ? 1.0 : 0.0;
  }
  for (auto& x : acc) x /= static_cast<double>(labels.size());
  return acc;
}

template AttributeNet<float> build_attribute_net<float>(const AttributeNetSpec&, std::uint64_t);
template AttributeNet<double> build_attribute_net<double>(const AttributeNetSpec&, std::uint64_t);
template void fit_attribute_net<float>(AttributeNet<float>&, const ImageBatch<float>&,
                                       const std::vector<std::vector<int>>&, const AttributeFitOptions&);
template void fit_attribute_net<double>(AttributeNet<double>&, const ImageBatch<double>&,
                                        const std::vector<std::vector<int>>&, const AttributeFitOptions&);
template std::vector<std::vector<int>> predict_attributes<float>(const AttributeNet<float>&, const ImageBatch<float>&);
template std::vector<std::vector<int>> predict_attributes<double>(const AttributeNet<double>&,
                                                                  const ImageBatch<double>&);

}  // namespace xgan
