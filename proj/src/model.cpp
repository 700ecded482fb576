#include "xgan/model.hpp"

#include <random>

namespace xgan {
namespace {

constexpr int kKernel = 4;

std::size_t conv_params(int cin, int cout) { return static_cast<std::size_t>(cin) * cout * kKernel * kKernel + cout; }
std::size_t linear_params(std::size_t in, std::size_t out) { return in * out + out; }

void require(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw ConfigError("model." + field + ": " + why);
}

template <typename T>
class NetBuilder {
 public:
  NetBuilder(ParamSet<T>& params, bool instance_norm) : params_(params), instance_norm_(instance_norm) {}

  int param(const std::string& name, ParamGroup group, int n, int c, int h = 1, int w = 1) {
    if (auto idx = params_.find(name)) return static_cast<int>(*idx);
    return params_.add(name, group, Tensor<T>(n, c, h, w));
  }

  void conv(Net& net, const std::string& prefix, ParamGroup g, int cin, int cout, bool norm) {
    Op op{OpKind::Conv};
    op.weight = param(prefix + ".weight", g, cout, cin, kKernel, kKernel);
    op.bias = param(prefix + ".bias", g, cout, 1);
    net.ops.push_back(op);
    if (norm && instance_norm_) net.ops.push_back(Op{OpKind::InstanceNorm});
  }

  void deconv(Net& net, const std::string& prefix, ParamGroup g, int cin, int cout, bool norm) {
    Op op{OpKind::Deconv};
    op.weight = param(prefix + ".weight", g, cin, cout, kKernel, kKernel);
    op.bias = param(prefix + ".bias", g, cout, 1);
    net.ops.push_back(op);
    if (norm && instance_norm_) net.ops.push_back(Op{OpKind::InstanceNorm});
  }

  void linear(Net& net, const std::string& prefix, ParamGroup g, int in, int out) {
    Op op{OpKind::Linear};
    op.weight = param(prefix + ".weight", g, out, in);
    op.bias = param(prefix + ".bias", g, out, 1);
    net.ops.push_back(op);
  }

  static void activation(Net& net, OpKind kind, const std::string& block) {
    Op op{kind};
    op.block = block;
    net.ops.push_back(op);
  }

 private:
  ParamSet<T>& params_;
  bool instance_norm_;
};

template <typename T>
Net conv_stack_impl(ParamSet<T>& params, const ConvStackSpec& spec, const std::string& prefix, ParamGroup group) {
  NetBuilder<T> b(params, spec.instance_norm);
  Net net{spec.channels, spec.image_size, spec.image_size, {}};
  int c = spec.channels, s = spec.image_size;
  for (std::size_t i = 0; i < spec.conv_widths.size(); ++i) {
    const std::string name = "conv" + std::to_string(i + 1);
    b.conv(net, prefix + "." + name, group, c, spec.conv_widths[i], i > 0);
    NetBuilder<T>::activation(net, OpKind::LeakyRelu, name);
    c = spec.conv_widths[i];
    s /= 2;
  }
  int in = c * s * s;
  for (std::size_t i = 0; i < spec.fc_widths.size(); ++i) {
    const std::string name = "fc" + std::to_string(i + 1);
    b.linear(net, prefix + "." + name, group, in, spec.fc_widths[i]);
    if (i + 1 < spec.fc_widths.size()) {
      NetBuilder<T>::activation(net, OpKind::LeakyRelu, name);
    } else {
      net.ops.back().block = name;
    }
    in = spec.fc_widths[i];
  }
  return net;
}

}  // namespace

void ModelConfig::validate() const {
  require(image_size >= 4, "image_size", "must be >= 4");
  require(channels >= 1, "channels", "must be >= 1");
  require(embed_dim >= 1, "embed_dim", "must be >= 1");
  require(encoder_fc_width >= 1, "encoder_fc_width", "must be >= 1");
  require(classifier_hidden >= 1, "classifier_hidden", "must be >= 1");
  auto check_widths = [&](const std::vector<int>& ws, const std::string& field) {
    require(!ws.empty(), field, "must be non-empty");
    for (int w : ws) require(w >= 1, field, "widths must be >= 1");
    const int depth = static_cast<int>(ws.size());
    require(depth < 30 && image_size % (1 << depth) == 0, field,
            "image_size " + std::to_string(image_size) + " is not divisible by 2^" + std::to_string(depth));
  };
  check_widths(encoder_widths, "encoder_widths");
  check_widths(decoder_widths, "decoder_widths");
  check_widths(discriminator_widths, "discriminator_widths");
  require(shared_encoder_blocks >= 0 && shared_encoder_blocks <= encoder_block_count(), "shared_encoder_blocks",
          "must be within [0, " + std::to_string(encoder_block_count()) + "]");
  require(shared_decoder_blocks >= 0 && shared_decoder_blocks <= decoder_block_count(), "shared_decoder_blocks",
          "must be within [0, " + std::to_string(decoder_block_count()) + "]");
}

std::size_t ModelConfig::parameter_count() const {
  validate();
  // Encoder: per-block sizes, shared blocks counted once, private twice.
  std::vector<std::size_t> enc;
  int c = channels, s = image_size;
  for (int w : encoder_widths) {
    enc.push_back(conv_params(c, w));
    c = w;
    s /= 2;
  }
  enc.push_back(linear_params(static_cast<std::size_t>(c) * s * s, encoder_fc_width));
  enc.push_back(linear_params(encoder_fc_width, embed_dim));
  std::size_t total = 0;
  for (int i = 0; i < static_cast<int>(enc.size()); ++i)
    total += enc[i] * (i >= encoder_block_count() - shared_encoder_blocks ? 1 : 2);

  std::vector<std::size_t> dec;
  const int s0 = image_size >> decoder_widths.size();
  dec.push_back(linear_params(embed_dim, static_cast<std::size_t>(decoder_widths[0]) * s0 * s0));
  for (std::size_t i = 1; i < decoder_widths.size(); ++i) dec.push_back(conv_params(decoder_widths[i - 1], decoder_widths[i]));
  dec.push_back(conv_params(decoder_widths.back(), channels));
  for (int i = 0; i < static_cast<int>(dec.size()); ++i) total += dec[i] * (i < shared_decoder_blocks ? 1 : 2);

  total += linear_params(embed_dim, classifier_hidden) + linear_params(classifier_hidden, 1);

  std::size_t disc = 0;
  c = channels;
  s = image_size;
  for (int w : discriminator_widths) {
    disc += conv_params(c, w);
    c = w;
    s /= 2;
  }
  disc += linear_params(static_cast<std::size_t>(c) * s * s, 1);
  total += disc * (second_discriminator ? 2 : 1);
  return total;
}

template <typename T>
void init_gaussian(ParamSet<T>& params, std::uint64_t seed, double std_dev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std_dev);
  for (auto& p : params) {
    const bool is_bias = p.name.size() >= 5 && p.name.compare(p.name.size() - 5, 5, ".bias") == 0;
    for (auto& v : p.value.data) v = is_bias ? T(0) : static_cast<T>(normal(rng));
  }
}

template <typename T>
XganModel<T> XganModel<T>::build(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  XganModel<T> m;
  m.config_ = config;
  NetBuilder<T> b(m.params_, config.instance_norm);
  const int S = config.image_size;
  const int K = static_cast<int>(config.encoder_widths.size());
  const int enc_blocks = config.encoder_block_count();

  for (DomainId dom : {DomainId::D1, DomainId::D2}) {
    const std::string tag = to_string(dom);
    const ParamGroup priv = dom == DomainId::D1 ? ParamGroup::EncPrivate1 : ParamGroup::EncPrivate2;
    auto prefix = [&](int block, const std::string& name) {
      const bool shared = block >= enc_blocks - config.shared_encoder_blocks;
      return std::pair{shared ? "enc_shared." + name : "enc_private." + tag + "." + name,
                       shared ? ParamGroup::EncShared : priv};
    };
    Net& net = m.encoders_[index_of(dom)];
    net = Net{config.channels, S, S, {}};
    int c = config.channels, s = S;
    for (int i = 0; i < K; ++i) {
      const std::string name = "conv" + std::to_string(i + 1);
      auto [p, g] = prefix(i, name);
      b.conv(net, p, g, c, config.encoder_widths[i], i > 0);
      NetBuilder<T>::activation(net, OpKind::LeakyRelu, name);
      c = config.encoder_widths[i];
      s /= 2;
    }
    {
      auto [p, g] = prefix(K, "fc1");
      b.linear(net, p, g, c * s * s, config.encoder_fc_width);
      NetBuilder<T>::activation(net, OpKind::LeakyRelu, "fc1");
    }
    {
      auto [p, g] = prefix(K + 1, "fc2");
      b.linear(net, p, g, config.encoder_fc_width, config.embed_dim);
      net.ops.back().block = "fc2";
    }
  }

  const int D = static_cast<int>(config.decoder_widths.size());
  const int s0 = S >> D;
  for (DomainId dom : {DomainId::D1, DomainId::D2}) {
    const std::string tag = to_string(dom);
    const ParamGroup priv = dom == DomainId::D1 ? ParamGroup::DecPrivate1 : ParamGroup::DecPrivate2;
    auto prefix = [&](int block, const std::string& name) {
      const bool shared = block < config.shared_decoder_blocks;
      return std::pair{shared ? "dec_shared." + name : "dec_private." + tag + "." + name,
                       shared ? ParamGroup::DecShared : priv};
    };
    Net& net = m.decoders_[index_of(dom)];
    net = Net{config.embed_dim, 1, 1, {}};
    const int w0 = config.decoder_widths[0];
    {
      auto [p, g] = prefix(0, "deconv1");
      b.linear(net, p, g, config.embed_dim, w0 * s0 * s0);
      Op reshape{OpKind::Reshape};
      reshape.c = w0;
      reshape.h = s0;
      reshape.w = s0;
      net.ops.push_back(reshape);
      if (config.instance_norm) net.ops.push_back(Op{OpKind::InstanceNorm});
      NetBuilder<T>::activation(net, OpKind::Relu, "deconv1");
    }
    for (int i = 1; i <= D; ++i) {
      const std::string name = "deconv" + std::to_string(i + 1);
      auto [p, g] = prefix(i, name);
      const bool last = i == D;
      const int cin = config.decoder_widths[i - 1];
      const int cout = last ? config.channels : config.decoder_widths[i];
      b.deconv(net, p, g, cin, cout, !last);
      NetBuilder<T>::activation(net, last ? OpKind::Tanh : OpKind::Relu, name);
    }
  }

  {
    Net& net = m.classifier_;
    net = Net{config.embed_dim, 1, 1, {}};
    b.linear(net, "c_dann.fc1", ParamGroup::Classifier, config.embed_dim, config.classifier_hidden);
    NetBuilder<T>::activation(net, OpKind::LeakyRelu, "fc1");
    b.linear(net, "c_dann.fc2", ParamGroup::Classifier, config.classifier_hidden, 1);
    net.ops.back().block = "fc2";
  }

  const ConvStackSpec disc_spec{S, config.channels, config.discriminator_widths, {1}, config.instance_norm};
  m.discriminator_ = conv_stack_impl(m.params_, disc_spec, "disc_1to2", ParamGroup::Discriminator);
  if (config.second_discriminator)
    m.discriminator_2to1_ = conv_stack_impl(m.params_, disc_spec, "disc_2to1", ParamGroup::Discriminator2to1);

  init_gaussian(m.params_, seed, 0.02);
  m.params_[*m.params_.find("c_dann.fc2.weight")].value.zero();
  return m;
}

template <typename T>
const Net& XganModel<T>::discriminator_2to1() const {
  if (!config_.second_discriminator) throw ConfigError("model.second_discriminator is false: no D2->D1 discriminator");
  return discriminator_2to1_;
}

namespace {
std::vector<int> indices_of(const Net& net) {
  std::vector<int> out;
  for (const auto& op : net.ops) {
    if (op.weight >= 0) out.push_back(op.weight);
    if (op.bias >= 0) out.push_back(op.bias);
  }
  return out;
}
}  // namespace

template <typename T>
std::vector<int> XganModel<T>::encoder_param_indices(DomainId d) const {
  return indices_of(encoder(d));
}

template <typename T>
std::vector<int> XganModel<T>::decoder_param_indices(DomainId d) const {
  return indices_of(decoder(d));
}

template <typename T>
EmbeddingBatch<T> encode(const XganModel<T>& model, const ImageBatch<T>& x, DomainId dom, Trace<T>* trace) {
  const auto& cfg = model.config();
  require_shape(x, cfg.channels, cfg.image_size, cfg.image_size, "encode");
  return run_forward(model.params(), model.encoder(dom), x, trace);
}

template <typename T>
ImageBatch<T> decode(const XganModel<T>& model, const EmbeddingBatch<T>& z, DomainId dom, Trace<T>* trace) {
  if (z.n < 1 || static_cast<int>(z.sample_size()) != model.config().embed_dim) {
    throw DimensionError("decode: embedding " + z.shape_string() + " does not have width " +
                         std::to_string(model.config().embed_dim));
  }
  Tensor<T> flat = z;
  flat.c = model.config().embed_dim;
  flat.h = flat.w = 1;
  return run_forward(model.params(), model.decoder(dom), flat, trace);
}

template <typename T>
ImageBatch<T> translate(const XganModel<T>& model, const ImageBatch<T>& x, DomainId from) {
  return decode(model, encode(model, x, from), other(from));
}

template <typename T>
Tensor<T> discriminate(const XganModel<T>& model, const ImageBatch<T>& x) {
  const auto& cfg = model.config();
  require_shape(x, cfg.channels, cfg.image_size, cfg.image_size, "discriminate");
  Tensor<T> out = run_forward(model.params(), model.discriminator(), x);
  for (auto& v : out.data) v = sigmoid(v);
  return out;
}

template <typename T>
Tensor<T> classify_domain(const XganModel<T>& model, const EmbeddingBatch<T>& z) {
  if (z.n < 1 || static_cast<int>(z.sample_size()) != model.config().embed_dim) {
    throw DimensionError("classify_domain: embedding " + z.shape_string() + " does not have width " +
                         std::to_string(model.config().embed_dim));
  }
  Tensor<T> out = run_forward(model.params(), model.classifier(), z);
  for (auto& v : out.data) v = sigmoid(v);
  return out;
}

Net build_conv_stack(ParamSet<float>& params, const ConvStackSpec& spec, const std::string& prefix, ParamGroup group) {
  return conv_stack_impl(params, spec, prefix, group);
}
Net build_conv_stack(ParamSet<double>& params, const ConvStackSpec& spec, const std::string& prefix, ParamGroup group) {
  return conv_stack_impl(params, spec, prefix, group);
}

#define XGAN_INSTANTIATE_MODEL(T)                                                                          \
  template class XganModel<T>;                                                                             \
  template void init_gaussian<T>(ParamSet<T>&, std::uint64_t, double);                                     \
  template EmbeddingBatch<T> encode<T>(const XganModel<T>&, const ImageBatch<T>&, DomainId, Trace<T>*);     \
  template ImageBatch<T> decode<T>(const XganModel<T>&, const EmbeddingBatch<T>&, DomainId, Trace<T>*);     \
  template ImageBatch<T> translate<T>(const XganModel<T>&, const ImageBatch<T>&, DomainId);                 \
  template Tensor<T> discriminate<T>(const XganModel<T>&, const ImageBatch<T>&);                           \
  template Tensor<T> classify_domain<T>(const XganModel<T>&, const EmbeddingBatch<T>&);

XGAN_INSTANTIATE_MODEL(float)
XGAN_INSTANTIATE_MODEL(double)

}  // namespace xgan
