#pragma once

// Dual autoencoder with partially shared encoder tail and decoder head, a
// domain classifier on the embedding, and the D1->D2 discriminator.
//
// Encoder blocks are conv1..convK, fc1, fc2; the last `shared_encoder_blocks`
// of them are single-instance and referenced by both domain paths. Decoder
// blocks are deconv1 (a fully connected expansion to s0 x s0 x widths[0]),
// then stride-2 transposed convolutions; the first `shared_decoder_blocks`
// are shared.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "xgan/network.hpp"

namespace xgan {

enum class DomainId : std::uint8_t { D1, D2 };

constexpr DomainId other(DomainId d) { return d == DomainId::D1 ? DomainId::D2 : DomainId::D1; }
constexpr int index_of(DomainId d) { return d == DomainId::D1 ? 0 : 1; }
inline const char* to_string(DomainId d) { return d == DomainId::D1 ? "d1" : "d2"; }

struct ModelConfig {
  int image_size = 64;
  int channels = 3;
  int embed_dim = 1024;
  std::vector<int> encoder_widths{32, 64, 128, 256};
  int encoder_fc_width = 1024;
  std::vector<int> decoder_widths{512, 256, 128, 64};
  std::vector<int> discriminator_widths{16, 32, 32, 32};
  int shared_encoder_blocks = 4;
  int shared_decoder_blocks = 2;
  int classifier_hidden = 256;
  bool instance_norm = false;
  bool second_discriminator = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Closed-form number of scalar parameters this config instantiates.
  std::size_t parameter_count() const;

  int encoder_block_count() const { return static_cast<int>(encoder_widths.size()) + 2; }
  int decoder_block_count() const { return static_cast<int>(decoder_widths.size()) + 1; }

  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
class XganModel {
 public:
  /// Deterministic initialization: N(0, 0.02) weights, zero biases, zero
  /// final classifier layer.
  static XganModel build(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }

  const Net& encoder(DomainId d) const { return encoders_[index_of(d)]; }
  const Net& decoder(DomainId d) const { return decoders_[index_of(d)]; }
  const Net& classifier() const { return classifier_; }
  const Net& discriminator() const { return discriminator_; }
  /// D2->D1 discriminator; throws ConfigError when the config does not build one.
  const Net& discriminator_2to1() const;
  bool has_discriminator_2to1() const { return config_.second_discriminator; }

  /// Parameter indices used by an encoder/decoder path, in op order.
  std::vector<int> encoder_param_indices(DomainId d) const;
  std::vector<int> decoder_param_indices(DomainId d) const;

  template <typename U>
  XganModel<U> cast() const {
    XganModel<U> out;
    out.config_ = config_;
    out.params_ = params_.template cast<U>();
    out.encoders_ = encoders_;
    out.decoders_ = decoders_;
    out.classifier_ = classifier_;
    out.discriminator_ = discriminator_;
    out.discriminator_2to1_ = discriminator_2to1_;
    return out;
  }

 private:
  template <typename U>
  friend class XganModel;

  ModelConfig config_;
  ParamSet<T> params_;
  std::array<Net, 2> encoders_;
  std::array<Net, 2> decoders_;
  Net classifier_;
  Net discriminator_;
  Net discriminator_2to1_;
};

template <typename T>
EmbeddingBatch<T> encode(const XganModel<T>& model, const ImageBatch<T>& x, DomainId dom,
                         Trace<T>* trace = nullptr);
template <typename T>
ImageBatch<T> decode(const XganModel<T>& model, const EmbeddingBatch<T>& z, DomainId dom,
                     Trace<T>* trace = nullptr);
/// decode(encode(x, from), other(from)).
template <typename T>
ImageBatch<T> translate(const XganModel<T>& model, const ImageBatch<T>& x, DomainId from);
/// Probability that each image is a real D2 sample. Output N x 1.
template <typename T>
Tensor<T> discriminate(const XganModel<T>& model, const ImageBatch<T>& x);
/// Probability that each embedding comes from D2. Output N x 1.
template <typename T>
Tensor<T> classify_domain(const XganModel<T>& model, const EmbeddingBatch<T>& z);

/// Builds a stride-2 conv stack followed by fully connected layers; shared
/// helper for attribute networks (teacher, probes) so they stay in the same
/// topology family as the XGAN encoder.
struct ConvStackSpec {
  int image_size;
  int channels;
  std::vector<int> conv_widths;
  std::vector<int> fc_widths;  // last one has no activation
  bool instance_norm = false;
};
Net build_conv_stack(ParamSet<float>& params, const ConvStackSpec& spec, const std::string& prefix,
                     ParamGroup group);
Net build_conv_stack(ParamSet<double>& params, const ConvStackSpec& spec, const std::string& prefix,
                     ParamGroup group);

/// Fills every weight of the given groups with N(0, std) and every bias with 0
/// in parameter-creation order.
template <typename T>
void init_gaussian(ParamSet<T>& params, std::uint64_t seed, double std_dev);

template <typename T>
T sigmoid(T x) {
  return x >= 0 ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x));
}

/// log(1 + e^x), stable for both signs.
template <typename T>
T softplus(T x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace xgan
