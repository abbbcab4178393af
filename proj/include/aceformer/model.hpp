#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "aceformer/aceemd.hpp"
#include "aceformer/checkpoint.hpp"
#include "aceformer/ops.hpp"
#include "aceformer/tensor.hpp"

namespace aceformer {

// In-network denoising runs a lighter ensemble than standalone use.
AceemdConfig in_network_denoise_defaults();

struct ModelConfig {
  std::size_t input_window = 30;  // known rows per sample
  std::size_t predict_days = 2;   // p, zero-padded rows and output width
  std::size_t feature_width = 7;  // F, columns of the raw input
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  double prob_factor = 5.0;  // c in u = ceil(c * ln L)
  std::size_t pool_k = 2;    // fixed: distillation halves both axes
  std::uint64_t seed = 1;
  bool denoise = true;  // false keeps the pass-through node but skips ACEEMD
  AceemdConfig denoise_cfg = in_network_denoise_defaults();

  std::size_t padded_length() const { return input_window + predict_days; }
  void validate() const;
};

// Sinusoidal table: PE[pos, 2i] = sin(pos / 10000^(2i/width)),
// PE[pos, 2i+1] = cos of the same angle. Not a trained parameter.
ad::Tensor positional_encoding(std::size_t length, std::size_t width);

// Row-major window values -> (input_window + p, F) leaf with the final p
// rows zero. Rejects size mismatches and non-finite values.
ad::Tensor build_padded_input(const std::vector<double>& window, const ModelConfig& config);

// softmax(q k^T / sqrt(d)) v on 2-D operands.
ad::Tensor full_attention(const ad::Tensor& q, const ad::Tensor& k, const ad::Tensor& v);

// Sparse attention: only the u = ceil(factor * ln L_q) queries whose scores
// are most peaked (max minus mean) attend; the rest emit the mean value row.
ad::Tensor prob_attention(const ad::Tensor& q, const ad::Tensor& k, const ad::Tensor& v,
                          double factor);

class AceFormer {
 public:
  explicit AceFormer(ModelConfig config);

  const ModelConfig& config() const { return cfg_; }

  // Convolutional embedding of the padded input: F -> d_model, kernel 3.
  ad::Tensor embed(const ad::Tensor& padded) const;

  // Per-channel ACEEMD behind a pass-through node: the graph sees the
  // denoised values forward and the identity backward.
  ad::Tensor denoise_channels(const ad::Tensor& embedded) const;

  // positional_encoding(length, F) projected to d_model.
  ad::Tensor positional_term(std::size_t length) const;

  // embed -> denoise -> + positional term. Asserts the padding rows are zero.
  ad::Tensor pretreat(const ad::Tensor& padded) const;

  // Learned d_model -> d_model/2 map plus max-pool over time pairs.
  ad::Tensor time_aware(const ad::Tensor& x_pre) const;

  // Sparse attention -> conv -> 2x2 max-pool, plus the time-aware branch.
  // (L, d_model) -> (L/2, d_model/2).
  ad::Tensor distill(const ad::Tensor& x_pre) const;

  // Full pass: pretreat, distill, full attention with residual and layer
  // norm, then a linear head to (1, p).
  ad::Tensor forward_padded(const ad::Tensor& padded) const;
  ad::Tensor forward_window(const std::vector<double>& window) const;
  std::vector<double> predict(const std::vector<double>& window) const;

  std::vector<std::pair<std::string, ad::Tensor>> named_parameters() const;
  std::vector<ad::Tensor> parameters() const;

  Checkpoint to_checkpoint() const;
  void load_parameters(const Checkpoint& cp);
  static AceFormer from_checkpoint(const Checkpoint& cp);

 private:
  ModelConfig cfg_;

  ad::Tensor conv_w_, conv_b_;  // pretreat embedding
  ad::Tensor pe_w_;             // F -> d_model projection of the encoding
  ad::Tensor att_wq_, att_wk_, att_wv_, att_wo_;  // distill sparse attention
  ad::Tensor dconv_w_, dconv_b_;                  // distill conv
  ad::Tensor time_w_, time_b_;                    // time-aware branch
  ad::Tensor post_wq_, post_wk_, post_wv_, post_wo_;  // post-distill attention
  ad::Tensor norm_g_, norm_b_;
  ad::Tensor head_w_, head_b_;
};

}  // namespace aceformer
