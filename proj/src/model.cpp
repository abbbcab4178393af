#include "aceformer/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace aceformer {

namespace {

void check_2d(const char* op, const ad::Tensor& t) {
  if (!t.defined() || t.shape().size() != 2) {
    throw std::invalid_argument(std::string(op) + ": expected a 2-D tensor");
  }
}

void check_attention_operands(const char* op, const ad::Tensor& q, const ad::Tensor& k,
                              const ad::Tensor& v) {
  check_2d(op, q);
  check_2d(op, k);
  check_2d(op, v);
  if (q.shape()[1] != k.shape()[1]) {
    throw std::invalid_argument(std::string(op) + ": query/key width mismatch " +
                                ad::shape_str(q.shape()) + " vs " + ad::shape_str(k.shape()));
  }
  if (k.shape()[0] != v.shape()[0]) {
    throw std::invalid_argument(std::string(op) + ": key/value row mismatch " +
                                ad::shape_str(k.shape()) + " vs " + ad::shape_str(v.shape()));
  }
}

// Split columns into heads, run one attention flavor per head, concat, project.
ad::Tensor multi_head(const ad::Tensor& x, const ad::Tensor& wq, const ad::Tensor& wk,
                      const ad::Tensor& wv, const ad::Tensor& wo, std::size_t heads, bool sparse,
                      double factor) {
  auto q = ad::matmul(x, wq);
  auto k = ad::matmul(x, wk);
  auto v = ad::matmul(x, wv);
  const std::size_t rows = q.shape()[0];
  const std::size_t width = q.shape()[1];
  const std::size_t dh = width / heads;
  ad::Tensor cat;
  for (std::size_t h = 0; h < heads; ++h) {
    auto qh = ad::slice(q, 0, rows, h * dh, (h + 1) * dh);
    auto kh = ad::slice(k, 0, rows, h * dh, (h + 1) * dh);
    auto vh = ad::slice(v, 0, rows, h * dh, (h + 1) * dh);
    auto oh = sparse ? prob_attention(qh, kh, vh, factor) : full_attention(qh, kh, vh);
    cat = h == 0 ? oh : ad::concat_cols(cat, oh);
  }
  return ad::matmul(cat, wo);
}

std::string fmt_f64(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

const std::string& meta_get(const Checkpoint& cp, const std::string& key) {
  auto it = cp.meta.find(key);
  if (it == cp.meta.end()) {
    throw std::runtime_error("checkpoint meta is missing key '" + key + "'");
  }
  return it->second;
}

std::uint64_t meta_u64(const Checkpoint& cp, const std::string& key) {
  const std::string& text = meta_get(cp, key);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size() || text.empty()) {
    throw std::runtime_error("checkpoint meta key '" + key + "' is not an integer: " + text);
  }
  return v;
}

double meta_f64(const Checkpoint& cp, const std::string& key) {
  const std::string& text = meta_get(cp, key);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty()) {
    throw std::runtime_error("checkpoint meta key '" + key + "' is not a number: " + text);
  }
  return v;
}

}  // namespace

AceemdConfig in_network_denoise_defaults() {
  AceemdConfig cfg;
  cfg.ensemble_size = 2;
  return cfg;
}

void ModelConfig::validate() const {
  if (input_window < 2) throw std::invalid_argument("model: input_window must be at least 2");
  if (predict_days < 1) throw std::invalid_argument("model: predict_days must be at least 1");
  if (feature_width < 1) throw std::invalid_argument("model: feature_width must be at least 1");
  if (padded_length() < 4) {
    throw std::invalid_argument("model: padded input must have at least 4 rows");
  }
  if (padded_length() % 2 != 0) {
    throw std::invalid_argument(
        "model: input_window + predict_days must be even so pooling can halve the time axis");
  }
  if (pool_k != 2) {
    throw std::invalid_argument("model: pool_k is fixed at 2; distillation halves both axes");
  }
  if (d_model < 2 || d_model % 2 != 0) {
    throw std::invalid_argument("model: d_model must be even and at least 2");
  }
  if (n_heads < 1) throw std::invalid_argument("model: n_heads must be at least 1");
  if (d_model % n_heads != 0) {
    throw std::invalid_argument("model: n_heads must divide d_model");
  }
  if ((d_model / 2) % n_heads != 0) {
    throw std::invalid_argument("model: n_heads must divide d_model/2 for the post-distillation"
                                " attention");
  }
  if (!(prob_factor > 0.0)) throw std::invalid_argument("model: prob_factor must be positive");
  denoise_cfg.validate();
}

ad::Tensor positional_encoding(std::size_t length, std::size_t width) {
  if (length < 1 || width < 1) {
    throw std::invalid_argument("positional_encoding: length and width must be positive");
  }
  std::vector<double> data(length * width);
  for (std::size_t pos = 0; pos < length; ++pos) {
    for (std::size_t j = 0; j < width; ++j) {
      const double pair_index = static_cast<double>(2 * (j / 2));
      const double angle =
          static_cast<double>(pos) / std::pow(10000.0, pair_index / static_cast<double>(width));
      data[pos * width + j] = j % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return ad::make_leaf({length, width}, std::move(data));
}

ad::Tensor build_padded_input(const std::vector<double>& window, const ModelConfig& config) {
  const std::size_t need = config.input_window * config.feature_width;
  if (window.size() != need) {
    throw std::invalid_argument(
        "build_padded_input: expected " + std::to_string(need) + " values (" +
        std::to_string(config.input_window) + " x " + std::to_string(config.feature_width) +
        "), got " + std::to_string(window.size()));
  }
  for (std::size_t i = 0; i < window.size(); ++i) {
    if (!std::isfinite(window[i])) {
      throw std::invalid_argument("build_padded_input: non-finite value at index " +
                                  std::to_string(i));
    }
  }
  std::vector<double> data(config.padded_length() * config.feature_width, 0.0);
  std::copy(window.begin(), window.end(), data.begin());
  return ad::make_leaf({config.padded_length(), config.feature_width}, std::move(data));
}

ad::Tensor full_attention(const ad::Tensor& q, const ad::Tensor& k, const ad::Tensor& v) {
  check_attention_operands("full_attention", q, k, v);
  const double inv = 1.0 / std::sqrt(static_cast<double>(q.shape()[1]));
  auto scores = ad::scale(ad::matmul(q, ad::transpose2d(k)), inv);
  return ad::matmul(ad::softmax(scores), v);
}

ad::Tensor prob_attention(const ad::Tensor& q, const ad::Tensor& k, const ad::Tensor& v,
                          double factor) {
  check_attention_operands("prob_attention", q, k, v);
  if (!(factor > 0.0)) throw std::invalid_argument("prob_attention: factor must be positive");
  const std::size_t lq = q.shape()[0];
  const std::size_t lk = k.shape()[0];
  const std::size_t d = q.shape()[1];
  const double inv = 1.0 / std::sqrt(static_cast<double>(d));

  // Peakedness of each query's score row, from the current forward values.
  const std::vector<double>& qd = q.data();
  const std::vector<double>& kd = k.data();
  std::vector<double> peak(lq);
  for (std::size_t i = 0; i < lq; ++i) {
    double best = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (std::size_t j = 0; j < lk; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += qd[i * d + c] * kd[j * d + c];
      s *= inv;
      best = std::max(best, s);
      sum += s;
    }
    peak[i] = best - sum / static_cast<double>(lk);
  }

  const double raw = std::ceil(factor * std::log(static_cast<double>(lq)));
  const std::size_t u =
      std::min(lq, std::max<std::size_t>(1, static_cast<std::size_t>(raw)));

  std::vector<std::size_t> order(lq);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&peak](std::size_t a, std::size_t b) { return peak[a] > peak[b]; });

  std::vector<bool> chosen(lq, false);
  for (std::size_t i = 0; i < u; ++i) chosen[order[i]] = true;
  std::vector<std::size_t> selected;
  std::vector<std::size_t> skipped;
  for (std::size_t i = 0; i < lq; ++i) (chosen[i] ? selected : skipped).push_back(i);

  auto scores = ad::scale(ad::matmul(ad::gather_rows(q, selected), ad::transpose2d(k)), inv);
  auto attended = ad::matmul(ad::softmax(scores), v);
  auto out = ad::scatter_rows(attended, selected, lq);
  if (!skipped.empty()) {
    auto fallback = ad::repeat_row(ad::mean_axis(v, 0), skipped.size());
    out = ad::add(out, ad::scatter_rows(fallback, skipped, lq));
  }
  return out;
}

AceFormer::AceFormer(ModelConfig config) : cfg_(std::move(config)) {
  cfg_.validate();
  std::mt19937_64 rng(cfg_.seed);
  auto xavier = [&rng](std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    std::vector<double> values(ad::shape_size(shape));
    for (double& x : values) x = dist(rng);
    return ad::make_leaf(std::move(shape), std::move(values), true);
  };
  auto filled = [](std::vector<std::size_t> shape, double value) {
    return ad::make_leaf(shape, std::vector<double>(ad::shape_size(shape), value), true);
  };

  const std::size_t f = cfg_.feature_width;
  const std::size_t d = cfg_.d_model;
  const std::size_t half = d / 2;
  const std::size_t flat = (cfg_.padded_length() / 2) * half;

  conv_w_ = xavier({3, f, d}, 3 * f, 3 * d);
  conv_b_ = filled({d}, 0.0);
  pe_w_ = xavier({f, d}, f, d);
  att_wq_ = xavier({d, d}, d, d);
  att_wk_ = xavier({d, d}, d, d);
  att_wv_ = xavier({d, d}, d, d);
  att_wo_ = xavier({d, d}, d, d);
  dconv_w_ = xavier({3, d, d}, 3 * d, 3 * d);
  dconv_b_ = filled({d}, 0.0);
  time_w_ = xavier({d, half}, d, half);
  time_b_ = filled({half}, 0.0);
  post_wq_ = xavier({half, half}, half, half);
  post_wk_ = xavier({half, half}, half, half);
  post_wv_ = xavier({half, half}, half, half);
  post_wo_ = xavier({half, half}, half, half);
  norm_g_ = filled({half}, 1.0);
  norm_b_ = filled({half}, 0.0);
  head_w_ = xavier({flat, cfg_.predict_days}, flat, cfg_.predict_days);
  head_b_ = filled({cfg_.predict_days}, 0.0);
}

ad::Tensor AceFormer::embed(const ad::Tensor& padded) const {
  check_2d("embed", padded);
  return ad::add_rowvec(ad::conv1d(padded, conv_w_), conv_b_);
}

ad::Tensor AceFormer::denoise_channels(const ad::Tensor& embedded) const {
  check_2d("denoise_channels", embedded);
  if (!cfg_.denoise) {
    return ad::straight_through(embedded,
                                [](const std::vector<double>& flat) { return flat; });
  }
  const std::size_t len = embedded.shape()[0];
  const std::size_t channels = embedded.shape()[1];
  const AceemdConfig base = cfg_.denoise_cfg;
  auto denoise = [len, channels, base](const std::vector<double>& flat) {
    std::vector<double> out = flat;
    TimeSeries column;
    column.values.resize(len);
    for (std::size_t c = 0; c < channels; ++c) {
      for (std::size_t t = 0; t < len; ++t) column.values[t] = flat[t * channels + c];
      AceemdConfig per = base;
      per.seed = base.seed + c;
      const DenoiseResult result = aceemd_denoise(column, per);
      for (std::size_t t = 0; t < len; ++t) out[t * channels + c] = result.r1.values[t];
    }
    return out;
  };
  return ad::straight_through(embedded, denoise);
}

ad::Tensor AceFormer::positional_term(std::size_t length) const {
  return ad::matmul(positional_encoding(length, cfg_.feature_width), pe_w_);
}

ad::Tensor AceFormer::pretreat(const ad::Tensor& padded) const {
  check_2d("pretreat", padded);
  const std::size_t len = cfg_.padded_length();
  if (padded.shape()[0] != len || padded.shape()[1] != cfg_.feature_width) {
    throw std::invalid_argument("pretreat: expected shape (" + std::to_string(len) + ", " +
                                std::to_string(cfg_.feature_width) + "), got " +
                                ad::shape_str(padded.shape()));
  }
  const std::vector<double>& data = padded.data();
  for (std::size_t r = cfg_.input_window; r < len; ++r) {
    for (std::size_t c = 0; c < cfg_.feature_width; ++c) {
      if (data[r * cfg_.feature_width + c] != 0.0) {
        throw std::invalid_argument("pretreat: prediction rows of the padded input must be zero");
      }
    }
  }
  return ad::add(denoise_channels(embed(padded)), positional_term(len));
}

ad::Tensor AceFormer::time_aware(const ad::Tensor& x_pre) const {
  check_2d("time_aware", x_pre);
  if (x_pre.shape()[1] != cfg_.d_model) {
    throw std::invalid_argument("time_aware: expected " + std::to_string(cfg_.d_model) +
                                " columns, got " + ad::shape_str(x_pre.shape()));
  }
  if (x_pre.shape()[0] % cfg_.pool_k != 0) {
    throw std::invalid_argument("time_aware: time axis must be divisible by " +
                                std::to_string(cfg_.pool_k) + ", got length " +
                                std::to_string(x_pre.shape()[0]));
  }
  auto mapped = ad::add_rowvec(ad::matmul(x_pre, time_w_), time_b_);
  return ad::maxpool2d(mapped, cfg_.pool_k, 1);
}

ad::Tensor AceFormer::distill(const ad::Tensor& x_pre) const {
  auto attended =
      multi_head(x_pre, att_wq_, att_wk_, att_wv_, att_wo_, cfg_.n_heads, true, cfg_.prob_factor);
  auto conv = ad::add_rowvec(ad::conv1d(attended, dconv_w_), dconv_b_);
  auto pooled = ad::maxpool2d(conv, cfg_.pool_k, cfg_.pool_k);
  return ad::add(pooled, time_aware(x_pre));
}

ad::Tensor AceFormer::forward_padded(const ad::Tensor& padded) const {
  auto distilled = distill(pretreat(padded));
  auto attended =
      multi_head(distilled, post_wq_, post_wk_, post_wv_, post_wo_, cfg_.n_heads, false, 1.0);
  auto normed = ad::layer_norm(ad::add(attended, distilled), norm_g_, norm_b_);
  const std::size_t rows = normed.shape()[0];
  const std::size_t cols = normed.shape()[1];
  auto flat = ad::reshape(normed, {1, rows * cols});
  return ad::add_rowvec(ad::matmul(flat, head_w_), head_b_);
}

ad::Tensor AceFormer::forward_window(const std::vector<double>& window) const {
  return forward_padded(build_padded_input(window, cfg_));
}

std::vector<double> AceFormer::predict(const std::vector<double>& window) const {
  return forward_window(window).data();
}

std::vector<std::pair<std::string, ad::Tensor>> AceFormer::named_parameters() const {
  return {
      {"pretreat.conv.weight", conv_w_}, {"pretreat.conv.bias", conv_b_},
      {"pretreat.pe.weight", pe_w_},     {"distill.attn.wq", att_wq_},
      {"distill.attn.wk", att_wk_},      {"distill.attn.wv", att_wv_},
      {"distill.attn.wo", att_wo_},      {"distill.conv.weight", dconv_w_},
      {"distill.conv.bias", dconv_b_},   {"distill.time.weight", time_w_},
      {"distill.time.bias", time_b_},    {"post.attn.wq", post_wq_},
      {"post.attn.wk", post_wk_},        {"post.attn.wv", post_wv_},
      {"post.attn.wo", post_wo_},        {"post.norm.gamma", norm_g_},
      {"post.norm.beta", norm_b_},       {"head.weight", head_w_},
      {"head.bias", head_b_},
  };
}

std::vector<ad::Tensor> AceFormer::parameters() const {
  std::vector<ad::Tensor> out;
  for (auto& [name, tensor] : named_parameters()) out.push_back(tensor);
  return out;
}

Checkpoint AceFormer::to_checkpoint() const {
  Checkpoint cp;
  cp.meta["input_window"] = std::to_string(cfg_.input_window);
  cp.meta["predict_days"] = std::to_string(cfg_.predict_days);
  cp.meta["feature_width"] = std::to_string(cfg_.feature_width);
  cp.meta["d_model"] = std::to_string(cfg_.d_model);
  cp.meta["n_heads"] = std::to_string(cfg_.n_heads);
  cp.meta["prob_factor"] = fmt_f64(cfg_.prob_factor);
  cp.meta["pool_k"] = std::to_string(cfg_.pool_k);
  cp.meta["seed"] = std::to_string(cfg_.seed);
  cp.meta["denoise"] = cfg_.denoise ? "1" : "0";
  cp.meta["denoise_m"] = std::to_string(cfg_.denoise_cfg.ensemble_size);
  cp.meta["denoise_alpha"] = fmt_f64(cfg_.denoise_cfg.alpha);
  cp.meta["denoise_eps"] = fmt_f64(cfg_.denoise_cfg.noise_scale);
  cp.meta["denoise_seed"] = std::to_string(cfg_.denoise_cfg.seed);
  cp.meta["denoise_max_iters"] = std::to_string(cfg_.denoise_cfg.max_iters);
  for (auto& [name, tensor] : named_parameters()) {
    cp.tensors.push_back({name, TensorData{tensor.shape(), tensor.data()}});
  }
  return cp;
}

void AceFormer::load_parameters(const Checkpoint& cp) {
  auto named = named_parameters();
  if (cp.tensors.size() != named.size()) {
    throw std::runtime_error("checkpoint holds " + std::to_string(cp.tensors.size()) +
                             " tensors, model expects " + std::to_string(named.size()));
  }
  for (auto& [name, tensor] : named) {
    const TensorData* stored = cp.find(name);
    if (stored == nullptr) {
      throw std::runtime_error("checkpoint is missing tensor '" + name + "'");
    }
    if (stored->shape != tensor.shape()) {
      throw std::runtime_error("checkpoint tensor '" + name + "' has shape " +
                               ad::shape_str(stored->shape) + ", model expects " +
                               ad::shape_str(tensor.shape()));
    }
    for (double v : stored->values) {
      if (!std::isfinite(v)) {
        throw std::runtime_error("checkpoint tensor '" + name + "' holds a non-finite value");
      }
    }
    tensor.data_mut() = stored->values;
  }
}

AceFormer AceFormer::from_checkpoint(const Checkpoint& cp) {
  ModelConfig cfg;
  cfg.input_window = meta_u64(cp, "input_window");
  cfg.predict_days = meta_u64(cp, "predict_days");
  cfg.feature_width = meta_u64(cp, "feature_width");
  cfg.d_model = meta_u64(cp, "d_model");
  cfg.n_heads = meta_u64(cp, "n_heads");
  cfg.prob_factor = meta_f64(cp, "prob_factor");
  cfg.pool_k = meta_u64(cp, "pool_k");
  cfg.seed = meta_u64(cp, "seed");
  cfg.denoise = meta_u64(cp, "denoise") != 0;
  cfg.denoise_cfg.ensemble_size = static_cast<int>(meta_u64(cp, "denoise_m"));
  cfg.denoise_cfg.alpha = meta_f64(cp, "denoise_alpha");
  cfg.denoise_cfg.noise_scale = meta_f64(cp, "denoise_eps");
  cfg.denoise_cfg.seed = meta_u64(cp, "denoise_seed");
  cfg.denoise_cfg.max_iters = static_cast<int>(meta_u64(cp, "denoise_max_iters"));
  AceFormer model(cfg);
  model.load_parameters(cp);
  return model;
}

}  // namespace aceformer
