#include "aceformer/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "aceformer/io.hpp"

namespace aceformer {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace((unsigned char)s[b])) ++b;
  while (e > b && std::isspace((unsigned char)s[e - 1])) --e;
  return s.substr(b, e - b);
}

double to_f64(const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(x)) {
    throw std::invalid_argument("expected a finite number, got '" + v + "'");
  }
  return x;
}

std::uint64_t to_u64(const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const unsigned long long x = std::strtoull(t.c_str(), &end, 10);
  if (t.empty() || t[0] == '-' || end != t.c_str() + t.size()) {
    throw std::invalid_argument("expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

int to_int(const std::string& v) {
  const std::uint64_t x = to_u64(v);
  if (x > 1000000) throw std::invalid_argument("integer out of range: '" + v + "'");
  return (int)x;
}

bool to_bool(const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw std::invalid_argument("expected true/false, got '" + v + "'");
}

void apply_key(RunConfig& rc, const std::string& key, const std::string& value) {
  if (key == "data.primary") rc.primary_csv = value;
  else if (key == "data.index_a") rc.index_a_csv = value;
  else if (key == "data.index_b") rc.index_b_csv = value;
  else if (key == "data.val_start") rc.val_start = Date::parse(value);
  else if (key == "data.test_start") rc.test_start = Date::parse(value);
  else if (key == "model.input_window") rc.model.input_window = to_u64(value);
  else if (key == "model.predict_days") rc.model.predict_days = to_u64(value);
  else if (key == "model.feature_width") rc.model.feature_width = to_u64(value);
  else if (key == "model.d_model") rc.model.d_model = to_u64(value);
  else if (key == "model.n_heads") rc.model.n_heads = to_u64(value);
  else if (key == "model.prob_factor") rc.model.prob_factor = to_f64(value);
  else if (key == "model.pool_k") rc.model.pool_k = to_u64(value);
  else if (key == "model.denoise") rc.model.denoise = to_bool(value);
  else if (key == "model.denoise_ensemble") rc.model.denoise_cfg.ensemble_size = to_int(value);
  else if (key == "model.denoise_alpha") rc.model.denoise_cfg.alpha = to_f64(value);
  else if (key == "model.denoise_noise_scale") rc.model.denoise_cfg.noise_scale = to_f64(value);
  else if (key == "model.denoise_max_iters") rc.model.denoise_cfg.max_iters = to_int(value);
  else if (key == "denoise.ensemble_size") rc.denoise.ensemble_size = to_int(value);
  else if (key == "denoise.alpha") rc.denoise.alpha = to_f64(value);
  else if (key == "denoise.noise_scale") rc.denoise.noise_scale = to_f64(value);
  else if (key == "denoise.max_iters") rc.denoise.max_iters = to_int(value);
  else if (key == "train.lr") rc.train.lr = to_f64(value);
  else if (key == "train.beta1") rc.train.beta1 = to_f64(value);
  else if (key == "train.beta2") rc.train.beta2 = to_f64(value);
  else if (key == "train.eps") rc.train.eps = to_f64(value);
  else if (key == "train.batch_size") rc.train.batch_size = to_u64(value);
  else if (key == "train.max_epochs") rc.train.max_epochs = to_u64(value);
  else if (key == "train.patience") rc.train.patience = to_u64(value);
  else if (key == "backtest.risk_free") rc.risk_free = to_f64(value);
  else if (key == "run.seed") rc.seed = to_u64(value);
  else throw std::invalid_argument("unknown key '" + key + "'");
}

}  // namespace

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": empty section name");
      }
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    }
    if (section.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": key '" + key +
                                  "' appears before any [section]");
    }
    const std::string qualified = section + "." + key;
    if (!out.emplace(qualified, value).second) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": duplicate key '" + qualified + "'");
    }
  }
  return out;
}

void RunConfig::set_seed(std::uint64_t value) {
  seed = value;
  model.seed = value;
  model.denoise_cfg.seed = value;
  denoise.seed = value;
  train.shuffle_seed = value;
}

void RunConfig::validate() const {
  model.validate();
  denoise.validate();
  if (train.lr < 0.0 || !std::isfinite(train.lr)) {
    throw std::invalid_argument("config: train.lr must be a non-negative number");
  }
  if (train.beta1 < 0.0 || train.beta1 >= 1.0 || train.beta2 < 0.0 || train.beta2 >= 1.0) {
    throw std::invalid_argument("config: Adam betas must lie in [0, 1)");
  }
  if (train.eps <= 0.0) throw std::invalid_argument("config: train.eps must be positive");
  if (train.batch_size < 1) throw std::invalid_argument("config: train.batch_size must be >= 1");
  if (train.max_epochs < 1) throw std::invalid_argument("config: train.max_epochs must be >= 1");
  if (train.patience < 1) throw std::invalid_argument("config: train.patience must be >= 1");
  if (!std::isfinite(risk_free) || risk_free < -1.0 || risk_free > 1.0) {
    throw std::invalid_argument("config: backtest.risk_free must lie in [-1, 1]");
  }
  if (test_start < val_start) {
    throw std::invalid_argument("config: data.test_start precedes data.val_start");
  }
}

RunConfig default_run_config() {
  RunConfig rc;
  rc.set_seed(rc.seed);
  return rc;
}

RunConfig load_run_config(const std::string& text) {
  RunConfig rc = default_run_config();
  for (const auto& [key, value] : parse_key_values(text)) {
    try {
      apply_key(rc, key, value);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config: " + key + ": " + e.what());
    }
  }
  rc.set_seed(rc.seed);
  rc.validate();
  return rc;
}

RunConfig load_run_config_file(const std::string& path) {
  return load_run_config(read_file(path));
}

WindowedDataset build_dataset(const RunConfig& config) {
  if (config.primary_csv.empty() || config.index_a_csv.empty() || config.index_b_csv.empty()) {
    throw std::invalid_argument(
        "config: data.primary, data.index_a, and data.index_b must all be set");
  }
  if (config.model.feature_width != kFeatureWidth) {
    throw std::invalid_argument("config: model.feature_width must be " +
                                std::to_string(kFeatureWidth) +
                                " to match the OHLCV-plus-indices panel");
  }
  const AlignedPanel panel = align(load_csv(config.primary_csv), load_csv(config.index_a_csv),
                                   load_csv(config.index_b_csv));
  return make_windows(panel, config.model.input_window, config.model.predict_days,
                      {config.val_start, config.test_start});
}

}  // namespace aceformer
