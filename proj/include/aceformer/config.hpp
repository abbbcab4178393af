#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "aceformer/aceemd.hpp"
#include "aceformer/data.hpp"
#include "aceformer/model.hpp"
#include "aceformer/train.hpp"

namespace aceformer {

// Flat "key = value" lines under [section] headers; '#' or ';' lines are
// comments. Keys come back qualified as "section.key". Duplicate keys and
// keys outside any section are errors.
std::map<std::string, std::string> parse_key_values(const std::string& text);

// Everything one run needs: data locations, split dates, model and ensemble
// settings, training hyperparameters, and the single master seed that every
// random stream derives from.
struct RunConfig {
  std::string primary_csv;
  std::string index_a_csv;
  std::string index_b_csv;
  Date val_start{2100, 1, 1};
  Date test_start{2100, 1, 2};

  ModelConfig model;       // seeds overwritten by set_seed
  AceemdConfig denoise;    // standalone decomposition/denoise settings
  TrainConfig train;
  double risk_free = 0.0;
  std::uint64_t seed = 1;

  // Funnels the master seed into the model init, in-network ensemble,
  // standalone ensemble, and shuffle streams.
  void set_seed(std::uint64_t value);

  void validate() const;
};

// Defaults only; equivalent to loading an empty config file.
RunConfig default_run_config();

// Defaults overlaid with the file's keys. Unknown keys are errors so typos
// cannot silently fall back to defaults.
RunConfig load_run_config(const std::string& text);
RunConfig load_run_config_file(const std::string& path);

// The three CSVs loaded, aligned, windowed, and split as configured.
// Requires the data paths to be set and the model width to match the panel.
WindowedDataset build_dataset(const RunConfig& config);

}  // namespace aceformer
