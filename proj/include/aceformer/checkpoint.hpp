#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace aceformer {

struct TensorData {
  std::vector<std::size_t> shape;
  std::vector<double> values;
};

// Named-tensor dump with string metadata. Values are written as C99
// hexadecimal floating point, so a save/load cycle is bit-exact.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, TensorData>> tensors;

  const TensorData* find(const std::string& name) const;
};

std::string checkpoint_text(const Checkpoint& cp);
Checkpoint parse_checkpoint(const std::string& text, const std::string& origin = "checkpoint");

void save_checkpoint(const std::string& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace aceformer
