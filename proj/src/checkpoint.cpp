#include "aceformer/checkpoint.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "aceformer/io.hpp"

namespace aceformer {

namespace {

constexpr const char* kMagic = "aceformer-checkpoint";
constexpr int kVersion = 1;

std::string hex_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_double(const std::string& token, const std::string& path) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + token.size()) {
    throw std::runtime_error(path + ": malformed numeric token '" + token + "'");
  }
  return v;
}

}  // namespace

const TensorData* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return &t;
  }
  return nullptr;
}

std::string checkpoint_text(const Checkpoint& cp) {
  std::ostringstream out;
  out << kMagic << ' ' << kVersion << '\n';
  for (const auto& [key, value] : cp.meta) {
    if (key.find_first_of(" \t\n") != std::string::npos) {
      throw std::invalid_argument("checkpoint meta key contains whitespace: '" + key + "'");
    }
    if (value.find('\n') != std::string::npos) {
      throw std::invalid_argument("checkpoint meta value contains a newline (key '" + key + "')");
    }
    out << "meta " << key << ' ' << value << '\n';
  }
  for (const auto& [name, tensor] : cp.tensors) {
    if (name.find_first_of(" \t\n") != std::string::npos) {
      throw std::invalid_argument("checkpoint tensor name contains whitespace: '" + name + "'");
    }
    std::size_t expect = 1;
    for (std::size_t d : tensor.shape) expect *= d;
    if (expect != tensor.values.size()) {
      throw std::invalid_argument("checkpoint tensor '" + name + "' shape/value mismatch");
    }
    out << "tensor " << name << ' ' << tensor.shape.size();
    for (std::size_t d : tensor.shape) out << ' ' << d;
    out << '\n';
    for (std::size_t i = 0; i < tensor.values.size(); ++i) {
      if (!std::isfinite(tensor.values[i])) {
        throw std::invalid_argument("checkpoint tensor '" + name + "' has a non-finite value");
      }
      out << hex_double(tensor.values[i]);
      out << (((i + 1) % 4 == 0 || i + 1 == tensor.values.size()) ? '\n' : ' ');
    }
  }
  out << "end\n";
  return out.str();
}

void save_checkpoint(const std::string& path, const Checkpoint& cp) {
  atomic_write_file(path, checkpoint_text(cp));
}

Checkpoint parse_checkpoint(const std::string& text, const std::string& path) {
  std::istringstream in(text);
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != kMagic || version != kVersion) {
    throw std::runtime_error(path + ": not a recognized checkpoint file");
  }

  Checkpoint cp;
  std::string word;
  bool ended = false;
  while (in >> word) {
    if (word == "end") {
      ended = true;
      break;
    }
    if (word == "meta") {
      std::string key;
      if (!(in >> key)) throw std::runtime_error(path + ": truncated meta entry");
      std::string value;
      std::getline(in, value);
      if (!value.empty() && value.front() == ' ') value.erase(0, 1);
      cp.meta[key] = value;
      continue;
    }
    if (word == "tensor") {
      std::string name;
      std::size_t rank = 0;
      if (!(in >> name >> rank)) throw std::runtime_error(path + ": truncated tensor header");
      TensorData t;
      std::size_t count = 1;
      for (std::size_t i = 0; i < rank; ++i) {
        std::size_t d = 0;
        if (!(in >> d)) throw std::runtime_error(path + ": truncated tensor shape");
        t.shape.push_back(d);
        count *= d;
      }
      t.values.reserve(count);
      for (std::size_t i = 0; i < count; ++i) {
        std::string token;
        if (!(in >> token)) {
          throw std::runtime_error(path + ": tensor '" + name + "' is truncated");
        }
        t.values.push_back(parse_double(token, path));
      }
      cp.tensors.emplace_back(std::move(name), std::move(t));
      continue;
    }
    throw std::runtime_error(path + ": unexpected token '" + word + "'");
  }
  if (!ended) throw std::runtime_error(path + ": missing end marker");
  return cp;
}

Checkpoint load_checkpoint(const std::string& path) {
  return parse_checkpoint(read_file(path), path);
}

}  // namespace aceformer
