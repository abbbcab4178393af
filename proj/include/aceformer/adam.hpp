#pragma once

#include <cstdint>
#include <vector>

#include "aceformer/tensor.hpp"

namespace aceformer::ad {

struct AdamParams {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment
  std::int64_t step = 0;

  void init(std::size_t n);
};

// One bias-corrected Adam update, in place.
void adam_step(std::vector<double>& values, const std::vector<double>& grads, AdamState& state,
               const AdamParams& hp);

// Drives adam_step over a fixed parameter list.
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<Tensor> params, AdamParams hp);

  void zero_grad();
  void step();

  const std::vector<Tensor>& params() const { return params_; }

 private:
  std::vector<Tensor> params_;
  std::vector<AdamState> states_;
  AdamParams hp_;
};

}  // namespace aceformer::ad
