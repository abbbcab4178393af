#include "aceformer/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace aceformer::ad {

void AdamState::init(std::size_t n) {
  m.assign(n, 0.0);
  v.assign(n, 0.0);
  step = 0;
}

void adam_step(std::vector<double>& values, const std::vector<double>& grads, AdamState& state,
               const AdamParams& hp) {
  if (grads.size() != values.size()) {
    throw std::invalid_argument("adam_step: gradient size " + std::to_string(grads.size()) +
                                " does not match parameter size " +
                                std::to_string(values.size()));
  }
  if (state.m.size() != values.size()) state.init(values.size());

  ++state.step;
  const double bc1 = 1.0 - std::pow(hp.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(hp.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double g = grads[i];
    state.m[i] = hp.beta1 * state.m[i] + (1.0 - hp.beta1) * g;
    state.v[i] = hp.beta2 * state.v[i] + (1.0 - hp.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    values[i] -= hp.lr * m_hat / (std::sqrt(v_hat) + hp.eps);
  }
}

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, AdamParams hp)
    : params_(std::move(params)), states_(params_.size()), hp_(hp) {
  for (std::size_t i = 0; i < params_.size(); ++i) states_[i].init(params_[i].size());
}

void AdamOptimizer::zero_grad() {
  for (Tensor& p : params_) ad::zero_grad(p);
}

void AdamOptimizer::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    adam_step(params_[i].data_mut(), params_[i].grad(), states_[i], hp_);
  }
}

}  // namespace aceformer::ad
