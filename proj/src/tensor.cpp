#include "aceformer/tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace aceformer::ad {

namespace {

void check_finite(const char* op, const std::vector<double>& data) {
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw std::runtime_error(std::string(op) + ": non-finite value in forward output");
    }
  }
}

}  // namespace

std::string shape_str(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  s += ")";
  return s;
}

std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void Node::ensure_grad() {
  if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

const std::vector<std::size_t>& Tensor::shape() const { return node_->shape; }
const std::vector<double>& Tensor::data() const { return node_->data; }
std::vector<double>& Tensor::data_mut() { return node_->data; }
const std::vector<double>& Tensor::grad() const { return node_->grad; }
bool Tensor::requires_grad() const { return node_->requires_grad; }
std::size_t Tensor::size() const { return node_->data.size(); }

double Tensor::scalar() const {
  if (size() != 1) {
    throw std::invalid_argument("scalar(): tensor has shape " + shape_str(shape()));
  }
  return node_->data[0];
}

Tensor Tensor::wrap(std::shared_ptr<Node> node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

Tensor make_leaf(std::vector<std::size_t> shape, std::vector<double> data, bool requires_grad) {
  if (shape_size(shape) != data.size()) {
    throw std::invalid_argument("leaf: shape " + shape_str(shape) + " does not hold " +
                                std::to_string(data.size()) + " values");
  }
  check_finite("leaf", data);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  if (requires_grad) node->ensure_grad();
  return Tensor::wrap(std::move(node));
}

Tensor make_scalar(double value, bool requires_grad) {
  return make_leaf({1}, {value}, requires_grad);
}

Tensor make_op(const char* op, std::vector<std::size_t> shape, std::vector<double> data,
               std::vector<Tensor> parents, std::function<void(Node&)> backprop) {
  if (shape_size(shape) != data.size()) {
    throw std::logic_error(std::string(op) + ": output shape/data size mismatch");
  }
  check_finite(op, data);
  auto node = std::make_shared<Node>();
  node->op = op;
  node->shape = std::move(shape);
  node->data = std::move(data);
  for (const Tensor& p : parents) {
    if (!p.defined()) throw std::invalid_argument(std::string(op) + ": undefined input tensor");
    node->requires_grad = node->requires_grad || p.requires_grad();
    node->parents.push_back(p.handle());
  }
  node->backprop = std::move(backprop);
  return Tensor::wrap(std::move(node));
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw std::invalid_argument("backward: undefined loss tensor");
  if (loss.size() != 1) {
    throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                shape_str(loss.shape()));
  }

  // iterative post-order toposort
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node(), 0}};
  seen.insert(loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next].get();
      ++next;
      if (seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) n->ensure_grad();
  loss.node()->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && n->requires_grad) n->backprop(*n);
  }
}

void zero_grad(const Tensor& t) {
  t.node()->grad.assign(t.node()->data.size(), 0.0);
}

}  // namespace aceformer::ad
