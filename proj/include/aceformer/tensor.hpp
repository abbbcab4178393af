#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace aceformer::ad {

struct Node;

// Handle to one value in the compute graph. Copying shares the node.
class Tensor {
 public:
  Tensor() = default;

  const std::vector<std::size_t>& shape() const;
  const std::vector<double>& data() const;
  std::vector<double>& data_mut();  // in-place update (optimizer); grads are unaffected
  const std::vector<double>& grad() const;
  bool requires_grad() const;
  std::size_t size() const;
  bool defined() const { return node_ != nullptr; }

  double scalar() const;  // value of a size-1 tensor

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& handle() const { return node_; }

  static Tensor wrap(std::shared_ptr<Node> node);

 private:
  std::shared_ptr<Node> node_;
};

struct Node {
  std::vector<std::size_t> shape;
  std::vector<double> data;   // row-major
  std::vector<double> grad;   // sized with data once gradients flow
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;  // pushes this node's grad into the parents
  const char* op = "leaf";

  void ensure_grad();
};

// Leaf with independent storage. Gradient buffers start at zero.
Tensor make_leaf(std::vector<std::size_t> shape, std::vector<double> data,
                 bool requires_grad = false);
Tensor make_scalar(double value, bool requires_grad = false);

// Graph-interior node; requires_grad is inherited from the parents and the
// forward output is rejected if any entry is non-finite.
Tensor make_op(const char* op, std::vector<std::size_t> shape, std::vector<double> data,
               std::vector<Tensor> parents, std::function<void(Node&)> backprop);

// Reverse-mode sweep from a size-1 loss; accumulates into .grad of every
// reachable tensor that requires gradients.
void backward(const Tensor& loss);

void zero_grad(const Tensor& t);

std::string shape_str(const std::vector<std::size_t>& shape);
std::size_t shape_size(const std::vector<std::size_t>& shape);

}  // namespace aceformer::ad
