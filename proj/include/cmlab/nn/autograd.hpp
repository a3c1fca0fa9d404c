#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cmlab/nn/tensor.hpp"

namespace cmlab::nn {

struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  Tensor& grad_buffer();  // allocates a zero gradient if needed
};

/// Handle to a node in a dynamically built computation graph. Copies share
/// the node. A graph is released when the last handle to its root goes away;
/// parameter leaves outlive it and keep accumulating gradients until
/// zero_grad().
class Var {
 public:
  Var() = default;
  explicit Var(Tensor value, bool requires_grad = false);

  const Tensor& value() const { return node_->value; }
  Tensor& mutable_value() { return node_->value; }
  const Tensor& grad() const { return node_->grad; }
  bool has_grad() const { return !node_->grad.empty(); }
  bool requires_grad() const { return node_->requires_grad; }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  bool defined() const { return static_cast<bool>(node_); }

  /// Reverse-mode sweep from this node. The value must be 1 x 1.
  void backward() const;
  /// Reverse sweep seeded with an explicit upstream gradient of matching shape.
  void backward(const Tensor& seed) const;
  void zero_grad();

  const std::shared_ptr<Node>& node() const { return node_; }

  /// Builds an op result. `backward` receives the output node and adds into
  /// its parents' gradient buffers. Skipped entirely when no parent needs a
  /// gradient.
  static Var make(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward);

 private:
  std::shared_ptr<Node> node_;
};

inline Var constant(Tensor t) { return Var(std::move(t), false); }
inline Var parameter(Tensor t) { return Var(std::move(t), true); }

}  // namespace cmlab::nn
