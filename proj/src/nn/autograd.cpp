#include "cmlab/nn/autograd.hpp"

#include <stdexcept>
#include <unordered_set>

namespace cmlab::nn {

Tensor& Node::grad_buffer() {
  if (grad.empty() && !value.empty()) grad = Tensor(value.rows(), value.cols());
  return grad;
}

Var::Var(Tensor value, bool requires_grad) : node_(std::make_shared<Node>()) {
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

Var Var::make(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backward) {
  Var out(std::move(value), false);
  bool any = false;
  for (const auto& p : parents) any = any || p.requires_grad();
  if (any) {
    out.node_->requires_grad = true;
    out.node_->parents.reserve(parents.size());
    for (auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward_fn = std::move(backward);
  }
  return out;
}

void Var::backward() const {
  if (value().rows() != 1 || value().cols() != 1) throw std::invalid_argument("backward: root must be a scalar");
  backward(Tensor(1, 1, 1.0));
}

void Var::backward(const Tensor& seed) const {
  if (!seed.same_shape(value())) throw std::invalid_argument("backward: seed shape mismatch");
  if (!requires_grad()) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  Tensor& g = node_->grad_buffer();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed[i];
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
  }
  // Interior gradients are not needed after the sweep; leaves keep theirs.
  for (Node* n : order)
    if (n->backward_fn) n->grad = Tensor();
}

void Var::zero_grad() { node_->grad = Tensor(); }

}  // namespace cmlab::nn
