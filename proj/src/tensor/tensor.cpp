#include "dctnet/tensor/tensor.hpp"

#include <unordered_set>

#include "dctnet/error.hpp"

namespace dctnet::tensor {

size_t numel_of(const Shape& shape) {
  size_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw Error(Errc::ShapeMismatch, "negative dimension in " + shape_string(shape));
    n *= static_cast<size_t>(d);
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
Tensor<T> Tensor<T>::from(Shape shape, std::vector<T> data, bool requires_grad) {
  if (numel_of(shape) != data.size())
    throw Error(Errc::ShapeMismatch, "data length " + std::to_string(data.size()) + " does not fit shape " +
                                         shape_string(shape));
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->requires_grad = requires_grad;
  return Tensor(std::move(node));
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw Error(Errc::ShapeMismatch, "item() on tensor of shape " + shape_string(shape()));
  return node_->data[0];
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> data, const std::vector<Tensor<T>>& inputs,
                      std::function<void(detail::Node<T>&)> backward_fn) {
  Tensor<T> out = Tensor<T>::from(std::move(shape), std::move(data), false);
  if (!g_grad_enabled) return out;
  bool any = false;
  for (const auto& t : inputs) any = any || (t.defined() && t.requires_grad());
  if (!any) return out;
  auto& node = *out.node();
  node.requires_grad = true;
  for (const auto& t : inputs)
    if (t.defined() && t.requires_grad()) node.parents.push_back(t.node());
  node.backward = std::move(backward_fn);
  return out;
}

template <typename T>
void backward(Tensor<T>& loss) {
  using Node = detail::Node<T>;
  if (loss.numel() != 1)
    throw Error(Errc::NonScalarLoss, "backward needs a single-element loss, got " + shape_string(loss.shape()));
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS gives a topological order (parents first).
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  loss.node()->grad_buffer()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (!node->backward) continue;
    if (!node->grad.empty()) node->backward(*node);
  }
  for (Node* node : order) {
    if (!node->backward) continue;
    node->backward = nullptr;
    node->parents.clear();
    if (node != loss.node().get()) std::vector<T>().swap(node->grad);
  }
}

template class Tensor<float>;
template class Tensor<double>;
template void backward<float>(Tensor<float>&);
template void backward<double>(Tensor<double>&);
template Tensor<float> make_result<float>(Shape, std::vector<float>, const std::vector<Tensor<float>>&,
                                          std::function<void(detail::Node<float>&)>);
template Tensor<double> make_result<double>(Shape, std::vector<double>, const std::vector<Tensor<double>>&,
                                            std::function<void(detail::Node<double>&)>);

}  // namespace dctnet::tensor
