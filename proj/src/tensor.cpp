#include "hvr/tensor.hpp"

#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace hvr {

std::size_t shape_size(const Shape& dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  return n;
}

std::string shape_str(const Shape& dims) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < dims.size(); ++i) os << (i ? "," : "") << dims[i];
  os << ")";
  return os.str();
}

Tensor::Tensor(Shape dims, double fill, bool requires_grad) {
  node_ = std::make_shared<detail::TensorNode>();
  node_->values.assign(shape_size(dims), fill);
  node_->dims = std::move(dims);
  node_->requires_grad = requires_grad;
  if (requires_grad) node_->ensure_grad();
}

Tensor Tensor::from_values(Shape dims, std::vector<double> values,
                           bool requires_grad) {
  if (values.size() != shape_size(dims))
    throw std::invalid_argument("tensor: " + std::to_string(values.size()) +
                                " values for shape " + shape_str(dims));
  Tensor t;
  t.node_ = std::make_shared<detail::TensorNode>();
  t.node_->dims = std::move(dims);
  t.node_->values = std::move(values);
  t.node_->requires_grad = requires_grad;
  if (requires_grad) t.node_->ensure_grad();
  return t;
}

Tensor Tensor::scalar(double v) { return from_values({1}, {v}); }

double Tensor::item() const {
  if (!node_ || node_->values.size() != 1)
    throw std::logic_error("item() requires a scalar tensor");
  return node_->values[0];
}

void Tensor::backward() const {
  if (!node_ || node_->values.size() != 1)
    throw std::logic_error("backward() starts from a scalar loss");

  // Topological order via iterative DFS over parents.
  std::vector<detail::TensorNode*> order;
  std::unordered_set<detail::TensorNode*> visited;
  std::vector<std::pair<detail::TensorNode*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      detail::TensorNode* p = n->parents[next++].get();
      if (visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  // Fresh gradients for interior nodes; leaves keep accumulating.
  for (detail::TensorNode* n : order)
    if (n->backward_fn) n->grad.assign(n->values.size(), 0.0);
  node_->ensure_grad();
  node_->grad[0] += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::TensorNode* n = *it;
    if (n->backward_fn && n->requires_grad) n->backward_fn(*n);
  }
}

namespace detail {

Tensor make_result(Shape dims, std::vector<double> values,
                   std::vector<Tensor> parents,
                   std::function<void(TensorNode&)> backward_fn) {
  Tensor out = Tensor::from_values(std::move(dims), std::move(values));
  auto n = out.node();
  bool needs = false;
  for (const Tensor& p : parents) {
    needs = needs || p.requires_grad();
    n->parents.push_back(p.node());
  }
  n->requires_grad = needs;
  if (needs) n->backward_fn = std::move(backward_fn);
  return out;
}

}  // namespace detail

}  // namespace hvr
