#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hvr {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& dims);
std::string shape_str(const Shape& dims);

namespace detail {

struct TensorNode {
  Shape dims;
  std::vector<double> values;
  std::vector<double> grad;  // allocated lazily, same length as values
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;  // reads grad, accumulates into parents

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
  }
};

}  // namespace detail

// Value-semantics handle to a node of the (implicit) compute graph.
// Ops record parents and a backward function on their result node; calling
// backward() on a scalar accumulates into the grad buffer of every node that
// requires gradients. Leaf tensors created with requires_grad=true keep their
// grad buffer across backward calls until zero_grad().
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape dims, double fill = 0.0, bool requires_grad = false);

  static Tensor from_values(Shape dims, std::vector<double> values,
                            bool requires_grad = false);
  static Tensor scalar(double v);

  bool defined() const { return node_ != nullptr; }
  const Shape& dims() const { return node_->dims; }
  std::size_t size() const { return node_->values.size(); }
  std::size_t rank() const { return node_->dims.size(); }

  std::vector<double>& values() { return node_->values; }
  const std::vector<double>& values() const { return node_->values; }
  double& operator[](std::size_t i) { return node_->values[i]; }
  double operator[](std::size_t i) const { return node_->values[i]; }
  double item() const;  // scalar value; throws if size != 1

  bool requires_grad() const { return node_->requires_grad; }
  Tensor& set_requires_grad(bool b) {
    node_->requires_grad = b;
    if (b) node_->ensure_grad();
    return *this;
  }

  std::vector<double>& grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  const std::vector<double>& grad() const {
    node_->ensure_grad();
    return node_->grad;
  }
  void zero_grad() { node_->grad.assign(node_->values.size(), 0.0); }

  // Reverse pass from this (scalar) tensor; seeds d(this)/d(this) = 1.
  void backward() const;

  std::shared_ptr<detail::TensorNode> node() const { return node_; }
  static Tensor wrap(std::shared_ptr<detail::TensorNode> n) {
    Tensor t;
    t.node_ = std::move(n);
    return t;
  }

 private:
  std::shared_ptr<detail::TensorNode> node_;
};

namespace detail {

// Result node builder used by every op.
Tensor make_result(Shape dims, std::vector<double> values,
                   std::vector<Tensor> parents,
                   std::function<void(TensorNode&)> backward_fn);

}  // namespace detail

}  // namespace hvr
