#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "tactex/common/rng.hpp"

namespace tactex::neuro {

using Shape = std::vector<int>;

class NeuroError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::size_t numel(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {
struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer();
};
}  // namespace detail

/// Disables graph recording on this thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Reverse-mode differentiable dense array of doubles, row-major.
/// Copies share storage; a result tracks gradients when any input does.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, double value, bool requires_grad = false);
  static Tensor from(const Shape& shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  int dim(int i) const;
  std::size_t size() const;
  bool requires_grad() const;

  std::vector<double>& values();
  const std::vector<double>& values() const;
  /// Empty until a backward pass reaches this tensor.
  const std::vector<double>& grad() const;
  double item() const;

  /// Seeds d(self)/d(self) = 1 on a scalar and propagates to every tracked input.
  void backward() const;
  void zero_grad() const;

  /// Internal: build a result tensor wired to its inputs.
  static Tensor make(Shape shape, std::vector<double> value, const std::vector<Tensor>& inputs,
                     std::function<void(detail::Node&)> backward);
  detail::Node& node() const;

 private:
  std::shared_ptr<detail::Node> node_;
};

// Elementwise (identical shapes).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);
Tensor square(const Tensor& a);
Tensor reciprocal(const Tensor& a);
/// min(a, c) elementwise; gradient follows the active branch.
Tensor minimum(const Tensor& a, double c);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor silu(const Tensor& a);

/// x - s where s holds a single value.
Tensor sub_broadcast(const Tensor& x, const Tensor& s);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor reshape(const Tensor& a, const Shape& shape);

/// [m,k] x [k,n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// x[N,in] * W[out,in]^T + b[out]; `b` may be undefined.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);
/// Columns [start, start + count) of a 2-D tensor.
Tensor slice_cols(const Tensor& x, int start, int count);
/// Rows of a 2-D tensor in the given order.
Tensor select_rows(const Tensor& x, const std::vector<int>& rows);

/// x[N,C,H,W], w[O,C,k,k], b[O]; zero padding.
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int padding);
/// [N,C,H,W] -> [N,C].
Tensor global_avg_pool(const Tensor& x);
/// Inverted dropout; identity when not training or p == 0.
Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);

}  // namespace tactex::neuro
