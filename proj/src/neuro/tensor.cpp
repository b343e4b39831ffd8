#include "tactex/neuro/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include <Eigen/Core>

namespace tactex::neuro {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

namespace {
thread_local bool g_grad_enabled = true;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw NeuroError("negative dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

std::vector<double>& detail::Node::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), 0.0);
  return grad;
}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) { return full(shape, 0.0, requires_grad); }

Tensor Tensor::full(const Shape& shape, double value, bool requires_grad) {
  return from(shape, std::vector<double>(numel(shape), value), requires_grad);
}

Tensor Tensor::from(const Shape& shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != numel(shape)) {
    throw NeuroError("tensor: " + std::to_string(values.size()) + " values for shape " + shape_string(shape));
  }
  Tensor t;
  t.node_ = std::make_shared<detail::Node>();
  t.node_->shape = shape;
  t.node_->value = std::move(values);
  t.node_->requires_grad = requires_grad;
  return t;
}

Tensor Tensor::scalar(double value) { return from({1}, {value}); }

Tensor Tensor::make(Shape shape, std::vector<double> value, const std::vector<Tensor>& inputs,
                    std::function<void(detail::Node&)> backward) {
  Tensor t = from(shape, std::move(value));
  if (!g_grad_enabled) return t;
  for (const auto& in : inputs) {
    if (in.defined() && in.requires_grad()) t.node_->requires_grad = true;
  }
  if (t.node_->requires_grad) {
    for (const auto& in : inputs) {
      if (in.defined()) t.node_->parents.push_back(in.node_);
    }
    t.node_->backward = std::move(backward);
  }
  return t;
}

detail::Node& Tensor::node() const {
  if (!node_) throw NeuroError("undefined tensor");
  return *node_;
}

const Shape& Tensor::shape() const { return node().shape; }
int Tensor::dim(int i) const { return node().shape.at(static_cast<std::size_t>(i)); }
std::size_t Tensor::size() const { return node().value.size(); }
bool Tensor::requires_grad() const { return node().requires_grad; }
std::vector<double>& Tensor::values() { return node().value; }
const std::vector<double>& Tensor::values() const { return node().value; }
const std::vector<double>& Tensor::grad() const { return node().grad; }

double Tensor::item() const {
  if (size() != 1) throw NeuroError("item() on tensor of shape " + shape_string(shape()));
  return node().value[0];
}

void Tensor::zero_grad() const { node().grad.clear(); }

void Tensor::backward() const {
  auto& root = node();
  if (!root.requires_grad) throw NeuroError("backward: tensor is not attached to any tracked input");
  if (root.value.size() != 1) throw NeuroError("backward: only scalar outputs can seed the pass");

  // Iterative post-order DFS for a topological order.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{&root, 0}};
  seen.insert(&root);
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      detail::Node* p = n->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  root.grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (n->backward && !n->grad.empty()) n->backward(*n);
  }
}

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw NeuroError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

detail::Node& parent(detail::Node& n, std::size_t i) { return *n.parents[i]; }

// Applies f elementwise; df(x, y) gives dy/dx from input and output values.
template <typename F, typename DF>
Tensor unary(const Tensor& a, F f, DF df) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[i]);
  return Tensor::make(a.shape(), std::move(out), {a}, [df](detail::Node& self) {
    auto& p = parent(self, 0);
    auto& g = p.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * df(p.value[i], self.value[i]);
  });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  const bool ta = a.requires_grad(), tb = b.requires_grad();
  return Tensor::make(a.shape(), std::move(out), {a, b}, [ta, tb](detail::Node& self) {
    const bool tracked[2] = {ta, tb};
    for (std::size_t k = 0; k < 2; ++k) {
      if (!tracked[k]) continue;
      auto& g = parent(self, k).grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, mul_scalar(b, -1.0)); }

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  const bool ta = a.requires_grad(), tb = b.requires_grad();
  return Tensor::make(a.shape(), std::move(out), {a, b}, [ta, tb](detail::Node& self) {
    // parents holds both inputs whenever either is tracked
    auto& pa = parent(self, 0);
    auto& pb = parent(self, 1);
    if (ta) {
      auto& g = pa.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pb.value[i];
    }
    if (tb) {
      auto& g = pb.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * pa.value[i];
    }
  });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& a, double s) {
  return unary(a, [s](double x) { return x * s; }, [s](double, double) { return s; });
}

Tensor square(const Tensor& a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Tensor reciprocal(const Tensor& a) {
  return unary(a, [](double x) { return 1.0 / x; }, [](double, double y) { return -y * y; });
}

Tensor minimum(const Tensor& a, double c) {
  return unary(a, [c](double x) { return x < c ? x : c; }, [c](double x, double) { return x < c ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
  return unary(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); }, [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor silu(const Tensor& a) {
  return unary(
      a, [](double x) { return x / (1.0 + std::exp(-x)); },
      [](double x, double) {
        const double s = 1.0 / (1.0 + std::exp(-x));
        return s * (1.0 + x * (1.0 - s));
      });
}

Tensor sub_broadcast(const Tensor& x, const Tensor& s) {
  if (s.size() != 1) throw NeuroError("sub_broadcast: subtrahend must hold one value");
  const double sv = s.values()[0];
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.values()[i] - sv;
  const bool tx = x.requires_grad(), ts = s.requires_grad();
  return Tensor::make(x.shape(), std::move(out), {x, s}, [tx, ts](detail::Node& self) {
    if (tx) {
      auto& g = parent(self, 0).grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (ts) {
      double total = 0.0;
      for (double v : self.grad) total += v;
      parent(self, 1).grad_buffer()[0] -= total;
    }
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return Tensor::make({1}, {s}, {a}, [](detail::Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (double& v : g) v += self.grad[0];
  });
}

Tensor mean(const Tensor& a) { return mul_scalar(sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor reshape(const Tensor& a, const Shape& shape) {
  if (numel(shape) != a.size()) {
    throw NeuroError("reshape: " + shape_string(a.shape()) + " -> " + shape_string(shape));
  }
  return Tensor::make(shape, a.values(), {a}, [](detail::Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.dim(1) != b.dim(0)) {
    throw NeuroError("matmul: shape mismatch " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  std::vector<double> out(static_cast<std::size_t>(m) * n);
  MapMat(out.data(), m, n).noalias() = CMapMat(a.values().data(), m, k) * CMapMat(b.values().data(), k, n);
  const bool ta = a.requires_grad(), tb = b.requires_grad();
  return Tensor::make({m, n}, std::move(out), {a, b}, [=](detail::Node& self) {
    auto& pa = parent(self, 0);
    auto& pb = parent(self, 1);
    CMapMat g(self.grad.data(), m, n);
    if (ta) MapMat(pa.grad_buffer().data(), m, k).noalias() += g * CMapMat(pb.value.data(), k, n).transpose();
    if (tb) MapMat(pb.grad_buffer().data(), k, n).noalias() += CMapMat(pa.value.data(), m, k).transpose() * g;
  });
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.shape().size() != 2 || w.shape().size() != 2 || x.dim(1) != w.dim(1)) {
    throw NeuroError("linear: shape mismatch " + shape_string(x.shape()) + " vs weight " + shape_string(w.shape()));
  }
  const int n = x.dim(0), in = x.dim(1), out_dim = w.dim(0);
  const bool has_b = b.defined();
  if (has_b && (b.size() != static_cast<std::size_t>(out_dim))) throw NeuroError("linear: bias size mismatch");
  std::vector<double> out(static_cast<std::size_t>(n) * out_dim);
  MapMat y(out.data(), n, out_dim);
  y.noalias() = CMapMat(x.values().data(), n, in) * CMapMat(w.values().data(), out_dim, in).transpose();
  if (has_b) y.rowwise() += Eigen::Map<const Eigen::RowVectorXd>(b.values().data(), out_dim);
  const bool tx = x.requires_grad(), tw = w.requires_grad(), tb = has_b && b.requires_grad();
  std::vector<Tensor> inputs{x, w};
  if (has_b) inputs.push_back(b);
  return Tensor::make({n, out_dim}, std::move(out), inputs, [=](detail::Node& self) {
    auto& px = parent(self, 0);
    auto& pw = parent(self, 1);
    CMapMat g(self.grad.data(), n, out_dim);
    if (tx) MapMat(px.grad_buffer().data(), n, in).noalias() += g * CMapMat(pw.value.data(), out_dim, in);
    if (tw) MapMat(pw.grad_buffer().data(), out_dim, in).noalias() += g.transpose() * CMapMat(px.value.data(), n, in);
    if (tb) {
      Eigen::Map<Eigen::RowVectorXd>(parent(self, 2).grad_buffer().data(), out_dim) += g.colwise().sum();
    }
  });
}

Tensor slice_cols(const Tensor& x, int start, int count) {
  if (x.shape().size() != 2 || start < 0 || count < 0 || start + count > x.dim(1)) {
    throw NeuroError("slice_cols: range out of bounds for " + shape_string(x.shape()));
  }
  const int n = x.dim(0), cols = x.dim(1);
  std::vector<double> out(static_cast<std::size_t>(n) * count);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < count; ++c) out[static_cast<std::size_t>(r) * count + c] = x.values()[static_cast<std::size_t>(r) * cols + start + c];
  return Tensor::make({n, count}, std::move(out), {x}, [=](detail::Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < count; ++c)
        g[static_cast<std::size_t>(r) * cols + start + c] += self.grad[static_cast<std::size_t>(r) * count + c];
  });
}

Tensor select_rows(const Tensor& x, const std::vector<int>& rows) {
  if (x.shape().size() != 2) throw NeuroError("select_rows: expects a 2-D tensor");
  const int n = x.dim(0), cols = x.dim(1);
  std::vector<double> out(rows.size() * static_cast<std::size_t>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= n) throw NeuroError("select_rows: index out of range");
    std::copy_n(x.values().begin() + static_cast<std::ptrdiff_t>(rows[i]) * cols, cols,
                out.begin() + static_cast<std::ptrdiff_t>(i) * cols);
  }
  return Tensor::make({static_cast<int>(rows.size()), cols}, std::move(out), {x}, [rows, cols](detail::Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (int c = 0; c < cols; ++c)
        g[static_cast<std::size_t>(rows[i]) * cols + c] += self.grad[i * static_cast<std::size_t>(cols) + c];
  });
}

namespace {

struct ConvGeom {
  int n, c, h, w, o, k, stride, pad, oh, ow;
  int patch() const { return c * k * k; }
  int pixels() const { return oh * ow; }
};

// cols[(ci*k + ky)*k + kx, oy*ow + ox] for one sample.
void im2col(const double* img, const ConvGeom& g, double* cols) {
  for (int ci = 0; ci < g.c; ++ci)
    for (int ky = 0; ky < g.k; ++ky)
      for (int kx = 0; kx < g.k; ++kx) {
        double* row = cols + static_cast<std::ptrdiff_t>((ci * g.k + ky) * g.k + kx) * g.pixels();
        for (int oy = 0; oy < g.oh; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          for (int ox = 0; ox < g.ow; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            row[oy * g.ow + ox] = (iy < 0 || iy >= g.h || ix < 0 || ix >= g.w)
                                      ? 0.0
                                      : img[(static_cast<std::ptrdiff_t>(ci) * g.h + iy) * g.w + ix];
          }
        }
      }
}

void col2im(const double* cols, const ConvGeom& g, double* img) {
  for (int ci = 0; ci < g.c; ++ci)
    for (int ky = 0; ky < g.k; ++ky)
      for (int kx = 0; kx < g.k; ++kx) {
        const double* row = cols + static_cast<std::ptrdiff_t>((ci * g.k + ky) * g.k + kx) * g.pixels();
        for (int oy = 0; oy < g.oh; ++oy) {
          const int iy = oy * g.stride - g.pad + ky;
          if (iy < 0 || iy >= g.h) continue;
          for (int ox = 0; ox < g.ow; ++ox) {
            const int ix = ox * g.stride - g.pad + kx;
            if (ix < 0 || ix >= g.w) continue;
            img[(static_cast<std::ptrdiff_t>(ci) * g.h + iy) * g.w + ix] += row[oy * g.ow + ox];
          }
        }
      }
}

}  // namespace

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, int stride, int padding) {
  if (x.shape().size() != 4 || w.shape().size() != 4 || x.dim(1) != w.dim(1) || w.dim(2) != w.dim(3)) {
    throw NeuroError("conv2d: shape mismatch " + shape_string(x.shape()) + " vs kernel " + shape_string(w.shape()));
  }
  if (stride < 1 || padding < 0) throw NeuroError("conv2d: invalid stride or padding");
  ConvGeom g{x.dim(0), x.dim(1), x.dim(2), x.dim(3), w.dim(0), w.dim(2), stride, padding, 0, 0};
  g.oh = (g.h + 2 * g.pad - g.k) / g.stride + 1;
  g.ow = (g.w + 2 * g.pad - g.k) / g.stride + 1;
  if (g.oh <= 0 || g.ow <= 0) throw NeuroError("conv2d: input smaller than kernel");
  if (b.defined() && b.size() != static_cast<std::size_t>(g.o)) throw NeuroError("conv2d: bias size mismatch");

  const std::size_t in_stride = static_cast<std::size_t>(g.c) * g.h * g.w;
  const std::size_t out_stride = static_cast<std::size_t>(g.o) * g.pixels();
  const std::size_t col_size = static_cast<std::size_t>(g.patch()) * g.pixels();
  // Columns are kept for the weight gradient.
  auto cols = std::make_shared<std::vector<double>>(col_size * g.n);
  std::vector<double> out(out_stride * g.n);
  CMapMat wm(w.values().data(), g.o, g.patch());
  for (int s = 0; s < g.n; ++s) {
    double* cs = cols->data() + col_size * s;
    im2col(x.values().data() + in_stride * s, g, cs);
    MapMat y(out.data() + out_stride * s, g.o, g.pixels());
    y.noalias() = wm * CMapMat(cs, g.patch(), g.pixels());
    if (b.defined()) y.colwise() += Eigen::Map<const Eigen::VectorXd>(b.values().data(), g.o);
  }
  const bool tx = x.requires_grad(), tw = w.requires_grad(), tb = b.defined() && b.requires_grad();
  std::vector<Tensor> inputs{x, w};
  if (b.defined()) inputs.push_back(b);
  return Tensor::make({g.n, g.o, g.oh, g.ow}, std::move(out), inputs, [=](detail::Node& self) {
    auto& px = parent(self, 0);
    auto& pw = parent(self, 1);
    CMapMat wv(pw.value.data(), g.o, g.patch());
    std::vector<double> dcols(tx ? col_size : 0);
    for (int s = 0; s < g.n; ++s) {
      CMapMat gy(self.grad.data() + out_stride * s, g.o, g.pixels());
      CMapMat cs(cols->data() + col_size * s, g.patch(), g.pixels());
      if (tw) MapMat(pw.grad_buffer().data(), g.o, g.patch()).noalias() += gy * cs.transpose();
      if (tb) Eigen::Map<Eigen::VectorXd>(parent(self, 2).grad_buffer().data(), g.o) += gy.rowwise().sum();
      if (tx) {
        MapMat(dcols.data(), g.patch(), g.pixels()).noalias() = wv.transpose() * gy;
        col2im(dcols.data(), g, px.grad_buffer().data() + in_stride * s);
      }
    }
  });
}

Tensor global_avg_pool(const Tensor& x) {
  if (x.shape().size() != 4) throw NeuroError("global_avg_pool: expects [N,C,H,W]");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  std::vector<double> out(static_cast<std::size_t>(n) * c);
  for (std::size_t i = 0; i < out.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < hw; ++j) s += x.values()[i * hw + j];
    out[i] = s / static_cast<double>(hw);
  }
  return Tensor::make({n, c}, std::move(out), {x}, [hw](detail::Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    const double inv = 1.0 / static_cast<double>(hw);
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      for (std::size_t j = 0; j < hw; ++j) g[i * hw + j] += self.grad[i] * inv;
  });
}

Tensor dropout(const Tensor& x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw NeuroError("dropout: p must be in [0, 1)");
  if (!training || p == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - p);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = keep(rng) ? 1.0 / (1.0 - p) : 0.0;
  return mul(x, Tensor::from(x.shape(), std::move(mask)));
}

}  // namespace tactex::neuro
