#include "macaac/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "macaac/errors.hpp"
#include "macaac/kernels.hpp"

namespace macaac::ad {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (auto e : s) n *= e;
  return n;
}

namespace {
thread_local bool t_grad_enabled = true;
}  // namespace

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled) { t_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { t_grad_enabled = previous_; }
bool grad_enabled() { return t_grad_enabled; }

namespace {

void check_shape(const Shape& s) {
  if (s.empty()) throw DimensionError("tensor shape must have rank >= 1");
  for (auto e : s) {
    if (e == 0) throw DimensionError("tensor extent must be positive, got " + shape_str(s));
  }
}

std::shared_ptr<Node> make_leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  check_shape(shape);
  if (values.size() != shape_numel(shape)) {
    throw DimensionError("tensor of shape " + shape_str(shape) + " needs " +
                         std::to_string(shape_numel(shape)) + " values, got " +
                         std::to_string(values.size()));
  }
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  n->requires_grad = requires_grad;
  if (requires_grad) n->grad.assign(n->value.size(), 0.0);
  return n;
}

void ensure_grad(Node& n) {
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), 0.0);
}

// Output node wired to its inputs. The vjp is attached only when some input
// needs a gradient.
Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> inputs,
                   const char* op, std::function<void(Node&)> vjp) {
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->value = std::move(values);
  n->op = op;
  if (t_grad_enabled) {
    for (const auto& t : inputs) n->requires_grad = n->requires_grad || t.requires_grad();
  }
  if (n->requires_grad) {
    n->inputs.reserve(inputs.size());
    for (const auto& t : inputs) n->inputs.push_back(t.node());
    n->vjp = std::move(vjp);
  }
  return Tensor(std::move(n));
}

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
}

void require_rank2(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_str(a.shape()));
  }
}

// Lanes of a rank<=2 tensor along `axis`: count lanes of length len, element
// k of lane l at offset(l) + k * stride.
struct Lanes {
  std::size_t count, len, stride, outer_stride;
  std::size_t offset(std::size_t l) const { return l * outer_stride; }
};

Lanes lanes_of(const Tensor& a, std::size_t axis, const char* op) {
  if (a.rank() > 2 || axis >= a.rank()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                         " invalid for shape " + shape_str(a.shape()));
  }
  if (a.rank() == 1) return {1, a.shape()[0], 1, 0};
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  if (axis == 1) return {r, c, 1, c};
  return {c, r, c, 1};
}

template <class F>
Tensor unary(const Tensor& a, const char* op, F f, std::function<void(Node&)> vjp) {
  std::vector<double> out(a.numel());
  auto x = a.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(x[i]);
  return make_result(a.shape(), std::move(out), {a}, op, std::move(vjp));
}

}  // namespace

// ---- Tensor ---------------------------------------------------------------

Tensor Tensor::zeros(Shape shape, bool requires_grad) { return full(std::move(shape), 0.0, requires_grad); }

Tensor Tensor::full(Shape shape, double v, bool requires_grad) {
  check_shape(shape);
  const std::size_t n = shape_numel(shape);
  return Tensor(make_leaf(std::move(shape), std::vector<double>(n, v), requires_grad));
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
  return Tensor(make_leaf(std::move(shape), std::move(values), requires_grad));
}

Tensor Tensor::scalar(double v, bool requires_grad) {
  return Tensor(make_leaf({1}, {v}, requires_grad));
}

const Shape& Tensor::shape() const {
  if (!node_) throw StateError("use of an undefined tensor");
  return node_->shape;
}

std::size_t Tensor::numel() const { return shape_numel(shape()); }

std::size_t Tensor::rows() const { return rank() == 1 ? 1 : shape()[0]; }

std::size_t Tensor::cols() const { return rank() == 1 ? shape()[0] : shape()[1]; }

std::span<const double> Tensor::data() const {
  shape();
  return node_->value;
}

std::span<double> Tensor::mutable_data() {
  shape();
  return node_->value;
}

double Tensor::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return node_->value[0];
}

double Tensor::at(std::size_t r, std::size_t c) const {
  if (r >= rows() || c >= cols()) throw DimensionError("index out of range");
  return node_->value[r * cols() + c];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }

void Tensor::set_requires_grad(bool on) {
  shape();
  node_->requires_grad = on;
  if (on) {
    ensure_grad(*node_);
  } else {
    node_->grad.clear();
  }
}

std::span<const double> Tensor::grad() const {
  shape();
  return node_->grad;
}

std::span<double> Tensor::mutable_grad() {
  shape();
  return node_->grad;
}

void Tensor::zero_grad() {
  shape();
  std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

namespace {

std::vector<Node*> topo_order(Node* root) {
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      Node* child = n->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  return order;  // inputs before outputs
}

}  // namespace

void Tensor::backward() {
  if (numel() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + shape_str(shape()));
  }
  if (!node_->requires_grad) {
    throw ContractError("backward() on a tensor that does not depend on any parameter");
  }
  if (node_->backpropagated) {
    throw StateError("backward() called twice on the same graph without reset_backward()");
  }
  auto order = topo_order(node_.get());
  for (Node* n : order) {
    if (!n->inputs.empty()) n->grad.assign(n->value.size(), 0.0);
    else ensure_grad(*n);
  }
  node_->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->vjp) {
      for (auto& in : n->inputs) {
        if (in->requires_grad) ensure_grad(*in);
      }
      n->vjp(*n);
    }
  }
  node_->backpropagated = true;
}

void Tensor::reset_backward() {
  shape();
  for (Node* n : topo_order(node_.get())) {
    if (n->inputs.empty()) std::fill(n->grad.begin(), n->grad.end(), 0.0);
  }
  node_->backpropagated = false;
}

Tensor Tensor::detach() const {
  shape();
  auto n = std::make_shared<Node>();
  n->shape = node_->shape;
  n->value = node_->value;
  return Tensor(std::move(n));
}

Tensor Tensor::clone(bool requires_grad) const {
  return Tensor(make_leaf(shape(), node_->value, requires_grad));
}

// ---- ops ------------------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  if (b.shape()[0] != k) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  kernels::gemm_acc({m, n, k, false, false}, a.data(), b.data(), out);
  return make_result({m, n}, std::move(out), {a, b}, "matmul", [m, n, k](Node& self) {
    Node& an = *self.inputs[0];
    Node& bn = *self.inputs[1];
    if (an.requires_grad) {
      // dA = dC * B^T
      kernels::gemm_acc({m, k, n, false, true}, self.grad, bn.value, an.grad);
    }
    if (bn.requires_grad) {
      // dB = A^T * dC
      kernels::gemm_acc({k, n, m, true, false}, an.value, self.grad, bn.grad);
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same(a, b, "add");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return make_result(a.shape(), std::move(out), {a, b}, "add", [](Node& self) {
    for (auto& in : self.inputs) {
      if (!in->requires_grad) continue;
      for (std::size_t i = 0; i < self.grad.size(); ++i) in->grad[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same(a, b, "sub");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return make_result(a.shape(), std::move(out), {a, b}, "sub", [](Node& self) {
    Node& an = *self.inputs[0];
    Node& bn = *self.inputs[1];
    if (an.requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) an.grad[i] += self.grad[i];
    }
    if (bn.requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) bn.grad[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same(a, b, "mul");
  std::vector<double> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make_result(a.shape(), std::move(out), {a, b}, "mul", [](Node& self) {
    Node& an = *self.inputs[0];
    Node& bn = *self.inputs[1];
    if (an.requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) an.grad[i] += self.grad[i] * bn.value[i];
    }
    if (bn.requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) bn.grad[i] += self.grad[i] * an.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  return unary(a, "scale", [s](double x) { return s * x; }, [s](Node& self) {
    Node& in = *self.inputs[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += s * self.grad[i];
  });
}

Tensor add_scalar(const Tensor& a, double s) {
  return unary(a, "add_scalar", [s](double x) { return x + s; }, [](Node& self) {
    Node& in = *self.inputs[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i];
  });
}

Tensor add_bias(const Tensor& a, const Tensor& bias) {
  require_rank2(a, "add_bias");
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  if (bias.numel() != c || bias.rows() != 1) {
    throw DimensionError("add_bias: bias " + shape_str(bias.shape()) + " does not match " +
                         shape_str(a.shape()));
  }
  std::vector<double> out(a.numel());
  auto x = a.data();
  auto bv = bias.data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = x[i * c + j] + bv[j];
  }
  return make_result(a.shape(), std::move(out), {a, bias}, "add_bias", [r, c](Node& self) {
    Node& an = *self.inputs[0];
    Node& bn = *self.inputs[1];
    if (an.requires_grad) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) an.grad[i] += self.grad[i];
    }
    if (bn.requires_grad) {
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) bn.grad[j] += self.grad[i * c + j];
      }
    }
  });
}

Tensor mul_col(const Tensor& a, const Tensor& w) {
  require_rank2(a, "mul_col");
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  if (w.numel() != r || w.cols() != 1) {
    throw DimensionError("mul_col: weights " + shape_str(w.shape()) + " do not match rows of " +
                         shape_str(a.shape()));
  }
  std::vector<double> out(a.numel());
  auto x = a.data();
  auto wv = w.data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = x[i * c + j] * wv[i];
  }
  return make_result(a.shape(), std::move(out), {a, w}, "mul_col", [r, c](Node& self) {
    Node& an = *self.inputs[0];
    Node& wn = *self.inputs[1];
    for (std::size_t i = 0; i < r; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        const double g = self.grad[i * c + j];
        if (an.requires_grad) an.grad[i * c + j] += g * wn.value[i];
        acc += g * an.value[i * c + j];
      }
      if (wn.requires_grad) wn.grad[i] += acc;
    }
  });
}

Tensor relu(const Tensor& a) { return leaky_relu(a, 0.0); }

Tensor leaky_relu(const Tensor& a, double slope) {
  return unary(
      a, slope == 0.0 ? "relu" : "leaky_relu",
      [slope](double x) { return x > 0.0 ? x : slope * x; },
      [slope](Node& self) {
        Node& in = *self.inputs[0];
        for (std::size_t i = 0; i < self.grad.size(); ++i) {
          in.grad[i] += self.grad[i] * (in.value[i] > 0.0 ? 1.0 : slope);
        }
      });
}

Tensor log(const Tensor& a) {
  return unary(a, "log", [](double x) { return std::log(x); }, [](Node& self) {
    Node& in = *self.inputs[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i] / in.value[i];
  });
}

Tensor exp(const Tensor& a) {
  return unary(a, "exp", [](double x) { return std::exp(x); }, [](Node& self) {
    Node& in = *self.inputs[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) in.grad[i] += self.grad[i] * self.value[i];
  });
}

Tensor square(const Tensor& a) {
  return unary(a, "square", [](double x) { return x * x; }, [](Node& self) {
    Node& in = *self.inputs[0];
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      in.grad[i] += 2.0 * in.value[i] * self.grad[i];
    }
  });
}

Tensor gather(const Tensor& a, std::span<const std::size_t> index) {
  require_rank2(a, "gather");
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  if (index.size() != r) {
    throw DimensionError("gather: " + std::to_string(index.size()) + " indices for " +
                         shape_str(a.shape()));
  }
  std::vector<std::size_t> idx(index.begin(), index.end());
  std::vector<double> out(r);
  for (std::size_t i = 0; i < r; ++i) {
    if (idx[i] >= c) throw DimensionError("gather: index " + std::to_string(idx[i]) + " >= " +
                                          std::to_string(c));
    out[i] = a.data()[i * c + idx[i]];
  }
  return make_result({r, 1}, std::move(out), {a}, "gather", [idx = std::move(idx), c](Node& self) {
    Node& in = *self.inputs[0];
    for (std::size_t i = 0; i < idx.size(); ++i) in.grad[i * c + idx[i]] += self.grad[i];
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  if (axis > 1) throw DimensionError("concat: axis must be 0 or 1");
  for (const auto& p : parts) require_rank2(p, "concat");
  const std::size_t other = axis == 0 ? parts[0].shape()[1] : parts[0].shape()[0];
  std::size_t total = 0;
  std::vector<std::size_t> extents;
  for (const auto& p : parts) {
    const std::size_t o = axis == 0 ? p.shape()[1] : p.shape()[0];
    if (o != other) {
      throw DimensionError("concat: " + shape_str(p.shape()) + " does not match " +
                           shape_str(parts[0].shape()) + " along axis " + std::to_string(1 - axis));
    }
    extents.push_back(p.shape()[axis]);
    total += p.shape()[axis];
  }
  Shape out_shape = axis == 0 ? Shape{total, other} : Shape{other, total};
  std::vector<double> out(total * other);
  if (axis == 0) {
    std::size_t off = 0;
    for (const auto& p : parts) {
      std::copy(p.data().begin(), p.data().end(), out.begin() + static_cast<long>(off));
      off += p.numel();
    }
  } else {
    std::size_t col = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const auto d = parts[k].data();
      for (std::size_t i = 0; i < other; ++i) {
        for (std::size_t j = 0; j < extents[k]; ++j) out[i * total + col + j] = d[i * extents[k] + j];
      }
      col += extents[k];
    }
  }
  return make_result(out_shape, std::move(out), parts, "concat",
                     [axis, extents, total, other](Node& self) {
                       std::size_t off = 0;
                       for (std::size_t k = 0; k < self.inputs.size(); ++k) {
                         Node& in = *self.inputs[k];
                         if (in.requires_grad) {
                           if (axis == 0) {
                             for (std::size_t i = 0; i < in.grad.size(); ++i) {
                               in.grad[i] += self.grad[off * other + i];
                             }
                           } else {
                             for (std::size_t i = 0; i < other; ++i) {
                               for (std::size_t j = 0; j < extents[k]; ++j) {
                                 in.grad[i * extents[k] + j] += self.grad[i * total + off + j];
                               }
                             }
                           }
                         }
                         off += extents[k];
                       }
                     });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count) {
  require_rank2(a, "slice_cols");
  const std::size_t r = a.shape()[0], c = a.shape()[1];
  if (count == 0 || begin + count > c) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") out of " + shape_str(a.shape()));
  }
  std::vector<double> out(r * count);
  auto x = a.data();
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < count; ++j) out[i * count + j] = x[i * c + begin + j];
  }
  return make_result({r, count}, std::move(out), {a}, "slice_cols",
                     [r, c, begin, count](Node& self) {
                       Node& in = *self.inputs[0];
                       for (std::size_t i = 0; i < r; ++i) {
                         for (std::size_t j = 0; j < count; ++j) {
                           in.grad[i * c + begin + j] += self.grad[i * count + j];
                         }
                       }
                     });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return make_result({1}, {s}, {a}, "sum", [](Node& self) {
    Node& in = *self.inputs[0];
    for (auto& g : in.grad) g += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  const double inv = 1.0 / static_cast<double>(a.numel());
  double s = 0.0;
  for (double v : a.data()) s += v;
  return make_result({1}, {s * inv}, {a}, "mean", [inv](Node& self) {
    Node& in = *self.inputs[0];
    for (auto& g : in.grad) g += self.grad[0] * inv;
  });
}

Tensor sum_axis(const Tensor& a, std::size_t axis) {
  require_rank2(a, "sum_axis");
  const Lanes ln = lanes_of(a, axis, "sum_axis");
  std::vector<double> out(ln.count, 0.0);
  auto x = a.data();
  for (std::size_t l = 0; l < ln.count; ++l) {
    double s = 0.0;
    for (std::size_t k = 0; k < ln.len; ++k) s += x[ln.offset(l) + k * ln.stride];
    out[l] = s;
  }
  Shape shape = axis == 1 ? Shape{a.shape()[0], 1} : Shape{1, a.shape()[1]};
  return make_result(shape, std::move(out), {a}, "sum_axis", [ln](Node& self) {
    Node& in = *self.inputs[0];
    for (std::size_t l = 0; l < ln.count; ++l) {
      for (std::size_t k = 0; k < ln.len; ++k) in.grad[ln.offset(l) + k * ln.stride] += self.grad[l];
    }
  });
}

Tensor softmax(const Tensor& a, std::size_t axis) {
  const Lanes ln = lanes_of(a, axis, "softmax");
  std::vector<double> out(a.numel());
  auto x = a.data();
  for (std::size_t l = 0; l < ln.count; ++l) {
    const std::size_t o = ln.offset(l);
    double mx = x[o];
    for (std::size_t k = 1; k < ln.len; ++k) mx = std::max(mx, x[o + k * ln.stride]);
    double z = 0.0;
    for (std::size_t k = 0; k < ln.len; ++k) {
      const double e = std::exp(x[o + k * ln.stride] - mx);
      out[o + k * ln.stride] = e;
      z += e;
    }
    for (std::size_t k = 0; k < ln.len; ++k) out[o + k * ln.stride] /= z;
  }
  return make_result(a.shape(), std::move(out), {a}, "softmax", [ln](Node& self) {
    Node& in = *self.inputs[0];
    for (std::size_t l = 0; l < ln.count; ++l) {
      const std::size_t o = ln.offset(l);
      double dot = 0.0;
      for (std::size_t k = 0; k < ln.len; ++k) {
        const std::size_t i = o + k * ln.stride;
        dot += self.grad[i] * self.value[i];
      }
      for (std::size_t k = 0; k < ln.len; ++k) {
        const std::size_t i = o + k * ln.stride;
        in.grad[i] += self.value[i] * (self.grad[i] - dot);
      }
    }
  });
}

Tensor log_softmax(const Tensor& a, std::size_t axis) {
  const Lanes ln = lanes_of(a, axis, "log_softmax");
  std::vector<double> out(a.numel());
  auto x = a.data();
  for (std::size_t l = 0; l < ln.count; ++l) {
    const std::size_t o = ln.offset(l);
    double mx = x[o];
    for (std::size_t k = 1; k < ln.len; ++k) mx = std::max(mx, x[o + k * ln.stride]);
    double z = 0.0;
    for (std::size_t k = 0; k < ln.len; ++k) z += std::exp(x[o + k * ln.stride] - mx);
    const double lz = mx + std::log(z);
    for (std::size_t k = 0; k < ln.len; ++k) out[o + k * ln.stride] = x[o + k * ln.stride] - lz;
  }
  return make_result(a.shape(), std::move(out), {a}, "log_softmax", [ln](Node& self) {
    Node& in = *self.inputs[0];
    for (std::size_t l = 0; l < ln.count; ++l) {
      const std::size_t o = ln.offset(l);
      double gsum = 0.0;
      for (std::size_t k = 0; k < ln.len; ++k) gsum += self.grad[o + k * ln.stride];
      for (std::size_t k = 0; k < ln.len; ++k) {
        const std::size_t i = o + k * ln.stride;
        in.grad[i] += self.grad[i] - std::exp(self.value[i]) * gsum;
      }
    }
  });
}

}  // namespace macaac::ad
