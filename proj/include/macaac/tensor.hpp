#pragma once

// Minimal reverse-mode automatic differentiation over dense row-major
// float64 tensors. The graph is built by running the forward computation
// (define-by-run) and is released when the last Tensor referring to it dies.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace macaac::ad {

using Shape = std::vector<std::size_t>;

std::string shape_str(const Shape& s);
std::size_t shape_numel(const Shape& s);

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // empty unless requires_grad
  bool requires_grad = false;
  bool backpropagated = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into the inputs' grads.
  std::function<void(Node&)> vjp;
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double v, bool requires_grad = false);
  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t numel() const;
  // Matrix view: a rank-1 tensor of length n is a 1 x n row.
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<const double> data() const;
  std::span<double> mutable_data();
  double item() const;
  double at(std::size_t r, std::size_t c) const;
  double operator[](std::size_t i) const { return data()[i]; }

  bool requires_grad() const;
  void set_requires_grad(bool on);
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  void zero_grad();

  // Populates grads of every requires-grad ancestor of this scalar.
  // Throws ContractError for a non-scalar, StateError when called a second
  // time on the same graph without reset_backward().
  void backward();
  // Zeroes the grads of all requires-grad leaves reachable from this tensor
  // and re-arms backward().
  void reset_backward();

  // Same values, no graph history, no grad.
  Tensor detach() const;
  // Deep copy of values into a fresh leaf.
  Tensor clone(bool requires_grad = false) const;

  const std::shared_ptr<Node>& node() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

// While alive, operations on this thread record no graph (inference mode).
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// ---- operations -----------------------------------------------------------

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor add_scalar(const Tensor& a, double s);
// a: r x c, bias: c (or 1 x c) added to every row.
Tensor add_bias(const Tensor& a, const Tensor& bias);
// a: r x c, w: r x 1 multiplies row r of a by w[r].
Tensor mul_col(const Tensor& a, const Tensor& w);
Tensor relu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double slope = 0.01);
Tensor log(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor square(const Tensor& a);
// a: r x c, index[r] < c -> r x 1 with a[r, index[r]].
Tensor gather(const Tensor& a, std::span<const std::size_t> index);
// Rank-2 concatenation along axis 0 (rows) or 1 (columns).
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t count);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Rank-2 reduction; keeps the reduced axis with extent 1.
Tensor sum_axis(const Tensor& a, std::size_t axis);
Tensor softmax(const Tensor& a, std::size_t axis);
Tensor log_softmax(const Tensor& a, std::size_t axis);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }

}  // namespace macaac::ad
