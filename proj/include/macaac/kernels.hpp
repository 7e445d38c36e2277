#pragma once

// Dense matrix kernels used by the autodiff core.
//
// Every kernel exists twice: a serial reference in `serial::` and an OpenMP
// version in `omp::`. Both compute each output element with the same
// summation order, so their results are bit-identical; the tests rely on it.

#include <cstddef>
#include <span>

namespace macaac::kernels {

enum class Backend { kSerial, kOpenMP };

// Process-wide backend used by the dispatching wrappers below.
void set_backend(Backend backend);
Backend backend();

// Row-major views. `trans_a` means op(A) = A^T where A is stored as k x m.
struct GemmArgs {
  std::size_t m = 0;  // rows of op(A) and C
  std::size_t n = 0;  // cols of op(B) and C
  std::size_t k = 0;  // shared dimension
  bool trans_a = false;
  bool trans_b = false;
};

namespace serial {
// C += op(A) * op(B)
void gemm_acc(const GemmArgs& g, std::span<const double> a, std::span<const double> b,
              std::span<double> c);
}  // namespace serial

namespace omp {
void gemm_acc(const GemmArgs& g, std::span<const double> a, std::span<const double> b,
              std::span<double> c);
}  // namespace omp

// Dispatches on backend().
void gemm_acc(const GemmArgs& g, std::span<const double> a, std::span<const double> b,
              std::span<double> c);

// Work below this many multiply-adds stays on one thread.
inline constexpr std::size_t kParallelThreshold = 1u << 15;

}  // namespace macaac::kernels
