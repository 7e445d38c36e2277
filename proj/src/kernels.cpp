#include "macaac/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <vector>

namespace macaac::kernels {
namespace {

std::atomic<Backend> g_backend{Backend::kOpenMP};

inline double at_a(const GemmArgs& g, std::span<const double> a, std::size_t i, std::size_t p) {
  return g.trans_a ? a[p * g.m + i] : a[i * g.k + p];
}

inline double at_b(const GemmArgs& g, std::span<const double> b, std::size_t p, std::size_t j) {
  return g.trans_b ? b[j * g.k + p] : b[p * g.n + j];
}

// Rows [i0, i0 + rows) of C += op(A) * B with B stored k x n. Shared by both
// backends; every C element accumulates over p in order, so results do not
// depend on how rows are grouped.
inline void gemm_rows(const GemmArgs& g, std::span<const double> a, const double* b,
                      std::span<double> c, std::size_t i0, std::size_t rows) {
  const std::size_t n = g.n;
  if (rows == 4) {
    double* __restrict c0 = c.data() + i0 * n;
    double* __restrict c1 = c0 + n;
    double* __restrict c2 = c1 + n;
    double* __restrict c3 = c2 + n;
    for (std::size_t p = 0; p < g.k; ++p) {
      const double a0 = at_a(g, a, i0, p), a1 = at_a(g, a, i0 + 1, p);
      const double a2 = at_a(g, a, i0 + 2, p), a3 = at_a(g, a, i0 + 3, p);
      const double* __restrict brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double bv = brow[j];
        c0[j] += a0 * bv;
        c1[j] += a1 * bv;
        c2[j] += a2 * bv;
        c3[j] += a3 * bv;
      }
    }
    return;
  }
  for (std::size_t i = i0; i < i0 + rows; ++i) {
    double* __restrict crow = c.data() + i * n;
    for (std::size_t p = 0; p < g.k; ++p) {
      const double av = at_a(g, a, i, p);
      const double* __restrict brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

constexpr std::size_t kRowBlock = 4;

// C += op(A) * B^T with B stored n x k, as dot products; better than the
// axpy form when n is narrow.
inline void gemm_row_dot(const GemmArgs& g, std::span<const double> a, std::span<const double> b,
                         std::span<double> c, std::size_t i) {
  double* crow = c.data() + i * g.n;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double* brow = b.data() + j * g.k;
    double acc = 0.0;
    for (std::size_t p = 0; p < g.k; ++p) acc += at_a(g, a, i, p) * brow[p];
    crow[j] += acc;
  }
}

inline bool use_dot(const GemmArgs& g) { return g.trans_b && g.n < 8; }

// op(B) laid out k x n; copies only when B is transposed.
const double* plain_b(const GemmArgs& g, std::span<const double> b, std::vector<double>& scratch) {
  if (!g.trans_b) return b.data();
  scratch.resize(g.k * g.n);
  for (std::size_t j = 0; j < g.n; ++j) {
    for (std::size_t p = 0; p < g.k; ++p) scratch[p * g.n + j] = b[j * g.k + p];
  }
  return scratch.data();
}

}  // namespace

void set_backend(Backend b) { g_backend.store(b); }
Backend backend() { return g_backend.load(); }

namespace serial {
void gemm_acc(const GemmArgs& g, std::span<const double> a, std::span<const double> b,
              std::span<double> c) {
  if (use_dot(g)) {
    for (std::size_t i = 0; i < g.m; ++i) gemm_row_dot(g, a, b, c, i);
    return;
  }
  std::vector<double> scratch;
  const double* bp = plain_b(g, b, scratch);
  for (std::size_t i = 0; i < g.m; i += kRowBlock) gemm_rows(g, a, bp, c, i, std::min(kRowBlock, g.m - i));
}
}  // namespace serial

namespace omp {
void gemm_acc(const GemmArgs& g, std::span<const double> a, std::span<const double> b,
              std::span<double> c) {
  const long rows = static_cast<long>(g.m);
  const bool big = g.m * g.n * g.k >= kParallelThreshold;
  if (use_dot(g)) {
#pragma omp parallel for schedule(static) if (big)
    for (long i = 0; i < rows; ++i) gemm_row_dot(g, a, b, c, static_cast<std::size_t>(i));
    return;
  }
  std::vector<double> scratch;
  const double* bp = plain_b(g, b, scratch);
  const long blocks = static_cast<long>((g.m + kRowBlock - 1) / kRowBlock);
#pragma omp parallel for schedule(static) if (big)
  for (long blk = 0; blk < blocks; ++blk) {
    const std::size_t i = static_cast<std::size_t>(blk) * kRowBlock;
    gemm_rows(g, a, bp, c, i, std::min(kRowBlock, g.m - i));
  }
}
}  // namespace omp

void gemm_acc(const GemmArgs& g, std::span<const double> a, std::span<const double> b,
              std::span<double> c) {
  if (backend() == Backend::kOpenMP) {
    omp::gemm_acc(g, a, b, c);
  } else {
    serial::gemm_acc(g, a, b, c);
  }
}

}  // namespace macaac::kernels
