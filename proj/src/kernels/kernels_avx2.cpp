// Compiled with -mavx2 (see src/CMakeLists.txt). Only reached after a runtime
// CPU check, so nothing in here may be called from generic code paths.
#include "hintrelic/kernels.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

namespace hintrelic::kernels {
namespace {

void axpy(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_add_pd(vy, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void add(std::size_t n, const double* x, const double* y, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] + y[i];
}

void mul(std::size_t n, const double* x, const double* y, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) out[i] = x[i] * y[i];
}

void scale(std::size_t n, double a, const double* x, double* out) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) out[i] = a * x[i];
}

void relu(std::size_t n, const double* x, double* out) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d keep = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(keep, v));
  }
  for (; i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
}

void relu_backward(std::size_t n, const double* x, const double* g, double* gx) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d keep = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    const __m256d pass = _mm256_and_pd(keep, _mm256_loadu_pd(g + i));
    _mm256_storeu_pd(gx + i, _mm256_add_pd(_mm256_loadu_pd(gx + i), pass));
  }
  for (; i < n; ++i) gx[i] += x[i] > 0.0 ? g[i] : 0.0;
}

void max_update(std::size_t n, const double* x, double* best, long* arg, long index) {
  static_assert(sizeof(long) == sizeof(double));
  const __m256i vidx = _mm256_set1_epi64x(index);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vb = _mm256_loadu_pd(best + i);
    const __m256d gt = _mm256_cmp_pd(vx, vb, _CMP_GT_OQ);
    _mm256_storeu_pd(best + i, _mm256_blendv_pd(vb, vx, gt));
    const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(arg + i));
    const __m256i merged = _mm256_castpd_si256(
        _mm256_blendv_pd(_mm256_castsi256_pd(va), _mm256_castsi256_pd(vidx), gt));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(arg + i), merged);
  }
  for (; i < n; ++i) {
    if (x[i] > best[i]) {
      best[i] = x[i];
      arg[i] = index;
    }
  }
}

void gemm(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
          double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      axpy(n, av, b + p * n, crow);
    }
  }
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{"avx2", axpy, add, mul, scale, relu, relu_backward, max_update,
                                 gemm};
  return &table;
}

}  // namespace hintrelic::kernels

#else

namespace hintrelic::kernels {
const KernelTable* avx2_kernels() { return nullptr; }
}  // namespace hintrelic::kernels

#endif
