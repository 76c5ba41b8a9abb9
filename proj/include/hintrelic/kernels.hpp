#pragma once

#include <cstddef>
#include <string_view>

namespace hintrelic::kernels {

// Dense float64 inner loops used by the autodiff engine.
//
// Every kernel has a scalar reference and an AVX2 variant. The AVX2 variants
// vectorise across independent output elements only and use separate
// multiply/add (no FMA), so both backends produce bit-identical results.
// Reductions along a contiguous axis are deliberately not exposed here.

struct KernelTable {
  const char* name;

  // y[i] += a * x[i]
  void (*axpy)(std::size_t n, double a, const double* x, double* y);
  // out[i] = x[i] + y[i]
  void (*add)(std::size_t n, const double* x, const double* y, double* out);
  // out[i] = x[i] * y[i]
  void (*mul)(std::size_t n, const double* x, const double* y, double* out);
  // out[i] = a * x[i]
  void (*scale)(std::size_t n, double a, const double* x, double* out);
  // out[i] = max(x[i], 0)
  void (*relu)(std::size_t n, const double* x, double* out);
  // gx[i] += x[i] > 0 ? g[i] : 0
  void (*relu_backward)(std::size_t n, const double* x, const double* g, double* gx);
  // Running max with first-argmax tie breaking:
  // where x[i] > best[i]: best[i] = x[i], arg[i] = index.
  void (*max_update)(std::size_t n, const double* x, double* best, long* arg, long index);
  // C[M,N] += A[M,K] * B[K,N], row-major. Accumulates over k in ascending order.
  void (*gemm)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
               double* c);
};

const KernelTable& scalar_kernels();

// Returns nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_kernels();

bool cpu_has_avx2();

// Active table. Picks AVX2 when compiled and supported by the CPU unless the
// HINTRELIC_KERNELS environment variable is set to "scalar".
const KernelTable& active();

// Forces a backend ("scalar" or "avx2"). Returns false if unavailable.
bool select(std::string_view name);

}  // namespace hintrelic::kernels
