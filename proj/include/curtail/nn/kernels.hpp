#pragma once

// Dense inner loops of the MLP. Every kernel has a scalar reference and,
// on x86-64, an AVX2/FMA variant; the variant is picked once at startup from
// the CPU features (override with CURTAIL_ISA=scalar|avx2).

#include <cstddef>
#include <string_view>

namespace curtail::nn {

enum class Isa { scalar, avx2 };

[[nodiscard]] std::string_view isa_name(Isa isa);

struct Kernels {
  Isa isa;
  /// y[o] = b[o] + sum_i w[o*in + i] * x[i]   (w row-major, out x in)
  void (*affine)(const double* w, const double* b, const double* x, double* y, int out, int in);
  /// gx[i] += sum_o w[o*in + i] * g[o]
  void (*affine_transpose_acc)(const double* w, const double* g, double* gx, int out, int in);
  /// gw[o*in + i] += g[o] * x[i]
  void (*outer_acc)(double* gw, const double* g, const double* x, int out, int in);
  /// y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  /// Bias-corrected Adam update; bc1 = 1 - beta1^t, bc2 = 1 - beta2^t.
  void (*adam)(double* p, const double* g, double* m, double* v, std::size_t n, double lr, double beta1,
               double beta2, double eps, double bc1, double bc2);
  /// t = tau * o + (1 - tau) * t
  void (*lerp)(double* t, const double* o, double tau, std::size_t n);
};

[[nodiscard]] const Kernels& scalar_kernels();
/// nullptr when the build or the CPU lacks AVX2/FMA.
[[nodiscard]] const Kernels* avx2_kernels();
[[nodiscard]] const Kernels& active_kernels();
/// Throws std::runtime_error when the requested variant is unavailable.
void select_isa(Isa isa);

}  // namespace curtail::nn
