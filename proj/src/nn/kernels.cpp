#include "curtail/nn/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace curtail::nn {

namespace scalar {

void affine(const double* w, const double* b, const double* x, double* y, int out, int in) {
  for (int o = 0; o < out; ++o) {
    const double* row = w + static_cast<std::size_t>(o) * in;
    double acc = 0.0;
    for (int i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] = b[o] + acc;
  }
}

void affine_transpose_acc(const double* w, const double* g, double* gx, int out, int in) {
  for (int o = 0; o < out; ++o) {
    const double* row = w + static_cast<std::size_t>(o) * in;
    const double go = g[o];
    for (int i = 0; i < in; ++i) gx[i] += row[i] * go;
  }
}

void outer_acc(double* gw, const double* g, const double* x, int out, int in) {
  for (int o = 0; o < out; ++o) {
    double* row = gw + static_cast<std::size_t>(o) * in;
    const double go = g[o];
    for (int i = 0; i < in; ++i) row[i] += go * x[i];
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void adam(double* p, const double* g, double* m, double* v, std::size_t n, double lr, double beta1, double beta2,
          double eps, double bc1, double bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void lerp(double* t, const double* o, double tau, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) t[i] = tau * o[i] + (1.0 - tau) * t[i];
}

}  // namespace scalar

#if defined(CURTAIL_HAVE_AVX2)
// Defined in kernels_avx2.cpp, compiled with -mavx2 -mfma.
const Kernels& avx2_table();
#endif

namespace {

const Kernels kScalar{Isa::scalar,     scalar::affine, scalar::affine_transpose_acc, scalar::outer_acc,
                      scalar::axpy,    scalar::adam,   scalar::lerp};

bool cpu_has_avx2() {
#if defined(CURTAIL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels* initial_kernels() {
  const Kernels* best = avx2_kernels() ? avx2_kernels() : &kScalar;
  if (const char* env = std::getenv("CURTAIL_ISA")) {
    const std::string want(env);
    if (want == "scalar") return &kScalar;
  }
  return best;
}

std::atomic<const Kernels*>& active_slot() {
  static std::atomic<const Kernels*> slot{initial_kernels()};
  return slot;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

const Kernels& scalar_kernels() { return kScalar; }

const Kernels* avx2_kernels() {
#if defined(CURTAIL_HAVE_AVX2)
  static const bool ok = cpu_has_avx2();
  return ok ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& active_kernels() { return *active_slot().load(std::memory_order_acquire); }

void select_isa(Isa isa) {
  if (isa == Isa::scalar) {
    active_slot().store(&kScalar, std::memory_order_release);
    return;
  }
  const Kernels* k = avx2_kernels();
  if (!k) throw std::runtime_error("AVX2/FMA kernels are not available on this machine");
  active_slot().store(k, std::memory_order_release);
}

}  // namespace curtail::nn
