#include "curtail/nn/kernels.hpp"

#if defined(CURTAIL_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>

namespace curtail::nn {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void affine(const double* w, const double* b, const double* x, double* y, int out, int in) {
  for (int o = 0; o < out; ++o) {
    const double* row = w + static_cast<std::size_t>(o) * in;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    int i = 0;
    for (; i + 8 <= in; i += 8) {
      acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + i), _mm256_loadu_pd(x + i), acc0);
      acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(row + i + 4), _mm256_loadu_pd(x + i + 4), acc1);
    }
    for (; i + 4 <= in; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(row + i), _mm256_loadu_pd(x + i), acc0);
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < in; ++i) acc += row[i] * x[i];
    y[o] = b[o] + acc;
  }
}

void affine_transpose_acc(const double* w, const double* g, double* gx, int out, int in) {
  for (int o = 0; o < out; ++o) {
    const double* row = w + static_cast<std::size_t>(o) * in;
    const __m256d go = _mm256_set1_pd(g[o]);
    int i = 0;
    for (; i + 4 <= in; i += 4)
      _mm256_storeu_pd(gx + i, _mm256_fmadd_pd(_mm256_loadu_pd(row + i), go, _mm256_loadu_pd(gx + i)));
    for (; i < in; ++i) gx[i] += row[i] * g[o];
  }
}

void outer_acc(double* gw, const double* g, const double* x, int out, int in) {
  for (int o = 0; o < out; ++o) {
    double* row = gw + static_cast<std::size_t>(o) * in;
    const __m256d go = _mm256_set1_pd(g[o]);
    int i = 0;
    for (; i + 4 <= in; i += 4)
      _mm256_storeu_pd(row + i, _mm256_fmadd_pd(go, _mm256_loadu_pd(x + i), _mm256_loadu_pd(row + i)));
    for (; i < in; ++i) row[i] += g[o] * x[i];
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void adam(double* p, const double* g, double* m, double* v, std::size_t n, double lr, double beta1, double beta2,
          double eps, double bc1, double bc2) {
  const __m256d b1 = _mm256_set1_pd(beta1);
  const __m256d b1c = _mm256_set1_pd(1.0 - beta1);
  const __m256d b2 = _mm256_set1_pd(beta2);
  const __m256d b2c = _mm256_set1_pd(1.0 - beta2);
  const __m256d vbc1 = _mm256_set1_pd(bc1);
  const __m256d vbc2 = _mm256_set1_pd(bc2);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vlr = _mm256_set1_pd(lr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(b1c, gi));
    const __m256d vi =
        _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)), _mm256_mul_pd(_mm256_mul_pd(b2c, gi), gi));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, vbc1);
    const __m256d v_hat = _mm256_div_pd(vi, vbc2);
    const __m256d upd = _mm256_div_pd(_mm256_mul_pd(vlr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), veps));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), upd));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
    p[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
  }
}

void lerp(double* t, const double* o, double tau, std::size_t n) {
  const __m256d a = _mm256_set1_pd(tau);
  const __m256d b = _mm256_set1_pd(1.0 - tau);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(t + i, _mm256_add_pd(_mm256_mul_pd(a, _mm256_loadu_pd(o + i)),
                                          _mm256_mul_pd(b, _mm256_loadu_pd(t + i))));
  for (; i < n; ++i) t[i] = tau * o[i] + (1.0 - tau) * t[i];
}

const Kernels kAvx2{Isa::avx2, affine, affine_transpose_acc, outer_acc, axpy, adam, lerp};

}  // namespace

const Kernels& avx2_table() { return kAvx2; }

}  // namespace curtail::nn

#endif
