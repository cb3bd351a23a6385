#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "curtail/nn/kernels.hpp"
#include "curtail/nn/mlp.hpp"

using namespace curtail::nn;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

void check_close(const std::vector<double>& a, const std::vector<double>& b, double tol = 1e-12) {
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= tol * (1.0 + std::abs(a[i])));
}

}  // namespace

TEST_CASE("scalar kernels on hand values") {
  const Kernels& k = scalar_kernels();
  const double w[] = {1, 2, 3, 4, 5, 6};  // 2 x 3
  const double b[] = {0.5, -0.5};
  const double x[] = {1, 0, -1};
  double y[2];
  k.affine(w, b, x, y, 2, 3);
  CHECK(y[0] == -1.5);
  CHECK(y[1] == -2.5);
  double gx[3] = {0, 0, 0};
  const double g[] = {1, -1};
  k.affine_transpose_acc(w, g, gx, 2, 3);
  CHECK(gx[0] == -3);
  CHECK(gx[1] == -3);
  CHECK(gx[2] == -3);
  double gw[6] = {};
  k.outer_acc(gw, g, x, 2, 3);
  CHECK(gw[0] == 1);
  CHECK(gw[2] == -1);
  CHECK(gw[3] == -1);
  double t[] = {0.0};
  const double o[] = {1.0};
  k.lerp(t, o, 0.005, 1);
  CHECK(t[0] == doctest::Approx(0.005));
}

TEST_CASE("AVX2 kernels match the scalar reference") {
  const Kernels* fast = avx2_kernels();
  if (!fast) {
    MESSAGE("AVX2 variant unavailable on this machine; equivalence not exercised");
    return;
  }
  const Kernels& ref = scalar_kernels();
  std::mt19937_64 rng(7);
  for (int out : {1, 3, 4, 7, 16, 64}) {
    for (int in : {1, 2, 5, 8, 13, 64, 67}) {
      const auto w = random_vec(static_cast<std::size_t>(out) * in, rng);
      const auto b = random_vec(out, rng);
      const auto x = random_vec(in, rng);
      const auto g = random_vec(out, rng);
      std::vector<double> y1(out), y2(out);
      ref.affine(w.data(), b.data(), x.data(), y1.data(), out, in);
      fast->affine(w.data(), b.data(), x.data(), y2.data(), out, in);
      check_close(y1, y2);

      auto gx1 = random_vec(in, rng), gx2 = gx1;
      ref.affine_transpose_acc(w.data(), g.data(), gx1.data(), out, in);
      fast->affine_transpose_acc(w.data(), g.data(), gx2.data(), out, in);
      check_close(gx1, gx2);

      auto gw1 = w, gw2 = w;
      ref.outer_acc(gw1.data(), g.data(), x.data(), out, in);
      fast->outer_acc(gw2.data(), g.data(), x.data(), out, in);
      check_close(gw1, gw2);
    }
  }
  for (std::size_t n : {1u, 3u, 4u, 9u, 100u, 1027u}) {
    const auto x = random_vec(n, rng);
    auto y1 = random_vec(n, rng), y2 = y1;
    ref.axpy(0.37, x.data(), y1.data(), n);
    fast->axpy(0.37, x.data(), y2.data(), n);
    check_close(y1, y2);

    auto t1 = random_vec(n, rng), t2 = t1;
    ref.lerp(t1.data(), x.data(), 0.005, n);
    fast->lerp(t2.data(), x.data(), 0.005, n);
    check_close(t1, t2);

    auto p1 = random_vec(n, rng), p2 = p1;
    auto m1 = random_vec(n, rng), m2 = m1;
    auto v1 = random_vec(n, rng);
    for (double& v : v1) v = std::abs(v);
    auto v2 = v1;
    ref.adam(p1.data(), x.data(), m1.data(), v1.data(), n, 1e-3, 0.9, 0.999, 1e-8, 0.19, 0.002);
    fast->adam(p2.data(), x.data(), m2.data(), v2.data(), n, 1e-3, 0.9, 0.999, 1e-8, 0.19, 0.002);
    check_close(p1, p2);
    check_close(m1, m2);
    check_close(v1, v2);
  }
}

TEST_CASE("forward pass agrees across instruction sets") {
  if (!avx2_kernels()) return;
  std::mt19937_64 rng(3);
  const int sizes[] = {13, 64, 64, 2};
  const MlpParams p = make_mlp(sizes, Activation::tanh, rng, 0.5);
  const auto x = random_vec(13, rng);
  select_isa(Isa::scalar);
  const auto a = mlp_forward(p, x);
  select_isa(Isa::avx2);
  const auto b = mlp_forward(p, x);
  check_close(a, b);
  CHECK(active_kernels().isa == Isa::avx2);
}

TEST_CASE("isa names") {
  CHECK(isa_name(Isa::scalar) == "scalar");
  CHECK(isa_name(Isa::avx2) == "avx2");
}
