#include <doctest.h>

#include <cmath>
#include <vector>

#include "tactile/rng.hpp"
#include "tactile/simd/kernels.hpp"

using namespace tactile;
using namespace tactile::simd;

namespace {

std::vector<float> random_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

std::vector<const KernelTable*> tables() {
  std::vector<const KernelTable*> t{&scalar_kernels()};
  if (const auto* a = avx2_kernels()) t.push_back(a);
  return t;
}

// Odd lengths exercise the vector tails.
const std::size_t kLengths[] = {0, 1, 7, 8, 9, 31, 64, 1000, 4099};

AdamCoefficients coefficients(std::uint64_t t) {
  const double b1 = 0.9, b2 = 0.999;
  return {1e-3f, static_cast<float>(b1), static_cast<float>(b2), static_cast<float>(1.0 - b1),
          static_cast<float>(1.0 - b2), 1e-8f, static_cast<float>(1.0 - std::pow(b1, t)),
          static_cast<float>(1.0 - std::pow(b2, t))};
}

}  // namespace

TEST_SUITE("simd") {

TEST_CASE("dot and sum_squares agree with a double-precision reference") {
  for (const auto* k : tables()) {
    INFO(k->name);
    for (std::size_t n : kLengths) {
      const auto a = random_vec(n, 1 + n), b = random_vec(n, 2 + n);
      double dot = 0.0, ss = 0.0, mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        ss += static_cast<double>(a[i]) * a[i];
        mag += std::abs(static_cast<double>(a[i]) * b[i]);
      }
      CHECK(std::abs(k->dot(a.data(), b.data(), n) - dot) <= 1e-6 * (mag + 1.0));
      CHECK(std::abs(k->sum_squares(a.data(), n) - ss) <= 1e-6 * (ss + 1.0));
    }
  }
}

TEST_CASE("axpy matches the elementwise formula in both variants") {
  for (std::size_t n : kLengths) {
    const auto x = random_vec(n, 10 + n), y0 = random_vec(n, 20 + n);
    std::vector<float> ys = y0;
    scalar_kernels().axpy(0.37f, x.data(), ys.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(ys[i] == doctest::Approx(y0[i] + 0.37 * x[i]).epsilon(1e-6));
    if (const auto* a = avx2_kernels()) {
      std::vector<float> yv = y0;
      a->axpy(0.37f, x.data(), yv.data(), n);
      // FMA rounds once, the scalar loop twice
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(yv[i] - ys[i]) <= 2e-7f * (std::abs(ys[i]) + 1.0f));
    }
  }
}

TEST_CASE("adam_update matches the bias-corrected formula in double") {
  for (const auto* k : tables()) {
    INFO(k->name);
    for (std::size_t n : kLengths) {
      auto p = random_vec(n, 30 + n), m = random_vec(n, 31 + n), v = random_vec(n, 32 + n);
      const auto g = random_vec(n, 33 + n);
      for (auto& x : v) x = std::abs(x) * 1e-3f;
      const auto p0 = p, m0 = m, v0 = v;
      const AdamCoefficients c = coefficients(5);
      k->adam_update(p.data(), g.data(), m.data(), v.data(), n, c);
      for (std::size_t i = 0; i < n; ++i) {
        const double mm = 0.9 * m0[i] + 0.1 * g[i];
        const double vv = 0.999 * v0[i] + 0.001 * static_cast<double>(g[i]) * g[i];
        const double mh = mm / (1.0 - std::pow(0.9, 5)), vh = vv / (1.0 - std::pow(0.999, 5));
        const double pp = p0[i] - 1e-3 * mh / (std::sqrt(vh) + 1e-8);
        CHECK(m[i] == doctest::Approx(mm).epsilon(1e-5));
        CHECK(v[i] == doctest::Approx(vv).epsilon(1e-5));
        CHECK(std::abs(p[i] - pp) <= 1e-6 * (std::abs(pp) + 1e-3));
      }
    }
  }
}

TEST_CASE("avx2 and scalar adam stay within rounding after many steps") {
  const auto* a = avx2_kernels();
  if (!a) return;
  const std::size_t n = 1003;
  auto ps = random_vec(n, 40), pv = ps;
  std::vector<float> ms(n, 0.0f), vs(n, 0.0f), mv(n, 0.0f), vv(n, 0.0f);
  for (std::uint64_t t = 1; t <= 50; ++t) {
    const auto g = random_vec(n, 100 + t);
    scalar_kernels().adam_update(ps.data(), g.data(), ms.data(), vs.data(), n, coefficients(t));
    a->adam_update(pv.data(), g.data(), mv.data(), vv.data(), n, coefficients(t));
  }
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ps[i] - pv[i]) <= 1e-5f);
}

TEST_CASE("dispatch: scalar can always be selected and each variant is deterministic") {
  const Isa original = kernels().isa;
  CHECK(select(Isa::scalar));
  CHECK(kernels().isa == Isa::scalar);
  const auto a = random_vec(777, 3), b = random_vec(777, 4);
  for (const auto* k : tables()) CHECK(k->dot(a.data(), b.data(), 777) == k->dot(a.data(), b.data(), 777));
  if (avx2_kernels()) {
    CHECK(select(Isa::avx2));
    CHECK(kernels().isa == Isa::avx2);
  } else {
    CHECK_FALSE(select(Isa::avx2));
  }
  select(original);
}

}  // TEST_SUITE
