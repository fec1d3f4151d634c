#include <catch2/catch_amalgamated.hpp>

#include "bozk/spectral.hpp"
#include "helpers.hpp"

using namespace bozk;
using bozk::test::gaussian;
using bozk::test::max_abs_diff;
using bozk::test::random_field;
using bozk::test::smooth_random_field;

namespace {
const Grid2D g64(64, 64, 8.0, 8.0);

Field mode_cos_x(const Grid2D& g, int j) {
  Field f(g);
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) f.at(ix, iy) = std::cos(g.kx(j) * g.x(ix));
  return f;
}
Field mode_sin_x(const Grid2D& g, int j) {
  Field f(g);
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) f.at(ix, iy) = std::sin(g.kx(j) * g.x(ix));
  return f;
}
}  // namespace

TEST_CASE("grid validation") {
  CHECK_THROWS_AS(Grid2D(6, 64, 1.0, 1.0), contract_error);
  CHECK_THROWS_AS(Grid2D(63, 64, 1.0, 1.0), contract_error);
  CHECK_THROWS_AS(Grid2D(64, 64, 0.0, 1.0), contract_error);
  Grid2D g(16, 16, 2.0, 3.0);
  CHECK(g.kx(0) == 0.0);
  CHECK(g.kx(1) == Catch::Approx(std::numbers::pi / 2.0));
  CHECK(g.kx(15) == -g.kx(1));  // antisymmetric under index negation
  CHECK(g.x(8) == 0.0);
}

TEST_CASE("transform round trip and Parseval") {
  Field f = random_field(g64, 1);
  Field back = to_field(to_spectrum(f));
  CHECK(max_abs_diff(f, back) <= 1e-12 * f.max_abs());

  // constant field: only the (0,0) coefficient survives
  Field one(g64);
  for (double& x : one.v) x = 1.0;
  Spectrum s = to_spectrum(one);
  CHECK(s.at(0, 0).real() == Catch::Approx(double(g64.size())));
  double off = 0.0;
  for (int jx = 0; jx < g64.nx; ++jx)
    for (int jy = 0; jy < g64.ny; ++jy)
      if (jx || jy) off = std::max(off, std::abs(s.at(jx, jy)));
  CHECK(off <= 1e-12 * double(g64.size()));

  // Parseval on a pure mode and on noise
  for (Field u : {mode_cos_x(g64, 1), random_field(g64, 2)}) {
    double phys = l2_sq(u);
    Spectrum su = to_spectrum(u);
    double spec = spectral_quadratic(su, [](int, int) { return 1.0; });
    CHECK(std::abs(phys - spec) <= 1e-12 * std::abs(phys));
  }
}

TEST_CASE("Hilbert transform eigenfunctions") {
  double k = g64.kx(1);
  Field c1 = mode_cos_x(g64, 1), s1 = mode_sin_x(g64, 1);
  CHECK(max_abs_diff(hilbert_x(c1), s1) <= 1e-12);
  Field minus_c1 = c1;
  for (double& x : minus_c1.v) x = -x;
  CHECK(max_abs_diff(hilbert_x(s1), minus_c1) <= 1e-12);
  (void)k;

  Field one(g64);
  for (double& x : one.v) x = 1.0;
  CHECK(hilbert_x(one).max_abs() <= 1e-12);
}

TEST_CASE("H o H = -(identity - x-mean)") {
  for (std::uint64_t seed : {3u, 4u, 5u, 6u, 7u, 8u, 9u, 10u, 11u, 12u}) {
    Field f = random_field(g64, seed);
    Field hh = hilbert_x(hilbert_x(f));
    // x-mean per y line
    Field expect = f;
    for (int iy = 0; iy < g64.ny; ++iy) {
      double m = 0.0;
      for (int ix = 0; ix < g64.nx; ++ix) m += f.at(ix, iy);
      m /= g64.nx;
      for (int ix = 0; ix < g64.nx; ++ix) expect.at(ix, iy) = -(f.at(ix, iy) - m);
    }
    CHECK(max_abs_diff(hh, expect) <= 1e-12 * f.max_abs());
  }
}

TEST_CASE("half derivative") {
  double k = g64.kx(1);
  Field c1 = mode_cos_x(g64, 1);
  Field want = c1;
  for (double& x : want.v) x *= std::sqrt(k);
  CHECK(max_abs_diff(dx_half(c1), want) <= 1e-12);

  Field one(g64);
  for (double& x : one.v) x = 1.0;
  CHECK(dx_half(one).max_abs() <= 1e-13);

  Field f = smooth_random_field(g64, 13);
  Field twice = dx_half(dx_half(f));
  Field dxf = deriv(f, Axis::x, 1);
  // |k|^(1/2) twice = |k|; norms agree even though phases differ
  CHECK(l2_norm(twice) == Catch::Approx(l2_norm(dxf)).epsilon(1e-12));
}

TEST_CASE("spectral derivatives") {
  Field sy(g64);
  double l = g64.ky(2);
  for (int ix = 0; ix < g64.nx; ++ix)
    for (int iy = 0; iy < g64.ny; ++iy) sy.at(ix, iy) = std::sin(l * g64.y(iy));
  Field dy = deriv(sy, Axis::y, 1);
  Field want(g64);
  for (int ix = 0; ix < g64.nx; ++ix)
    for (int iy = 0; iy < g64.ny; ++iy)
      want.at(ix, iy) = l * std::cos(l * g64.y(iy));
  CHECK(max_abs_diff(dy, want) <= 1e-12 * l);

  double k = g64.kx(1);
  Field c1 = mode_cos_x(g64, 1);
  Field d2 = deriv(c1, Axis::x, 2);
  Field want2 = c1;
  for (double& x : want2.v) x *= -k * k;
  CHECK(max_abs_diff(d2, want2) <= 1e-12);

  Field one(g64);
  for (double& x : one.v) x = 1.0;
  CHECK(deriv(one, Axis::x, 3).max_abs() <= 1e-12);
  CHECK(deriv(one, Axis::y, 4).max_abs() <= 1e-12);
  CHECK_THROWS_AS(deriv(one, Axis::x, 5), contract_error);
  CHECK_THROWS_AS(deriv(one, Axis::x, 0), contract_error);
}

TEST_CASE("integration") {
  Field one(g64);
  for (double& x : one.v) x = 1.0;
  CHECK(integrate(one) == Catch::Approx(g64.area()).epsilon(1e-13));

  CHECK(std::abs(integrate(mode_cos_x(g64, 1))) <= 1e-12 * g64.area());

  // Gaussian integral oracle: int exp(-(x^2+y^2)) = pi
  Grid2D g(256, 256, 8.0, 8.0);
  CHECK(std::abs(integrate(gaussian(g)) - std::numbers::pi) <= 1e-10);
}

TEST_CASE("multipliers commute on band-limited fields") {
  Field f = smooth_random_field(g64, 20);
  auto H = [](const Field& u) { return hilbert_x(u); };
  auto Dh = [](const Field& u) { return dx_half(u); };
  auto Dx = [](const Field& u) { return deriv(u, Axis::x, 1); };
  auto Dy = [](const Field& u) { return deriv(u, Axis::y, 2); };
  std::vector<std::function<Field(const Field&)>> ops = {H, Dh, Dx, Dy};
  double scale = f.max_abs();
  for (auto& a : ops)
    for (auto& b : ops) {
      Field ab = a(b(f)), ba = b(a(f));
      CHECK(max_abs_diff(ab, ba) <= 1e-11 * scale * 20.0);
    }
}

TEST_CASE("inner product is a symmetric positive form; |Dx| pairing") {
  Field f = random_field(g64, 30), h = random_field(g64, 31);
  CHECK(inner(f, h) == inner(h, f));
  CHECK(inner(f, f) >= 0.0);
  for (std::uint64_t seed : {32u, 33u, 34u}) {
    Field u = random_field(g64, seed);
    double pair = inner(u, hilbert_x(deriv(u, Axis::x, 1)));
    CHECK(pair >= -1e-12 * l2_sq(u));
    // equals the dx_half quadratic form
    CHECK(pair == Catch::Approx(dxhalf_l2_sq(to_spectrum(u))).epsilon(1e-11));
  }
}

TEST_CASE("shifts and reflections") {
  Field f = smooth_random_field(g64, 40);
  CHECK(max_abs_diff(circshift(f, 5, -3), fourier_shift(f, 5 * g64.dx(), -3 * g64.dy())) <=
        1e-10 * f.max_abs());
  CHECK(max_abs_diff(reflect_x(reflect_x(f)), f) == 0.0);
  CHECK(max_abs_diff(reflect_y(reflect_y(f)), f) == 0.0);
}
