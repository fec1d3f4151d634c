#include <catch2/catch_amalgamated.hpp>

#include "bozk/functionals.hpp"
#include "bozk/solver.hpp"
#include "helpers.hpp"

using namespace bozk;
using bozk::test::gaussian;
using bozk::test::random_field;
using bozk::test::smooth_random_field;

namespace {
const Params p1{1.0, -1.0, 1, 1.0};
}

TEST_CASE("params validation and rational exponents") {
  CHECK_THROWS_AS(Params({0.0, -1.0, 1, 1.0}).validate(), contract_error);
  CHECK_THROWS_AS(Params({1.0, 0.0, 1, 1.0}).validate(), contract_error);
  CHECK_THROWS_AS(Params({1.0, -1.0, 2, 1.0}).validate(), contract_error);
  CHECK_THROWS_AS(Params({1.0, -1.0, 1, 0.0}).validate(), contract_error);

  auto r = require_rational_exponent(2.0);
  CHECK(r.k == 2);
  CHECK(r.m == 1);
  r = require_rational_exponent(1.0 / 3.0);
  CHECK(r.k == 1);
  CHECK(r.m == 3);
  r = require_rational_exponent(4.0 / 5.0);
  CHECK(r.k == 4);
  CHECK(r.m == 5);
  CHECK_FALSE(rational_exponent(0.5).has_value());  // 1/2: even denominator

  // odd-root semantics
  CHECK(signed_pow(-8.0, 1, 3) == Catch::Approx(-2.0));
  CHECK(signed_pow(-2.0, 2, 1) == Catch::Approx(4.0));
  CHECK(signed_pow(-2.0, 3, 1) == Catch::Approx(-8.0));
}

TEST_CASE("mass") {
  Grid2D g(64, 64, 8.0, 8.0);
  Field zero(g);
  CHECK(mass(zero) == 0.0);

  Field s(g);
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) s.at(ix, iy) = std::sin(g.kx(1) * g.x(ix));
  CHECK(mass(s) == Catch::Approx(g.area() / 4.0).epsilon(1e-12));

  Grid2D gbig(256, 256, 8.0, 8.0);
  CHECK(std::abs(mass(gaussian(gbig)) - std::numbers::pi / 4.0) <= 1e-10);
}

TEST_CASE("energy") {
  Grid2D g(64, 64, 8.0, 8.0);
  Field zero(g);
  CHECK(energy(zero, p1) == 0.0);

  // u = sin(kx): E = k * area / 4 for p=1, alpha=-1, eps=1
  Field s(g);
  double k = g.kx(1);
  for (int ix = 0; ix < g.nx; ++ix)
    for (int iy = 0; iy < g.ny; ++iy) s.at(ix, iy) = std::sin(k * g.x(ix));
  CHECK(energy(s, p1) == Catch::Approx(k * g.area() / 4.0).epsilon(1e-12));

  // Gaussian against a double-resolution quadrature oracle
  Grid2D ga(128, 128, 8.0, 8.0), gb(256, 256, 8.0, 8.0);
  double ea = energy(gaussian(ga), p1), eb = energy(gaussian(gb), p1);
  CHECK(std::abs(ea - eb) <= 1e-8 * std::abs(eb));
}

TEST_CASE("zk_functionals") {
  Grid2D g(64, 64, 8.0, 8.0);
  Field zero(g);
  FunctionalReport r0 = zk_functionals(zero, p1);
  CHECK(r0.mass == 0.0);
  CHECK(r0.energy == 0.0);
  CHECK(r0.I == 0.0);
  CHECK(r0.J == 0.0);
  CHECK(r0.K_func == 0.0);
  CHECK(r0.znorm == 0.0);

  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Field f = random_field(g, seed);
    FunctionalReport r = zk_functionals(f, p1);
    // I = znorm^2 / 2 on the alpha=-1, c=1 branch
    CHECK(r.I == Catch::Approx(0.5 * r.znorm * r.znorm).epsilon(1e-12));
    // action = energy + c mass
    CHECK(r.action == Catch::Approx(r.energy + p1.c * r.mass).epsilon(1e-14));
    // J homogeneity: J(2 f) = 2^(p+2) J(f)
    Field f2 = f;
    for (double& x : f2.v) x *= 2.0;
    CHECK(j_functional(f2, p1) == Catch::Approx(8.0 * r.J).epsilon(1e-12));
  }

  // regime gate
  Params bad{1.0, +1.0, 1, 1.0};
  Field f = random_field(g, 9);
  CHECK_THROWS_AS(zk_functionals(f, bad), regime_error);
  CHECK_NOTHROW(zk_functionals(f, bad, /*override=*/true));
}

TEST_CASE("znorm decomposition and symmetry invariance") {
  Grid2D g(64, 64, 8.0, 8.0);
  Field f = random_field(g, 11);
  // znorm^2 = 2 mass + |d_y f|^2 + |Dx^(1/2) f|^2, via the physical route
  double dy2 = l2_sq(deriv(f, Axis::y, 1));
  double dxh = l2_sq(dx_half(f));
  CHECK(znorm_sq(f) == Catch::Approx(2.0 * mass(f) + dy2 + dxh).epsilon(1e-12));

  FunctionalReport a = zk_functionals(f, p1);
  for (Field m : {reflect_x(f), reflect_y(f)}) {
    FunctionalReport b = zk_functionals(m, p1);
    CHECK(b.I == Catch::Approx(a.I).epsilon(1e-12));
    CHECK(b.J == Catch::Approx(a.J).epsilon(1e-12));
    CHECK(b.K_func == Catch::Approx(a.K_func).epsilon(1e-12));
    CHECK(b.znorm == Catch::Approx(a.znorm).epsilon(1e-12));
    CHECK(b.action == Catch::Approx(a.action).epsilon(1e-12));
  }
  // translation invariance of the conserved pair
  Field sh = circshift(f, 7, -5);
  CHECK(mass(sh) == Catch::Approx(mass(f)).epsilon(1e-12));
  CHECK(energy(sh, p1) == Catch::Approx(energy(f, p1)).epsilon(1e-12));
}

TEST_CASE("K changes sign along the scaling ray") {
  Grid2D g(64, 64, 8.0, 8.0);
  Field f = gaussian(g, 2.0, 1.0);
  REQUIRE(j_functional(f, p1) > 0.0);
  auto K_of = [&](double tau) {
    Field t = f;
    for (double& x : t.v) x *= tau;
    return zk_functionals(t, p1).K_func;
  };
  CHECK(K_of(1e-3) > 0.0);
  CHECK(K_of(1e3) < 0.0);
}

TEST_CASE("pohojaev residuals on non-solutions") {
  Grid2D g(128, 128, 8.0, 8.0);
  Field gauss = gaussian(g);
  auto r = pohojaev_residuals(gauss, p1);
  double worst = *std::max_element(r.begin(), r.end());
  CHECK(worst >= 0.05);  // a Gaussian is not a solitary wave

  Field zero(g);
  CHECK_THROWS_AS(pohojaev_residuals(zero, p1), contract_error);
}

TEST_CASE("pohojaev residuals detect scale errors on a converged wave") {
  Grid2D g(128, 128, 8 * std::numbers::pi, 8 * std::numbers::pi);
  SolveOptions opts;
  opts.tol = 1e-8;
  SolitaryWave w = petviashvili_solve(p1, g, opts);
  REQUIRE(w.converged);
  Field twice = w.profile;
  for (double& x : twice.v) x *= 2.0;
  auto r = pohojaev_residuals(twice, p1);
  CHECK(r[1] >= 0.1);  // quadratic vs (p+2)-power homogeneity mismatch
}

TEST_CASE("mass ratio check") {
  Grid2D g(64, 64, 8.0, 8.0);
  Field gauss = gaussian(g);
  CHECK(mass_ratio_check(gauss, p1) >= 0.05);
  Params p4{4.0, -1.0, 1, 1.0};
  CHECK_THROWS_AS(mass_ratio_check(gauss, p4), regime_error);
}

TEST_CASE("d(c) curve plumbing") {
  Grid2D g(64, 64, 8.0, 8.0);
  Field gauss = gaussian(g);
  auto fake_solve = [&](const Params& q) {
    Field f = gauss;
    for (double& x : f.v) x *= q.c;  // scale stand-in, not a real wave
    return f;
  };
  auto curve = d_of_c_curve(p1, {0.5, 1.0}, fake_solve);
  REQUIRE(curve.size() == 2);
  for (auto [c, d] : curve) {
    Params q = p1;
    q.c = c;
    Field f = fake_solve(q);
    CHECK(d == Catch::Approx(energy(f, q) + c * mass(f)));
  }
  CHECK_THROWS_AS(d_of_c_curve(p1, {-1.0}, fake_solve), contract_error);

  auto throwing = [](const Params&) -> Field {
    throw numeric_error("no convergence");
  };
  try {
    d_of_c_curve(p1, {0.75}, throwing);
    FAIL("expected failure");
  } catch (const numeric_error& e) {
    CHECK(std::string(e.what()).find("c = 0.75") != std::string::npos);
  }
}

TEST_CASE("functional report serializes flat") {
  Grid2D g(64, 64, 8.0, 8.0);
  FunctionalReport r = zk_functionals(gaussian(g), p1);
  nlohmann::json j = to_json(r);
  for (const char* key : {"mass", "energy", "action", "I", "J", "K", "znorm", "params"})
    CHECK(j.contains(key));
  CHECK(params_from_json(j["params"]).p == p1.p);
}
