#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "sfl/errors.hpp"
#include "sfl/ode.hpp"

using namespace sfl;
using Catch::Approx;

namespace {

Nonlinearity power(double c, double gamma, std::vector<double> smooth = {}) {
  return Nonlinearity::power(PowerModel::symmetric(c, gamma, std::move(smooth)));
}

double max_error(const GridFn& v, auto&& exact) {
  double e = 0.0;
  for (int j = 0; j <= v.grid().cells(); ++j) e = std::max(e, std::abs(v[j] - exact(v.grid().node(j))));
  return e;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::InvalidArgument;
}

// smooth random function: a few sine modes plus an offset
GridFn random_smooth(const Grid& g, std::mt19937& rng, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  const double c0 = u(rng), c1 = u(rng), c2 = u(rng), c3 = u(rng);
  return GridFn::sample(g, [=](double x) {
    return c0 + c1 * std::sin(std::numbers::pi * x) + c2 * std::cos(3 * x) + c3 * std::sin(7 * x * x);
  });
}

}  // namespace

TEST_CASE("solve_ivp closed forms") {
  SECTION("constant phi") {
    Grid g(1.0, 256);
    auto s = solve_ivp(GridFn::constant(g, 1), GridFn::constant(g, 0), Nonlinearity::constant(1), g);
    CHECK(max_error(s.v, [](double x) { return x; }) <= 1e-12);
    CHECK(s.v[0] == 0.0);
    auto s2 = solve_ivp(GridFn::constant(g, 2), GridFn::constant(g, 3), Nonlinearity::constant(1), g);
    CHECK(max_error(s2.v, [](double x) { return 2 * x; }) <= 1e-12);
    CHECK(s2.phi_l2_estimate == Approx(1.0).epsilon(1e-10));
  }
  SECTION("separable singular oracle") {
    // (3/4) v^{4/3} = x
    Grid g(1.0, 4096);
    auto s = solve_ivp(GridFn::constant(g, 1), GridFn::constant(g, 0), power(1, 1.0 / 3), g);
    CHECK(max_error(s.v, [](double x) { return std::pow(4 * x / 3, 0.75); }) <= 1e-4);
    CHECK(s.positivity_certificate);
    CHECK(s.v.zero_left);
    REQUIRE(s.ladder_trace.size() == 7);
    CHECK(s.ladder_trace.back().second <= 1e-9);
  }
  SECTION("square-root singularity with a nonconstant coefficient") {
    // a = 1 + x: (2/3) v^{3/2} = log(1 + x)
    Grid g(1.0, 2048);
    auto a = GridFn::sample(g, [](double x) { return 1 + x; });
    auto s = solve_ivp(a, GridFn::constant(g, 0), power(1, 0.5), g);
    CHECK(max_error(s.v, [](double x) { return std::pow(1.5 * std::log1p(x), 2.0 / 3); }) <= 1e-4);
  }
}

TEST_CASE("solve_ivp errors") {
  Grid g(1.0, 64);
  auto one = GridFn::constant(g, 1);
  auto zero = GridFn::constant(g, 0);
  CHECK(code_of([&] { solve_ivp(GridFn::constant(g, -1), zero, power(1, 0.5), g); }) ==
        Errc::CoercivityViolation);
  CHECK(code_of([&] { solve_ivp(GridFn::constant(g, 0.5), zero, power(1, 0.5), g, 8, 1.0); }) ==
        Errc::CoercivityViolation);
  CHECK(code_of([&] { solve_ivp(one, zero, power(1, 0.5), Grid(2.0, 64)); }) == Errc::DomainMismatch);
  // v' = 1 + v^3 blows up before x = 2
  Grid g2(2.0, 128);
  auto blow = Nonlinearity::power(PowerModel{0.0, 1, 1, {1, 0, 0, 1}});
  CHECK(code_of([&] { solve_ivp(GridFn::constant(g2, 1), GridFn::constant(g2, 0), blow, g2); }) ==
        Errc::NoConvergence);
}

TEST_CASE("pure_zeta_solve") {
  Grid g(1.0, 128);
  ZetaTransform two(Nonlinearity::constant(2.0), 0.0, 0.0, 10.0);
  auto w = pure_zeta_solve(1.0, two, g);
  CHECK(max_error(w, [](double x) { return 2 * x; }) <= 1e-10);
  CHECK(w[64] == Approx(1.0).epsilon(1e-10));

  auto z = plus_shift_and_zeta(power(1, 0.5), 4.0);
  const double K = z.zeta(1.0);
  CHECK(K == Approx(2 * std::log(2.0) - 1).epsilon(1e-10));
  auto w2 = pure_zeta_solve(K, z, g);
  CHECK(std::abs(w2[g.cells()] - 1.0) <= 1e-6);
  // discrete residual: cell slope against K times the mean of phi_plus over the cell values
  for (int j = 0; j < g.cells(); ++j) {
    const double mean_inv = (z.zeta(w2[j + 1]) - z.zeta(w2[j])) / (w2[j + 1] - w2[j]);
    CHECK(w2.slope(j) * mean_inv == Approx(K).epsilon(1e-7));
  }
  CHECK(code_of([&] { pure_zeta_solve(1e3, z, g); }) == Errc::RangeExceeded);
}

TEST_CASE("apriori_bound_C_R") {
  Grid g(1.0, 64);
  CHECK(apriori_bound_C_R(power(1, 1.0 / 3), GridFn::constant(g, 0), 1, 1, 1) ==
        Approx(2 * (1 + std::sqrt(3.0))).epsilon(1e-12));
  CHECK(apriori_bound_C_R(Nonlinearity::constant(0), GridFn::constant(g, 0), 1, 1, 0.7) == 0.0);
  CHECK(apriori_bound_C_R(Nonlinearity::constant(0), GridFn::constant(g, 2), 1, 1, 2) == Approx(4.0));
  CHECK(code_of([&] { apriori_bound_C_R(power(1, 1.0), GridFn::constant(g, 0), 1, 1, 1); }) ==
        Errc::NonIntegrableSingularity);
}

TEST_CASE("solve_ivp properties") {
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> gam(0.1, 0.8);
  Grid g(1.0, 512);

  SECTION("a priori bound, positivity and chain rule") {
    for (int t = 0; t < 12; ++t) {
      const double gamma = 0.5 * gam(rng);
      auto phi = power(1, gamma);
      auto a = GridFn::sample(g, [&, s = gam(rng)](double x) { return 1 + s * std::sin(5 * x); });
      auto h = random_smooth(g, rng, 1.0);
      auto s = solve_ivp(a, h, phi, g);
      double amin = 1e300;
      for (double x : a.cell_values()) amin = std::min(amin, x);
      for (double R : {0.5, 1.0, 2.0}) {
        const double CR = apriori_bound_C_R(phi, h, amin, 1.0, R);
        CHECK(h1_norm(s.v) <= CR * (1 + 1e-6));
      }
      CHECK(s.positivity_certificate);
      CHECK(std::isfinite(s.phi_l2_estimate));
      double lhs = 0.0;
      for (int j = 0; j < g.cells(); ++j) lhs += s.phi_of_v.cell(j) * (s.v[j + 1] - s.v[j]);
      const double rhs = antiderivative_psi(phi, s.v[g.cells()]);
      CHECK(std::abs(lhs - rhs) <= 0.1 * std::abs(rhs) + 1e-6);
    }
  }
  SECTION("comparison") {
    for (int t = 0; t < 10; ++t) {
      auto phi = power(1, gam(rng), {0.0, -0.5});
      auto a = GridFn::constant(g, 1.5);
      auto h1 = random_smooth(g, rng, 2.0);
      auto bump = random_smooth(g, rng, 1.0);
      std::vector<double> h2(g.cells() + 1);
      for (int j = 0; j <= g.cells(); ++j) h2[j] = h1[j] + std::abs(bump[j]);
      auto v1 = solve_ivp(a, h1, phi, g).v;
      auto v2 = solve_ivp(a, GridFn(g, h2), phi, g).v;
      for (int j = 0; j <= g.cells(); ++j) CHECK(v1[j] <= v2[j] + 1e-6);
    }
  }
  SECTION("chain rule gap shrinks with the grid") {
    // the first cell contributes O(dx^{(1-gamma)/(1+gamma)})
    auto phi = power(1, 0.5);
    double prev = 0.0;
    for (int N : {256, 1024, 4096}) {
      Grid gn(1.0, N);
      auto s = solve_ivp(GridFn::constant(gn, 1), GridFn::sample(gn, [](double x) { return std::sin(3 * x); }), phi, gn);
      double lhs = 0.0;
      for (int j = 0; j < N; ++j) lhs += s.phi_of_v.cell(j) * (s.v[j + 1] - s.v[j]);
      const double gap = std::abs(lhs - antiderivative_psi(phi, s.v[N]));
      if (prev > 0) CHECK(prev / gap >= 1.3);
      prev = gap;
    }
  }
  SECTION("depth independence") {
    auto phi = power(1, 0.4);
    auto h = random_smooth(g, rng, 1.0);
    auto s4 = solve_ivp(GridFn::constant(g, 1), h, phi, g, 4);
    auto s8 = solve_ivp(GridFn::constant(g, 1), h, phi, g, 8);
    CHECK(sup_distance(s4.v, s8.v) <= 1e-6);
  }
  SECTION("forbidden cone at the origin") {
    // v = (15 x)^{2/3} leaves every cone k x
    Grid fine(1.0, 16384);
    auto s = solve_ivp(GridFn::constant(fine, 1), GridFn::constant(fine, -1), power(10, 0.5), fine);
    for (double k : {1.0, 10.0, 100.0}) CHECK(s.v[1] >= k * fine.node(1));
  }
}
