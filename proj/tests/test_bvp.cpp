#include <catch_amalgamated.hpp>

#include <cmath>

#include "sfl/bvp.hpp"
#include "sfl/construct.hpp"
#include "sfl/errors.hpp"

using namespace sfl;
using Catch::Approx;

namespace {

Nonlinearity power(double c, double gamma) { return Nonlinearity::power(PowerModel::symmetric(c, gamma)); }

struct Pair {
  Grid grid;
  GridFn a, u0, g;
};

// u0 = x(1 - x) with the datum that makes it a weak solution for c = 0
Pair constructed(int N, const Nonlinearity& phi) {
  Grid g(1.0, N);
  auto a = GridFn::constant(g, 1);
  auto u0 = power_seam_solution(SeamSpec::bump(1, 1, 1, 1.0 / 3), g);
  return {g, a, u0, derive_datum(a, u0, phi, 0.0)};
}

void check_solution_invariants(const BvpSolution& s, const GridFn& a, const GridFn& g, const Nonlinearity& phi) {
  CHECK(s.report.apriori_ratio_h1 <= 1 + 1e-6);
  CHECK(s.report.apriori_ratio_sup <= 1 + 1e-6);
  CHECK(s.report.energy_gap <= s.report.tol);
  CHECK(s.u[0] == 0.0);
  CHECK(std::abs(s.u[s.u.grid().cells()]) <= 1e-8);
  // the solution is U(c) for its own c
  IvpOptions o;
  o.scheme = IvpScheme::FiniteVolume;
  auto again = v_of_c(a, g, phi, s.report.recovered_c, s.u.grid(), o);
  CHECK(sup_distance(again.v, s.u) <= 1e-6);
}

}  // namespace

TEST_CASE("v_of_c") {
  Grid g(1.0, 2048);
  auto one = GridFn::constant(g, 1);
  SECTION("data cancelled by c") {
    auto s = v_of_c(one, GridFn::constant(g, -2.5), power(1, 1.0 / 3), 2.5, g);
    CHECK(s.v[g.cells()] == Approx(std::pow(4.0 / 3, 0.75)).margin(1e-4));
  }
  SECTION("constant phi") {
    auto s = v_of_c(one, GridFn::constant(g, 0), Nonlinearity::constant(1), 1.0, g);
    CHECK(s.v[g.cells()] == Approx(2.0).margin(1e-12));
    CHECK(s.v[512] == Approx(0.5).margin(1e-12));
  }
  SECTION("endpoint is monotone in c") {
    Grid gs(1.0, 256);
    auto gd = GridFn::sample(gs, [](double x) { return 3 - 8 * x; });
    auto phi = truncate_at(power(1, 1.0 / 3), 20);
    double prev = -INFINITY;
    for (double c = -30; c <= 10; c += 2.5) {
      const double e = v_of_c(GridFn::constant(gs, 1), gd, phi, c, gs).v[gs.cells()];
      CHECK(e >= prev - 1e-9);
      prev = e;
    }
  }
}

TEST_CASE("solve_regularized_bvp linear cases") {
  Grid g(1.0, 512);
  auto one = GridFn::constant(g, 1);
  auto gd = GridFn::sample(g, [](double x) { return 1 - 2 * x; });
  auto exact = [](double x) { return x * (1 - x); };

  auto run = solve_regularized_bvp(one, gd, Nonlinearity::constant(0), g);
  REQUIRE(run.solutions.size() == 1);
  const auto& s = run.solutions.front();
  CHECK(s.c == Approx(0.0).margin(1e-9));
  double e = 0;
  for (int j = 0; j <= g.cells(); ++j) e = std::max(e, std::abs(s.u[j] - exact(g.node(j))));
  CHECK(e <= 1e-9);
  CHECK(s.report.energy_gap <= 1e-10);
  CHECK(s.cross_check_distance >= 0);
  CHECK(s.cross_check_distance <= 10 * g.dx());
  check_solution_invariants(s, one, gd, Nonlinearity::constant(0));

  SECTION("constant phi only shifts c") {
    auto shifted = solve_regularized_bvp(one, gd, Nonlinearity::constant(3.5), g);
    REQUIRE(shifted.solutions.size() == 1);
    CHECK(shifted.solutions[0].c == Approx(-3.5).margin(1e-8));
    CHECK(sup_distance(shifted.solutions[0].u, s.u) <= 1e-8);
  }
}

TEST_CASE("solve_regularized_bvp with truncated singular phi") {
  Grid g(1.0, 256);
  auto phi = power(1, 1.0 / 3);
  auto a = GridFn::sample(g, [](double x) { return 1 + 0.5 * x; });
  auto gd = GridFn::sample(g, [](double x) { return 2 - 6 * x; });
  auto phi_n = truncate_at(phi, 10);
  auto run = solve_regularized_bvp(a, gd, phi_n, g);
  REQUIRE_FALSE(run.solutions.empty());
  for (const auto& s : run.solutions) check_solution_invariants(s, a, gd, phi_n);
  CHECK(run.bracket > 0);
  CHECK(run.scan.size() >= 64);
}

TEST_CASE("stability run converges to the constructed solution") {
  auto phi = power(1, 1.0 / 3);
  auto p = constructed(1024, phi);
  std::vector<double> hints;
  std::vector<LimitSample> trail;
  double dist = INFINITY;
  for (double n : {10.0, 100.0, 1000.0}) {
    auto phi_n = truncate_at(phi, n);
    auto gn = stability_datum(p.g, phi, phi_n, p.u0);
    BvpOptions o;
    o.c_hints = hints;
    o.cross_check = false;
    auto run = solve_regularized_bvp(p.a, gn, phi_n, p.grid, o);
    REQUIRE_FALSE(run.solutions.empty());
    const BvpSolution* best = &run.solutions.front();
    for (const auto& s : run.solutions)
      if (sup_distance(s.u, p.u0) < sup_distance(best->u, p.u0)) best = &s;
    dist = sup_distance(best->u, p.u0);
    hints = {best->c};
    trail.push_back(limit_sample(n, best->u, best->c, phi_n));
  }
  CHECK(dist <= 1e-2);
  CHECK(std::abs(hints.front()) <= 1e-2);
  CHECK(classify_limit(trail).kind == LimitKind::WeakLimit);
}

TEST_CASE("find_c_star on the constructed pair") {
  auto phi = power(1, 1.0 / 3);
  std::vector<double> found;
  for (int N : {1024, 4096}) {
    auto p = constructed(N, phi);
    const double ub = c_star_upper_bound(p.a, p.g, phi);
    auto r = find_c_star(p.a, p.g, phi, p.grid, {-2.0, ub});
    REQUIRE(r.c_star);
    CHECK(r.hi - r.lo <= 1e-3);
    CHECK(*r.c_star >= 0.0);
    CHECK(*r.c_star <= r.upper_bound + r.tau);
    found.push_back(*r.c_star);
    if (N == 4096) {
      CHECK(std::abs(found[0] - found[1]) <= 10 * r.tau);

      const double cs = *r.c_star;
      auto rec = sweep_family(p.a, p.g, phi, p.grid, {cs - 4, cs - 2, cs - 1, cs}, cs);
      CHECK(rec.ordering_verdict);
      CHECK(rec.trend_verdict);
      CHECK(rec.samples.size() == 4);
      CHECK(rec.continuity_moduli.size() == 3);
      for (const auto& s : rec.samples) CHECK(s.endpoint <= r.tau);

      auto single = sweep_family(p.a, p.g, phi, p.grid, {0.0}, cs);
      CHECK(sup_distance(single.samples[0].u, p.u0) <= 1e-2);
    }
  }
}

TEST_CASE("sweep_family far below c*") {
  auto phi = power(1, 1.0 / 3);
  auto p = constructed(512, phi);
  auto rec = sweep_family(p.a, p.g, phi, p.grid, {-20, -10, -5, -2, 0});
  CHECK(rec.trend_verdict);
  CHECK(rec.vanishing_limit_trend.front().second < 0.2 * rec.vanishing_limit_trend.back().second);
  CHECK_THROWS_AS(sweep_family(p.a, p.g, phi, p.grid, {0, -1}), Error);
}

TEST_CASE("find_c_star without solutions") {
  Grid g(1.0, 512);
  auto one = GridFn::constant(g, 1);
  auto phi = power(1, 1.0 / 3);
  REQUIRE(nonexistence_flags(one, phi).bounded_below);
  auto r = find_c_star(one, one, phi, g, {-10.0, 10.0});
  CHECK_FALSE(r.c_star);
  CHECK(r.note.find("NoSolution") == 0);
  CHECK_THROWS_AS(find_c_star(one, one, phi, g, {1.0, 1.0}), Error);
}

TEST_CASE("classify_limit") {
  SECTION("constant datum along the truncation ladder") {
    Grid g(1.0, 128);
    auto one = GridFn::constant(g, 1);
    auto phi = power(1, 1.0 / 3);
    std::vector<LimitSample> run;
    BvpOptions o;
    o.cross_check = false;
    for (double n : {10.0, 100.0, 1000.0, 10000.0}) {
      auto phi_n = truncate_at(phi, n);
      auto r = solve_regularized_bvp(one, one, phi_n, g, o);
      REQUIRE_FALSE(r.solutions.empty());
      run.push_back(limit_sample(n, r.solutions.front().u, r.solutions.front().c, phi_n));
    }
    auto c = classify_limit(run);
    CHECK(c.kind == LimitKind::ZeroLimit);
    CHECK(c.c_unbounded);
    CHECK(c.min_phi_unbounded);
    CHECK(run.back().c == Approx(-10001).epsilon(1e-6));
  }
  SECTION("mixed trends are inconclusive") {
    std::vector<LimitSample> run = {{10, 1, 0, 1, 1}, {100, 2, -50, 1, 3}, {1000, 0.5, 10, 0, 9}};
    try {
      classify_limit(run);
      FAIL("expected Inconclusive");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::Inconclusive);
    }
  }
  SECTION("stable synthetic run") {
    std::vector<LimitSample> run = {{10, 0.25, 0.01, 1, 2.0}, {100, 0.25, 0.0, 1.2, 2.01}, {1000, 0.25, 0.0, 1.2, 2.01}};
    CHECK(classify_limit(run).kind == LimitKind::WeakLimit);
  }
}
