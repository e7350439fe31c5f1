#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "sfl/errors.hpp"
#include "sfl/grid.hpp"

using namespace sfl;
using Catch::Approx;

namespace {
GridFn bump(const Grid& g) { return GridFn::sample(g, [](double x) { return x * (1 - x); }); }
}

TEST_CASE("grid nodes and spacing") {
  Grid g(2.0, 16);
  CHECK(g.dx() == 0.125);
  CHECK(g.node(16) == 2.0);
  for (int j = 0; j < 16; ++j) CHECK(g.node(j + 1) > g.node(j));
  CHECK_THROWS_AS(Grid(1.0, 4), Error);
  CHECK_THROWS_AS(Grid(0.0, 16), Error);
}

TEST_CASE("differentiate") {
  Grid g(1.0, 16);
  SECTION("affine is exact") {
    auto d = differentiate(GridFn::sample(g, [](double x) { return 3 * x; }));
    for (int j = 0; j < 16; ++j) CHECK(d.cell(j) == Approx(3.0).epsilon(1e-14));
  }
  SECTION("constant") {
    auto d = differentiate(GridFn::constant(g, 2.5));
    for (int j = 0; j < 16; ++j) CHECK(d.cell(j) == 0.0);
  }
  SECTION("symmetric bump has zero slope at the centre") {
    auto d = differentiate(bump(g));
    CHECK(std::abs(d[8]) <= 1e-12);
  }
}

TEST_CASE("integrate") {
  Grid g(1.0, 64);
  SECTION("linear") {
    CHECK(integrate(g, [](double x) { return 2 * x; }, false) == Approx(1.0).epsilon(1e-14));
  }
  SECTION("zero") { CHECK(integrate(g, [](double) { return 0.0; }, true) == 0.0); }
  SECTION("endpoint singularity, graded") {
    // oracle: x = t^3 turns the integrand into 3t, integrated by a fine trapezoid rule
    double oracle = 0.0;
    const int m = 1 << 12;
    for (int i = 0; i < m; ++i) {
      const double a = double(i) / m, b = double(i + 1) / m;
      oracle += 0.5 * (3 * a + 3 * b) * (b - a);
    }
    Grid fine(1.0, 4096);
    const double v = integrate(fine, [](double x) { return std::pow(x, -1.0 / 3); }, true);
    CHECK(std::abs(v - oracle) <= 1e-4);
  }
  SECTION("non-finite samples are rejected") {
    std::vector<double> mids(64, 1.0);
    mids[3] = std::nan("");
    CHECK_THROWS_AS(integrate(g, mids), Error);
  }
}

TEST_CASE("norms of the quadratic bump") {
  Grid g(1.0, 1024);
  const Norms n = norms(bump(g));
  CHECK(n.h1_semi == Approx(1 / std::sqrt(3.0)).margin(1e-3));
  CHECK(n.sup == 0.25);
  CHECK(n.sup <= std::sqrt(g.length()) * n.h1_semi);
  // Hoelder-1/2 quotient of the bump is at most its H1 seminorm
  CHECK(n.holder_half <= n.h1_semi + 1e-12);
  CHECK(n.holder_half > 0.0);
}

TEST_CASE("resample") {
  Grid coarse(1.0, 16), fine(1.0, 32);
  SECTION("affine to doubled grid is exact") {
    auto u = GridFn::sample(coarse, [](double x) { return 2 * x - 1; });
    auto r = resample(u, fine);
    for (int j = 0; j <= 32; ++j) CHECK(r[j] == Approx(2 * fine.node(j) - 1).margin(1e-15));
  }
  SECTION("refine then coarsen is the identity") {
    auto u = bump(coarse);
    auto back = resample(resample(u, fine), coarse);
    for (int j = 0; j <= 16; ++j) CHECK(back[j] == u[j]);
  }
  SECTION("interpolation error bound") {
    Grid target(1.0, 4096);
    auto r = resample(bump(coarse), target);
    double err = 0.0;
    for (int j = 0; j <= 4096; ++j) {
      const double x = target.node(j);
      err = std::max(err, std::abs(r[j] - x * (1 - x)));
    }
    CHECK(err <= coarse.dx() * coarse.dx());
  }
  SECTION("length mismatch") { CHECK_THROWS_AS(resample(bump(coarse), Grid(2.0, 32)), Error); }
}

TEST_CASE("Poincare and Morrey hold on random profiles") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const double L = 0.25 + 3 * (U(rng) + 1);
    Grid g(L, 8 << (trial % 5));
    std::vector<double> v(g.cells() + 1);
    for (auto& x : v) x = U(rng);
    v.front() = 0.0;
    const bool both = trial % 2 == 0;
    if (both) v.back() = 0.0;
    const Norms n = norms(GridFn(g, v));
    if (both) CHECK(n.l2 <= L * n.h1_semi * (1 + 1e-12));
    CHECK(n.sup <= std::sqrt(L) * n.h1_semi * (1 + 1e-12));
  }
}

TEST_CASE("integrate is linear and monotone") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(0, 1);
  Grid g(1.5, 64);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> f(64), h(64), s(64);
    const double a = U(rng) * 4 - 2, b = U(rng) * 4 - 2;
    for (int j = 0; j < 64; ++j) {
      f[j] = U(rng);
      h[j] = f[j] + U(rng);
      s[j] = a * f[j] + b * h[j];
    }
    CHECK(integrate(g, s) == Approx(a * integrate(g, f) + b * integrate(g, h)).margin(1e-12));
    CHECK(integrate(g, h) >= integrate(g, f));
  }
}

TEST_CASE("differentiate after cumulative integration converges to first order") {
  auto f = [](double x) { return std::cos(3 * x) + x * x; };
  double prev = 0.0;
  for (int N : {64, 128, 256}) {
    Grid g(1.0, N);
    std::vector<double> cells(N);
    for (int j = 0; j < N; ++j) cells[j] = f(g.midpoint(j));
    auto d = differentiate(cumulative_integral(GridFn::from_cells(g, cells)));
    double err = 0.0;
    for (int j = 1; j < N; ++j) err = std::max(err, std::abs(d[j] - f(g.node(j))));
    if (prev > 0) CHECK(err <= 0.6 * prev);
    prev = err;
  }
}

TEST_CASE("profile csv") {
  Grid g(1.0, 8);
  std::ostringstream os;
  write_profile_csv(os, GridFn::sample(g, [](double x) { return x / 3; }));
  const std::string s = os.str();
  CHECK(s.rfind("x,value\n0,0\n0.125,0.041666666666666664\n", 0) == 0);
  CHECK(s.find('\r') == std::string::npos);
}
