#include <catch_amalgamated.hpp>

#include <cmath>

#include "sfl/construct.hpp"
#include "sfl/errors.hpp"
#include "sfl/verify.hpp"

using namespace sfl;
using Catch::Approx;

namespace {

Nonlinearity power(double c, double gamma) { return Nonlinearity::power(PowerModel::symmetric(c, gamma)); }

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::InvalidArgument;
}

double cell_l2_distance(const GridFn& x, const GridFn& y) {
  double s = 0;
  for (int j = 0; j < x.grid().cells(); ++j) s += (x.cell(j) - y.cell(j)) * (x.cell(j) - y.cell(j));
  return std::sqrt(s * x.grid().dx());
}

double tail_min(const GridFn& g) {
  const int N = g.grid().cells();
  double m = INFINITY;
  for (int j = N - N / 10; j < N; ++j) m = std::min(m, g.cell(j));
  return m;
}

}  // namespace

TEST_CASE("power_seam_solution") {
  Grid g(1.0, 1024);
  SECTION("single bump") {
    auto w = power_seam_solution(SeamSpec::bump(1.0, 1.0, 0.75, 1.0 / 3), g);
    double e = 0;
    for (int j = 0; j <= g.cells(); ++j) {
      const double x = g.node(j);
      e = std::max(e, std::abs(w[j] - std::pow(x * (1 - x), 0.75)));
    }
    CHECK(e <= 1e-14);
    CHECK(membership_U(power(1, 1.0 / 3), w).member);
  }
  SECTION("exponent window") {
    CHECK_NOTHROW(power_seam_solution(SeamSpec::bump(1.0, 1.0, 1.0, 1.0 / 3), g));
    CHECK(code_of([&] { power_seam_solution(SeamSpec::bump(1.0, 1.0, 1.0, 0.5), g); }) ==
          Errc::ExponentOutOfWindow);
    CHECK(code_of([&] { power_seam_solution(SeamSpec::bump(1.0, 1.0, 0.5, 1.0 / 3), g); }) ==
          Errc::ExponentOutOfWindow);
  }
  SECTION("interior zeros and sign changes") {
    SeamSpec s;
    s.zeros = {{0.0, 1, 0.75, 1, 0.75}, {0.25, 1, 0.8, -2, 0.9}, {0.625, -2, 0.7, 1.5, 0.75}, {1.0, 1, 0.75, 1, 0.75}};
    s.delta = 0.05;
    auto w = power_seam_solution(s, g);
    CHECK(w[0] == 0.0);
    CHECK(w[256] == 0.0);
    CHECK(w[640] == 0.0);
    CHECK(w[1024] == 0.0);
    CHECK(w[100] > 0);
    CHECK(w[400] < 0);
    CHECK(w[900] > 0);
    // connectors stay away from zero
    double inner = INFINITY;
    for (int j = 320; j < 576; ++j) inner = std::min(inner, std::abs(w[j]));
    CHECK(inner >= 0.5 * std::pow(0.05, 0.9));
    CHECK(membership_U(power(1, 1.0 / 3), w).member);

    auto clash = s;
    clash.zeros[2].K_left = 2;
    CHECK(code_of([&] { power_seam_solution(clash, g); }) == Errc::SignClash);
    auto wide = s;
    wide.delta = 0.2;
    CHECK(code_of([&] { power_seam_solution(wide, g); }) == Errc::InvalidArgument);
  }
}

TEST_CASE("derive_datum round trips") {
  Grid g(1.0, 4096);
  auto phi = power(1, 1.0 / 3);
  auto one = GridFn::constant(g, 1);
  auto u0 = GridFn::sample(g, [](double x) { return x * (1 - x); });

  SECTION("constant shift") {
    for (double c : {0.0, 2.0, -1.5}) {
      auto gd = derive_datum(one, u0, phi, c);
      CHECK(recover_constant_c(one, u0, gd, phi) == Approx(c).margin(1e-10));
      CHECK(weak_solution_report(one, u0, gd, phi, 1e-3).verdict);
    }
  }
  SECTION("seams with a variable coefficient") {
    auto a = GridFn::sample(g, [](double x) { return 1.5 + std::sin(4 * x); });
    SeamSpec s;
    s.zeros = {{0.0, 1, 0.75, 1, 0.75}, {0.5, 2, 0.9, -1, 0.8}, {1.0, -1, 0.75, 1, 0.75}};
    s.delta = 0.1;
    auto w = power_seam_solution(s, g);
    auto gd = derive_datum(a, w, phi, 0.7);
    auto r = weak_solution_report(a, w, gd, phi, 1e-3);
    CHECK(r.verdict);
    CHECK(r.recovered_c == Approx(0.7).margin(1e-9));
    // derived data are unbounded below at the interior zero (lambda = 3/4 at the ends balances a w')
    CHECK_FALSE(nonexistence_flags(gd, phi).bounded_below);
    CHECK(gd.cell(2047) < -5);
    CHECK(gd.cell(2048) < -5);
  }
  SECTION("non-member profile") {
    CHECK(code_of([&] { derive_datum(one, u0, power(1, 0.5), 0.0); }) == Errc::MembershipFailure);
  }
}

TEST_CASE("tail_fix") {
  auto phi = power(1, 1.0 / 3);
  SECTION("constant datum at 4096") {
    Grid g(1.0, 4096);
    auto one = GridFn::constant(g, 1);
    auto t = tail_fix(one, one, phi, 0.5, g);
    CHECK(t.delta == 0.5);
    CHECK(t.shrinks == 0);
    CHECK(t.splice_value > 0);
    CHECK(t.u_hat[g.cells()] == 0.0);
    const int splice = g.cells() - 2048;
    bool same = true;
    for (int j = 0; j < splice; ++j) same = same && t.g_hat[j] == 1.0 && t.g_hat.cell(j) == 1.0;
    CHECK(same);
    CHECK(t.u_hat[splice] == t.splice_value);
    auto r = weak_solution_report(one, t.u_hat, t.g_hat, phi, 1e-3);
    CHECK(r.verdict);
  }
  SECTION("tail minimum falls under refinement") {
    double prev = INFINITY;
    for (int N : {1024, 4096}) {
      Grid g(1.0, N);
      auto one = GridFn::constant(g, 1);
      const double m = tail_min(tail_fix(one, one, phi, 0.5, g).g_hat);
      CHECK(m < prev);
      prev = m;
    }
  }
  SECTION("negative splice value under the reflected convention") {
    Grid g(1.0, 1024);
    auto one = GridFn::constant(g, 1);
    auto reflected = power(-1, 1.0 / 3);
    auto t = tail_fix(one, one, reflected, 0.5, g);
    CHECK(t.splice_value < 0);
    bool negative = true;
    for (int j = 1; j < g.cells(); ++j) negative = negative && t.u_hat[j] < 0;
    CHECK(negative);
    CHECK(membership_U(reflected, t.u_hat).member);
    CHECK(weak_solution_report(one, t.u_hat, t.g_hat, reflected).verdict);
  }
  SECTION("splice radius snaps to the grid") {
    Grid g(1.0, 256);
    auto one = GridFn::constant(g, 1);
    auto t = tail_fix(one, one, phi, 0.3, g);
    CHECK(t.delta == Approx(77.0 / 256));
  }
}

TEST_CASE("stability_datum") {
  Grid g(1.0, 4096);
  auto phi = power(1, 1.0 / 3);
  auto one = GridFn::constant(g, 1);
  auto u0 = GridFn::sample(g, [](double x) { return x * (1 - x); });
  auto gd = derive_datum(one, u0, phi, 0.0);

  SECTION("truncation above the range of phi(u) is the identity") {
    auto lifted = GridFn::sample(g, [](double x) { return 1 + x * (1 - x); });
    auto gl = GridFn::sample(g, [](double x) { return std::cos(x); });
    auto gn = stability_datum(gl, phi, truncate_at(phi, 10), lifted);
    bool same = true;
    for (int j = 0; j < g.cells(); ++j) same = same && gn[j] == gl[j] && gn.cell(j) == gl.cell(j);
    CHECK(same);
  }
  SECTION("changes only where phi(u) exceeds the level") {
    auto gn = stability_datum(gd, phi, truncate_at(phi, 10), u0);
    bool outside = true;
    int changed = 0;
    for (int j = 0; j < g.cells(); ++j) {
      const bool low = std::min(u0[j], u0[j + 1]) < 1e-3;
      if (!low) outside = outside && gn.cell(j) == gd.cell(j);
      if (gn.cell(j) != gd.cell(j)) ++changed;
    }
    CHECK(outside);
    CHECK(changed > 0);
    CHECK(gn.cell(0) > gd.cell(0));
  }
  SECTION("distance to g falls along the ladder") {
    double prev = INFINITY;
    for (double n : {10.0, 100.0, 1000.0}) {
      const double d = cell_l2_distance(stability_datum(gd, phi, truncate_at(phi, n), u0), gd);
      CHECK(d < prev);
      CHECK(d > 0);
      prev = d;
    }
  }
  SECTION("identity family leaves g unchanged") {
    ApproxFamily fam{ApproxKind::Identity, phi, {1.0}};
    auto gn = stability_datum(gd, phi, make_approx(fam, 1.0), u0);
    bool same = true;
    for (int j = 0; j < g.cells(); ++j) same = same && gn[j] == gd[j] && gn.cell(j) == gd.cell(j);
    CHECK(same);
  }
  SECTION("u solves the regularized problem exactly") {
    auto phi_n = truncate_at(phi, 100);
    auto gn = stability_datum(gd, phi, phi_n, u0);
    auto r = weak_solution_report(one, u0, gn, phi_n, 1e-3);
    CHECK(r.residual_sup <= 1e-9);
    CHECK(std::abs(r.recovered_c) <= 1e-9);
  }
}

TEST_CASE("instability_schedule") {
  Grid g(1.0, 128);
  auto phi = power(1, 1.0 / 3);
  auto one = GridFn::constant(g, 1);
  ApproxFamily fam{ApproxKind::Truncation, phi, {10, 100, 1000, 10000, 100000}};
  std::vector<GridFn> gbar(4, one);
  std::vector<double> eps = {0.5, 0.25, 0.125, 0.0625};
  BvpOptions opt;
  opt.cross_check = false;
  auto s = instability_schedule(gbar, fam, eps, one, g, opt);
  REQUIRE(s.entries.size() == 4);
  for (std::size_t n = 0; n < 4; ++n) {
    // the regularized solutions of a constant datum vanish identically, so the first member already qualifies
    CHECK(s.entries[n].k_star == 0);
    CHECK(s.entries[n].k_bar == static_cast<int>(n));
    CHECK(s.entries[n].v_l2 <= eps[n]);
  }
  REQUIRE(s.diagonal.size() == 4);
  CHECK(classify_limit(s.diagonal).kind == LimitKind::ZeroLimit);

  SECTION("budget") {
    ApproxFamily short_fam{ApproxKind::Truncation, phi, {10, 100}};
    auto t = instability_schedule(gbar, short_fam, eps, one, g, opt);
    CHECK(t.entries[1].k_bar == 1);
    CHECK(t.entries[2].k_bar == -1);
    CHECK(t.entries[2].note.find("BudgetExceeded") == 0);
  }
  SECTION("mismatched lengths") {
    CHECK(code_of([&] { instability_schedule(gbar, fam, {0.5}, one, g, opt); }) == Errc::InvalidArgument);
  }
}
