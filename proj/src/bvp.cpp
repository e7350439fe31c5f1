#include "sfl/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sfl/errors.hpp"

namespace sfl {

namespace {

constexpr double kFlatEndpoint = 1e-12;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::pair<double, double> coercivity(const GridFn& a) {
  const auto c = a.cell_values();
  auto [lo, hi] = std::minmax_element(c.begin(), c.end());
  return {*lo, *hi};
}

double cell_l2(const GridFn& f) {
  double s = 0.0;
  for (int j = 0; j < f.grid().cells(); ++j) s += f.cell(j) * f.cell(j);
  return std::sqrt(s * f.grid().dx());
}

double sup_of(const Nonlinearity& phi) {
  if (phi.traits().bound) return *phi.traits().bound;
  if (phi.singular_at_zero() || phi.traits().minus_infinity_at_zero)
    throw Error(Errc::InvalidArgument, "regularized problem needs a bounded nonlinearity");
  if (const auto& m = phi.model(); m && m->c == 0 && m->smooth_is_constant())
    return std::abs(m->smooth.empty() ? 0.0 : m->smooth[0]);
  double s = std::abs(phi(0.0));
  for (int k = 0; k <= 480; ++k) {
    const double r = 1e3 * std::exp2(-k / 8.0);
    s = std::max({s, std::abs(phi(r)), std::abs(phi(-r))});
  }
  if (!std::isfinite(s)) throw Error(Errc::InvalidArgument, "regularized problem needs a bounded nonlinearity");
  return s;
}

double derivative(const Nonlinearity& phi, double s) {
  const double d = 1e-6 * std::max(std::abs(s), 1e-9);
  return (phi(s + d) - phi(s - d)) / (2 * d);
}

// least-squares slope of y against log10(x)
double ls_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log10(x[i]);
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log10(x[i]) - mx;
    sxy += dx * (y[i] - my);
    sxx += dx * dx;
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

}  // namespace

IvpSolution v_of_c(const GridFn& a, const GridFn& g, const Nonlinearity& phi, double c, const Grid& grid,
                   const IvpOptions& opt) {
  return solve_ivp(a, g.shifted(c), phi, grid, opt);
}

BvpSolution newton_fd(const GridFn& a, const GridFn& g, const Nonlinearity& phi_n, const GridFn& u0, double c0) {
  const Grid& grid = u0.grid();
  const int N = grid.cells();
  const double dx = grid.dx();
  std::vector<double> u(u0.nodes().begin(), u0.nodes().end());
  u[0] = u[N] = 0.0;
  double c = c0;
  const auto ac = a.cell_values(), gc = g.cell_values();

  // flux mean of phi over [s0, s1] and its partial derivatives
  auto mean = [&](double s0, double s1) { return s0 == s1 ? phi_n(s0) : value_mean(phi_n, s0, s1); };
  auto partials = [&](double s0, double s1, double m) -> std::pair<double, double> {
    const double w = s1 - s0;
    if (std::abs(w) <= 1e-7 * std::max(std::abs(s0), 1e-9)) {
      const double d = 0.5 * derivative(phi_n, 0.5 * (s0 + s1));
      return {d, d};
    }
    return {(m - phi_n(s0)) / w, (phi_n(s1) - m) / w};
  };
  // merit is the sum of squares; convergence is judged on the max norm
  std::vector<double> M(N), Mt(N);
  auto residual = [&](const std::vector<double>& v, double cc, std::vector<double>& R, std::vector<double>& Mv) {
    double m = 0.0;
    for (int j = 0; j < N; ++j) {
      Mv[j] = mean(v[j], v[j + 1]);
      R[j] = ac[j] * (v[j + 1] - v[j]) / dx - Mv[j] - gc[j] - cc;
      m += R[j] * R[j];
    }
    return m;
  };
  auto max_abs = [](const std::vector<double>& R) {
    double m = 0.0;
    for (double r : R) m = std::max(m, std::abs(r));
    return m;
  };
  double scale = 1.0;
  for (double x : gc) scale = std::max(scale, std::abs(x));
  const double tol = 1e-10 * scale;

  std::vector<double> R(N), Rt(N), p(N + 1), q(N + 1), ut(N + 1);
  double rn = residual(u, c, R, M);
  for (int it = 0; it < 100 && max_abs(R) > tol; ++it) {
    p[0] = q[0] = 0.0;
    for (int j = 0; j < N; ++j) {
      const auto [d0, d1] = partials(u[j], u[j + 1], M[j]);
      const double D = ac[j] / dx - d1, E = -ac[j] / dx - d0;
      if (std::abs(D) < 1e-12 * ac[j] / dx) throw Error(Errc::CrossCheckMismatch, "singular Newton step");
      p[j + 1] = (-R[j] - E * p[j]) / D;
      q[j + 1] = (1.0 - E * q[j]) / D;
    }
    if (q[N] == 0.0) throw Error(Errc::CrossCheckMismatch, "singular Newton step");
    const double dc = -p[N] / q[N];
    double lambda = 1.0, rt = kInf;
    for (; lambda >= 1e-8; lambda *= 0.5) {
      for (int j = 1; j < N; ++j) ut[j] = u[j] + lambda * (p[j] + q[j] * dc);
      ut[0] = ut[N] = 0.0;
      rt = residual(ut, c + lambda * dc, Rt, Mt);
      if (rt < (1 - 2e-4 * lambda) * rn) break;
    }
    if (!(rt < rn)) break;
    u.swap(ut);
    R.swap(Rt);
    M.swap(Mt);
    c += lambda * dc;
    rn = rt;
  }
  if (max_abs(R) > tol) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "Newton residual stalled at %.3g", max_abs(R));
    throw Error(Errc::CrossCheckMismatch, buf);
  }
  BvpSolution s{GridFn(grid, std::move(u)), c, {}, BvpMethod::NewtonFD};
  s.u.zero_left = s.u.zero_right = true;
  s.report = weak_solution_report(a, s.u, g, phi_n);
  return s;
}

BvpRun solve_regularized_bvp(const GridFn& a, const GridFn& g, const Nonlinearity& phi_n, const Grid& grid,
                             const BvpOptions& opt) {
  if (!(a.grid() == grid) || !(g.grid() == grid)) throw Error(Errc::DomainMismatch, "data live on another grid");
  if (opt.scan_samples < 2) throw Error(Errc::InvalidArgument, "scan needs at least two samples");
  const auto [alpha, beta] = coercivity(a);
  if (!(alpha > 0)) throw Error(Errc::CoercivityViolation, "a must be positive");
  const int N = grid.cells();
  BvpRun run;
  run.bracket = (beta / alpha + 1) * cell_l2(g) / std::sqrt(grid.length()) + sup_of(phi_n);
  if (run.bracket == 0.0) run.bracket = 1.0;

  IvpOptions iopt;
  iopt.deepest_only = true;
  iopt.scheme = opt.scheme;
  iopt.ladder_depth = opt.ladder_depth;
  auto endpoint = [&](double c) { return v_of_c(a, g, phi_n, c, grid, iopt).v[N]; };

  const double B = run.bracket;
  std::vector<double> cs;
  for (int i = 0; i < opt.scan_samples; ++i) cs.push_back(-B + 2 * B * i / (opt.scan_samples - 1));
  for (double h : opt.c_hints) {
    if (!(std::abs(h) < B)) continue;
    cs.push_back(h);
    const double d = 1e-3 * (1 + std::abs(h));
    for (int k = 0; k < 24; ++k) {
      const double off = std::ldexp(d, k);
      if (h - off > -B) cs.push_back(h - off);
      if (h + off < B) cs.push_back(h + off);
    }
  }
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  for (double c : cs) run.scan.emplace_back(c, endpoint(c));
  // |v_c(L)| at roundoff level counts as zero: with near-singular phi_n the endpoint map
  // can sit on such a plateau over a whole c-interval, and its sign there is noise.
  auto sgn = [](double e) { return std::abs(e) <= kFlatEndpoint ? 0 : (e > 0 ? 1 : -1); };
  std::vector<double> roots;
  const double ctol = 1e-10;
  for (std::size_t i = 0; i < run.scan.size(); ++i) {
    const auto [c0, e0] = run.scan[i];
    const int s0 = sgn(e0);
    if (s0 == 0) {
      if (i == 0) roots.push_back(c0);
      else if (const int sp = sgn(run.scan[i - 1].second); sp != 0) {
        // left edge of the plateau
        double lo = run.scan[i - 1].first, hi = c0;
        while (hi - lo > ctol * (1 + std::abs(0.5 * (lo + hi)))) {
          const double mid = 0.5 * (lo + hi);
          (sgn(endpoint(mid)) == 0 ? hi : lo) = mid;
        }
        roots.push_back(hi);
      }
      continue;
    }
    if (i + 1 == run.scan.size()) break;
    const auto [c1, e1] = run.scan[i + 1];
    if (sgn(e1) != -s0) continue;
    double lo = c0, hi = c1, elo = e0, ehi = e1;
    bool flat = false;
    while (hi - lo > ctol * (1 + std::abs(0.5 * (lo + hi)))) {
      const double mid = 0.5 * (lo + hi);
      const double e = endpoint(mid);
      if (sgn(e) == 0) {
        lo = hi = mid;
        flat = true;
        break;
      }
      if (sgn(e) == s0) lo = mid, elo = e;
      else hi = mid, ehi = e;
    }
    // a discrete endpoint map can jump; keep the side that actually meets the boundary condition
    roots.push_back(flat ? lo : (std::abs(elo) <= std::abs(ehi) ? lo : hi));
  }
  if (roots.empty()) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "NoRootInBracket: v_c(L) keeps one sign for %zu samples of c in [%.6g, %.6g]",
                  cs.size(), -B, B);
    run.note = buf;
    return run;
  }
  int jumps = 0;
  for (double c : roots) {
    auto sol = v_of_c(a, g, phi_n, c, grid, iopt);
    // a sign change across a jump of the discrete endpoint map is not a root
    if (std::abs(sol.v[N]) > 1e-8 * std::max(1.0, sup_norm(sol.v))) {
      ++jumps;
      continue;
    }
    std::vector<double> u(sol.v.nodes().begin(), sol.v.nodes().end());
    u[N] = 0.0;
    BvpSolution s{GridFn(grid, std::move(u)), c, {}, BvpMethod::ShootScan};
    s.u.zero_left = s.u.zero_right = true;
    s.report = weak_solution_report(a, s.u, g, phi_n);
    run.solutions.push_back(std::move(s));
  }
  if (run.solutions.empty()) {
    char buf[192];
    std::snprintf(buf, sizeof buf,
                  "NoRootInBracket: %d sign change(s) of v_c(L) in [%.6g, %.6g] were jumps of the discrete endpoint map",
                  jumps, -B, B);
    run.note = buf;
    return run;
  }
  if (opt.cross_check) {
    auto& first = run.solutions.front();
    const auto fd = newton_fd(a, g, phi_n, first.u, first.c);
    first.cross_check_distance = sup_distance(fd.u, first.u);
    if (first.cross_check_distance > 10 * grid.dx()) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "shooting and Newton solutions differ by %.3g > 10 dx", first.cross_check_distance);
      throw Error(Errc::CrossCheckMismatch, buf);
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu root(s) in [%.6g, %.6g], %d jump(s) discarded", run.solutions.size(), -B, B, jumps);
  run.note = buf;
  return run;
}

double c_star_upper_bound(const GridFn& a, const GridFn& g, const Nonlinearity& phi) {
  const auto [alpha, beta] = coercivity(a);
  double inf;
  try {
    inf = infimum_of(phi).value;
  } catch (const Error& e) {
    if (e.code() != Errc::InfiniteInfimum) throw;
    return kInf;
  }
  return (beta / alpha + 1) * cell_l2(g) / std::sqrt(g.grid().length()) - inf;
}

CStarResult find_c_star(const GridFn& a, const GridFn& g, const Nonlinearity& phi, const Grid& grid,
                        std::pair<double, double> bracket, const CStarOptions& opt) {
  auto [lo, hi] = bracket;
  if (!(lo < hi)) throw Error(Errc::InvalidArgument, "bracket must satisfy c_lo < c_hi");
  CStarResult r;
  r.tau = opt.kappa * std::sqrt(grid.dx());
  r.upper_bound = c_star_upper_bound(a, g, phi);
  IvpOptions iopt;
  iopt.ladder_depth = opt.ladder_depth;
  auto passes = [&](double c) {
    const double e = v_of_c(a, g, phi, c, grid, iopt).v[grid.cells()];
    r.trace.emplace_back(c, e);
    ++r.evaluations;
    return e <= r.tau;
  };
  const bool plo = passes(lo), phi_ = passes(hi);
  r.lo = lo;
  r.hi = hi;
  const auto flags = nonexistence_flags(g, phi);
  if (flags.bounded_below) {
    r.note = "NoSolution: g is bounded below, so no weak solution exists; any small endpoint values are plateau effects";
    return r;
  }
  if (plo && phi_) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "indicator passes on all of [%.6g, %.6g]; raise c_hi", lo, hi);
    throw Error(Errc::BracketTooNarrow, buf);
  }
  if (!plo && !phi_) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "NoSolution: v_c(L) > tau = %.3g at every tested c in [%.6g, %.6g]", r.tau, lo, hi);
    r.note = buf;
    return r;
  }
  if (!plo) throw Error(Errc::Inconclusive, "indicator passes at c_hi but fails at c_lo");
  while (hi - lo > opt.width) {
    const double mid = 0.5 * (lo + hi);
    (passes(mid) ? lo : hi) = mid;
  }
  r.lo = lo;
  r.hi = hi;
  r.c_star = lo;
  if (lo > r.upper_bound + r.tau) r.note = "located c* exceeds the theoretical upper bound";
  return r;
}

FamilyRecord sweep_family(const GridFn& a, const GridFn& g, const Nonlinearity& phi, const Grid& grid,
                          const std::vector<double>& c_list, std::optional<double> c_star, double kappa) {
  if (!std::is_sorted(c_list.begin(), c_list.end())) throw Error(Errc::InvalidArgument, "c_list must be ascending");
  FamilyRecord rec;
  rec.c_star = c_star;
  const double tau = kappa * std::sqrt(grid.dx());
  const int N = grid.cells();
  for (double c : c_list) {
    auto sol = v_of_c(a, g, phi, c, grid);
    const double e = sol.v[N];
    rec.vanishing_limit_trend.emplace_back(c, sup_norm(sol.v));
    rec.samples.push_back({c, std::move(sol.v), e});
  }
  bool ordered = true;
  int pairs = 0;
  for (std::size_t i = 0; i + 1 < rec.samples.size(); ++i) {
    const auto& s0 = rec.samples[i];
    const auto& s1 = rec.samples[i + 1];
    rec.continuity_moduli.push_back(sup_distance(s0.u, s1.u));
    if (s0.endpoint > tau || s1.endpoint > tau) continue;
    ++pairs;
    for (int j = 1; j < N; ++j)
      if (!(s0.u[j] < s1.u[j])) ordered = false;
  }
  rec.ordering_verdict = ordered && pairs > 0;
  rec.trend_verdict = true;
  for (std::size_t i = 0; i + 1 < rec.vanishing_limit_trend.size(); ++i)
    if (rec.vanishing_limit_trend[i].second > rec.vanishing_limit_trend[i + 1].second) rec.trend_verdict = false;
  return rec;
}

LimitSample limit_sample(double n, const GridFn& u, double c, const Nonlinearity& phi_n) {
  LimitSample s{n, sup_norm(u), c, kInf, 0.0};
  for (int j = 0; j <= u.grid().cells(); ++j) s.min_phi = std::min(s.min_phi, phi_n(u[j]));
  double l2 = 0.0;
  for (int j = 0; j < u.grid().cells(); ++j) {
    const double m = value_mean(phi_n, u[j], u[j + 1]);
    l2 += m * m;
  }
  s.phi_l2 = std::sqrt(l2 * u.grid().dx());
  return s;
}

std::string to_string(LimitKind k) { return k == LimitKind::ZeroLimit ? "ZeroLimit" : "WeakLimit"; }

LimitClassification classify_limit(const std::vector<LimitSample>& run) {
  if (run.size() < 2) throw Error(Errc::InvalidArgument, "a limit run needs at least two samples");
  const std::size_t half = std::max<std::size_t>(2, (run.size() + 1) / 2);
  const std::size_t start = run.size() - half;
  std::vector<double> n, sup, c, mp, l2;
  for (std::size_t i = start; i < run.size(); ++i) {
    n.push_back(run[i].n);
    sup.push_back(run[i].sup);
    c.push_back(run[i].c);
    mp.push_back(run[i].min_phi);
    l2.push_back(run[i].phi_l2);
  }
  LimitClassification r{LimitKind::ZeroLimit};
  r.slope_sup = ls_slope(n, sup);
  r.slope_c = ls_slope(n, c);
  r.slope_min_phi = ls_slope(n, mp);
  r.slope_phi_l2 = ls_slope(n, l2);
  double sup_max = 0.0;
  for (const auto& s : run) sup_max = std::max(sup_max, s.sup);
  r.sup_to_zero = r.slope_sup < 0 || sup.back() <= 1e-6 * (1 + sup_max);
  const double dc = c.back() - c.front(), dm = mp.back() - mp.front(), dl = l2.back() - l2.front();
  r.c_unbounded = r.slope_c < 0 && dc < -0.1 * std::max(1.0, std::abs(c.front()));
  r.min_phi_unbounded = r.slope_min_phi > 0 && dm > 0.1 * std::max(1.0, std::abs(mp.front()));
  r.c_stable = std::abs(dc) <= 0.05 * std::max(1.0, std::abs(c.back()));
  r.phi_l2_stable = std::abs(dl) <= 0.05 * std::max(1e-12, std::abs(l2.back()));
  const bool zero = r.sup_to_zero && r.c_unbounded && r.min_phi_unbounded;
  const bool weak = r.c_stable && r.phi_l2_stable;
  if (zero && !weak) return r;
  if (weak && !zero) {
    r.kind = LimitKind::WeakLimit;
    return r;
  }
  std::string msg = "mixed trends (n, sup, c, min phi, |phi|_2):";
  for (const auto& s : run) {
    char buf[128];
    std::snprintf(buf, sizeof buf, " (%g, %.3g, %.6g, %.6g, %.6g)", s.n, s.sup, s.c, s.min_phi, s.phi_l2);
    msg += buf;
  }
  throw Error(Errc::Inconclusive, msg);
}

}  // namespace sfl
