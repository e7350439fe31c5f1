#include "sfl/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sfl/errors.hpp"
#include "sfl/quadrature.hpp"

namespace sfl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kZetaLevels = 30;
constexpr int kZetaDepth = 3;
constexpr int kMaxHalvings = 30;

// phi_k = T_n(phi(clamp(s, -M, M))), remembering whether either clamp was touched.
struct Level {
  const Nonlinearity* phi;
  double n;
  double M;
  mutable bool clamped = false;

  double operator()(double s) const {
    if (std::abs(s) > M) {
      clamped = true;
      s = std::clamp(s, -M, M);
    }
    double v = (*phi)(s);
    if (std::isnan(v)) throw Error(Errc::NonFinite, "phi returned NaN");
    if (std::abs(v) > n) {
      clamped = true;
      v = std::clamp(v, -n, n);
    }
    return v;
  }
};

class CellStepper {
public:
  CellStepper(const Level& phi, double a, double h, double tol) : phi_(phi), a_(a), h_(h), tol_(tol) {}

  double advance(double v, double dx) const {
    const double f0 = phi_(v) + h_;
    if (std::abs(v) < std::sqrt(dx) && f0 > 0) return zeta_step(v, dx, f0);
    return adapt(v, dx, tol_, kMaxHalvings);
  }

private:
  double rhs(double s) const { return phi_(s) + h_; }

  // implicit midpoint: m = v + s/(2a) F(m), y = 2m - v
  double midpoint_step(double v, double s) const {
    const double k = s / (2 * a_);
    auto G = [&](double m) { return m - v - k * rhs(m); };
    const double g0 = G(v);
    if (g0 == 0.0) return v;
    const double dir = g0 < 0 ? 1.0 : -1.0;
    double lo = v, glo = g0, hi = v, ghi = g0;
    double d = 1.5 * std::abs(g0);
    bool bracketed = false;
    for (int it = 0; it < 2000 && !bracketed; ++it) {
      hi = v + dir * d;
      ghi = G(hi);
      if ((ghi > 0) != (glo > 0) || ghi == 0) bracketed = true;
      else {
        lo = hi;
        glo = ghi;
        d *= 2;
      }
    }
    if (!bracketed) throw Error(Errc::NoConvergence, "implicit midpoint root not bracketed");
    // Illinois
    double m = hi, gm = ghi;
    int side = 0;
    for (int it = 0; it < 200; ++it) {
      if (gm == 0.0 || std::abs(gm) <= 1e-14 * (1 + std::abs(m))) break;
      if (std::abs(hi - lo) <= 4 * std::numeric_limits<double>::epsilon() * (1 + std::abs(m))) break;
      m = (lo * ghi - hi * glo) / (ghi - glo);
      if (!(m > std::min(lo, hi) && m < std::max(lo, hi))) m = 0.5 * (lo + hi);
      gm = G(m);
      if ((gm > 0) == (ghi > 0)) {
        hi = m;
        ghi = gm;
        if (side == -1) glo *= 0.5;
        side = -1;
      } else {
        lo = m;
        glo = gm;
        if (side == 1) ghi *= 0.5;
        side = 1;
      }
    }
    return 2 * m - v;
  }

  double adapt(double v, double s, double tol, int depth) const {
    const double full = midpoint_step(v, s);
    const double half = midpoint_step(midpoint_step(v, 0.5 * s), 0.5 * s);
    if (!std::isfinite(half)) throw Error(Errc::NonFinite, "IVP step produced a non-finite value");
    if (std::abs(full - half) <= tol * std::max(1.0, std::abs(half)) || depth == 0) return half;
    const double mid = adapt(v, 0.5 * s, 0.5 * tol, depth - 1);
    return adapt(mid, 0.5 * s, 0.5 * tol, depth - 1);
  }

  // Exact step for frozen a, h: int_v^y dr / (phi(r) + h) = dx / a.
  double zeta_step(double v, double dx, double f0) const {
    bool bad = false;
    auto q = [&](double r) {
      const double d = rhs(r);
      if (!(d > 0)) {
        bad = true;  // NaN stops the adaptive recursion
        return std::numeric_limits<double>::quiet_NaN();
      }
      return 1.0 / d;
    };
    const double target = dx / a_;
    const double tol = 1e-14 * target;
    // graded toward the singular point 0, each panel refined adaptively so kinks of
    // truncated models do not leave noise in I(y)
    auto toward_zero = [&](double b) {
      double sum = 0, outer = b, prev = 0, last = 0;
      for (int k = 0; k < kZetaLevels; ++k) {
        const double inner = 0.5 * outer;
        const double p = quad::adaptive(q, inner, outer, tol, kZetaDepth);
        sum += p;
        prev = last;
        last = p;
        outer = inner;
      }
      if (prev != 0 && std::abs(last) < std::abs(prev)) sum += last * (last / prev) / (1 - last / prev);
      return sum;
    };
    auto I = [&](double y) {
      bad = false;
      double s;
      if (v == 0) s = toward_zero(y);
      else if ((v < 0) != (y < 0) || y == 0) s = -toward_zero(v) + (y == 0 ? 0.0 : toward_zero(y));
      else s = quad::adaptive(q, v, y, tol, kZetaDepth);
      return bad ? kInf : s;
    };
    const double scale = target * f0;
    double lo = v, hi = kInf;
    double y = v + scale;
    double prev_step = kInf;
    for (int it = 0; it < 300; ++it) {
      const double val = I(y) - target;
      if (val == 0 || std::abs(val) <= tol) return y;
      const bool over = !std::isfinite(val) || val > 0;
      if (over) hi = y;
      else lo = y;
      double next = std::numeric_limits<double>::quiet_NaN();
      const double fy = rhs(y);
      if (std::isfinite(val) && fy > 0) next = y - val * fy;
      const bool stalled = std::isfinite(hi) && std::abs(next - y) > 0.5 * prev_step;
      if (stalled || !(next > lo && next < hi)) next = std::isfinite(hi) ? 0.5 * (lo + hi) : lo + 2 * (lo - v + scale);
      if (std::abs(next - y) <= 1e-15 * (std::abs(y) + scale) || hi - lo <= 1e-15 * (std::abs(y) + scale))
        return next;
      prev_step = std::abs(next - y);
      y = next;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "zeta step did not converge (v=%.3g dx=%.3g f0=%.3g lo=%.17g hi=%.17g)", v, dx, f0, lo, hi);
    throw Error(Errc::NoConvergence, buf);
  }

  const Level& phi_;
  double a_;
  double h_;
  double tol_;
};

std::vector<double> solve_level(std::span<const double> a, std::span<const double> h, const Level& phi,
                                const Grid& grid, double tol) {
  const int N = grid.cells();
  std::vector<double> v(N + 1, 0.0);
  for (int j = 0; j < N; ++j) {
    v[j + 1] = CellStepper(phi, a[j], h[j], tol).advance(v[j], grid.dx());
    if (!std::isfinite(v[j + 1])) throw Error(Errc::NonFinite, "IVP solution left the finite range");
  }
  return v;
}

// a (y - v)/dx = value_mean(phi, v, y) + h
double finite_volume_step(const Nonlinearity& phi, double v, double a, double h, double dx) {
  auto F = [&](double y) { return a * (y - v) / dx - (y == v ? phi(v) : value_mean(phi, v, y)) - h; };
  const double f0 = phi(v) + h;
  if (f0 == 0.0) return v;
  const double dir = f0 > 0 ? 1.0 : -1.0;
  double d = std::isfinite(f0) ? 1.5 * std::abs(f0) * dx / a : dx;
  double lo = v, flo = -dir, hi = v, fhi = -dir;
  bool bracketed = false;
  const double scale = a * std::abs(v) / dx + std::abs(h) + (std::isfinite(f0) ? std::abs(f0) : 0.0);
  bool zero_seen = v == 0.0;
  for (int it = 0; it < 2000 && !bracketed; ++it) {
    hi = v + dir * d;
    // 0 is where singular-like models change character; a root pair around it can hide
    // inside one expansion step, so stop there first
    if (!zero_seen && (hi > 0) != (v > 0)) {
      zero_seen = true;
      hi = 0.0;
      fhi = F(hi);
      if (std::abs(fhi) <= 1e-12 * scale) return 0.0;
      if ((fhi > 0) != (flo > 0)) {
        bracketed = true;
        break;
      }
      lo = hi;
      flo = fhi;
      // walk out from 0 geometrically; the nearest root on the far side may be tiny
      for (double e = std::ldexp(std::min(std::abs(v), d), -30); e < d && !bracketed; e *= 2) {
        hi = dir * e;
        fhi = F(hi);
        if ((fhi > 0) != (flo > 0) || fhi == 0) bracketed = true;
        else {
          lo = hi;
          flo = fhi;
        }
      }
      continue;
    }
    fhi = F(hi);
    if ((fhi > 0) != (flo > 0) || fhi == 0) bracketed = true;
    else {
      lo = hi;
      flo = fhi;
      d *= 2;
    }
  }
  if (!bracketed) throw Error(Errc::NoConvergence, "finite volume step not bracketed");
  if (lo == v) {
    // F at v itself may be infinite; start the bracket just off v
    lo = v + dir * 1e-300;
    flo = F(lo);
    if (!std::isfinite(flo)) flo = -dir;
  }
  double y = hi, fy = fhi;
  int side = 0;
  for (int it = 0; it < 300; ++it) {
    if (fy == 0.0 || std::abs(hi - lo) <= 2 * std::numeric_limits<double>::epsilon() * std::abs(y)) break;
    y = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(y > std::min(lo, hi) && y < std::max(lo, hi)) || !std::isfinite(y)) y = 0.5 * (lo + hi);
    fy = F(y);
    if ((fy > 0) == (fhi > 0)) {
      hi = y;
      fhi = fy;
      if (side == -1) flo *= 0.5;
      side = -1;
    } else {
      lo = y;
      flo = fy;
      if (side == 1) fhi *= 0.5;
      side = 1;
    }
  }
  return y;
}

double max_distance(const std::vector<double>& x, const std::vector<double>& y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, std::abs(x[i] - y[i]));
  return d;
}

}  // namespace

IvpSolution solve_ivp(const GridFn& a, const GridFn& h, const Nonlinearity& phi, const Grid& grid,
                      int ladder_depth, double alpha) {
  IvpOptions opt;
  opt.ladder_depth = ladder_depth;
  opt.alpha = alpha;
  return solve_ivp(a, h, phi, grid, opt);
}

IvpSolution solve_ivp(const GridFn& a, const GridFn& h, const Nonlinearity& phi, const Grid& grid,
                      const IvpOptions& opt) {
  if (!(a.grid() == grid) || !(h.grid() == grid)) throw Error(Errc::DomainMismatch, "coefficients live on another grid");
  if (opt.ladder_depth < 1) throw Error(Errc::InvalidArgument, "ladder depth must be at least 1");
  const auto ac = a.cell_values();
  const auto hc = h.cell_values();
  const double amin = *std::min_element(ac.begin(), ac.end());
  if (!(amin > 0) || amin < opt.alpha) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "min a = %g below alpha = %g", amin, opt.alpha);
    throw Error(Errc::CoercivityViolation, buf);
  }
  double hsup = 0.0;
  for (double x : hc) hsup = std::max(hsup, std::abs(x));
  const double E = grid.length() * (4 + hsup) / amin;

  IvpSolution out{GridFn(grid, std::vector<double>(grid.cells() + 1, 0.0)),
                  GridFn(grid, std::vector<double>(grid.cells() + 1, 0.0)), {}};
  std::vector<double> prev, cur;
  bool prev_clamped = true;
  const int first = opt.deepest_only ? opt.ladder_depth : 1;
  if (opt.scheme == IvpScheme::FiniteVolume) {
    prev.assign(grid.cells() + 1, 0.0);
    for (int j = 0; j < grid.cells(); ++j) {
      prev[j + 1] = finite_volume_step(phi, prev[j], ac[j], hc[j], grid.dx());
      if (!std::isfinite(prev[j + 1])) throw Error(Errc::NonFinite, "IVP solution left the finite range");
    }
    out.levels_solved = 1;
    prev_clamped = false;
  }
  for (int k = first; k <= opt.ladder_depth && opt.scheme == IvpScheme::Path; ++k) {
    if (!prev_clamped) {
      // nothing was clamped, so deeper members agree with this one wherever they were evaluated
      out.ladder_trace.emplace_back(k - 1, 0.0);
      continue;
    }
    Level lv{&phi, std::pow(4.0, k), std::ldexp(E, k)};
    cur = solve_level(ac, hc, lv, grid, opt.cell_tol);
    ++out.levels_solved;
    if (!prev.empty()) out.ladder_trace.emplace_back(k - 1, max_distance(prev, cur));
    prev_clamped = lv.clamped;
    prev = std::move(cur);
  }

  // distances below this are roundoff from the cell solves, not a failure to converge
  constexpr double kLadderFloor = 1e-9;
  const auto& tr = out.ladder_trace;
  double vsup = 0.0;
  for (double x : prev) vsup = std::max(vsup, std::abs(x));
  if (tr.size() >= 3) {
    const double d1 = tr[tr.size() - 3].second, d2 = tr[tr.size() - 2].second, d3 = tr.back().second;
    if (d1 <= d2 && d2 <= d3 && d3 > kLadderFloor * std::max(1.0, vsup)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "ladder distances %.3g, %.3g, %.3g do not contract", d1, d2, d3);
      throw Error(Errc::NoConvergence, buf);
    }
  }

  const int N = grid.cells();
  std::vector<double> phic(N);
  double l2 = 0.0;
  for (int j = 0; j < N; ++j) {
    phic[j] = ac[j] * (prev[j + 1] - prev[j]) / grid.dx() - hc[j];
    l2 += grid.dx() * phic[j] * phic[j];
  }
  out.positivity_certificate = std::all_of(prev.begin() + 1, prev.end() - 1, [](double x) { return x > 0; });
  out.v = GridFn(grid, std::move(prev));
  out.v.zero_left = true;
  out.phi_of_v = GridFn::from_cells(grid, std::move(phic));
  out.phi_l2_estimate = std::sqrt(l2);
  return out;
}

GridFn pure_zeta_solve(double K, const ZetaTransform& zeta, const Grid& grid) {
  if (!(K > 0)) throw Error(Errc::InvalidArgument, "K must be positive");
  std::vector<double> w(grid.cells() + 1);
  for (int j = 0; j <= grid.cells(); ++j) w[j] = j == 0 ? 0.0 : zeta.zeta_inv(K * grid.node(j));
  GridFn out(grid, std::move(w));
  out.zero_left = true;
  return out;
}

double apriori_bound_C_R(const Nonlinearity& phi, const GridFn& h, double alpha, double L, double R) {
  if (!(alpha > 0) || !(L > 0) || !(R > 0)) throw Error(Errc::InvalidArgument, "alpha, L and R must be positive");
  const double out = sup_outside(phi, R);
  const double l1 = l1_norm_on(phi, R);
  return (L + 1) * ((std::sqrt(L) * out + l2_norm(h)) / alpha + std::sqrt(l1) / std::sqrt(alpha));
}

double h1_norm(const GridFn& v) {
  double semi = 0.0;
  for (int j = 0; j < v.grid().cells(); ++j) semi += v.grid().dx() * v.slope(j) * v.slope(j);
  const double l2 = l2_norm(v);
  return std::sqrt(l2 * l2 + semi);
}

}  // namespace sfl
