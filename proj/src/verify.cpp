#include "sfl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sfl/errors.hpp"
#include "sfl/quadrature.hpp"

namespace sfl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kFirstProbe = 36;

double min_cell(const GridFn& a) {
  double m = kInf;
  for (int j = 0; j < a.grid().cells(); ++j) m = std::min(m, a.cell(j));
  return m;
}

double cell_l2(const GridFn& f) {
  double s = 0.0;
  for (int j = 0; j < f.grid().cells(); ++j) s += f.cell(j) * f.cell(j);
  return std::sqrt(s * f.grid().dx());
}

void check_same_grid(const GridFn& x, const GridFn& y) {
  if (!(x.grid() == y.grid())) throw Error(Errc::DomainMismatch, "grid functions live on different grids");
}

}  // namespace

MembershipReport membership_U(const Nonlinearity& phi, const GridFn& u) {
  MembershipReport rep;
  const Grid& g = u.grid();
  const int N = g.cells();
  rep.zero_endpoints = u[0] == 0.0 && u[N] == 0.0;
  const double phi0 = phi(0.0);

  double regular = 0.0;
  std::vector<double> partial(quad::kGradedLevels + 1, 0.0);
  for (int j = 0; j < N; ++j) {
    const double s0 = u[j], s1 = u[j + 1];
    auto sq = [&](double t) {
      const double v = phi(s0 + t * (s1 - s0));
      return v * v;
    };
    if (s0 == 0.0 && s1 == 0.0) {
      if (!std::isfinite(phi0)) {
        rep.diagnostic = "u vanishes on a whole cell where phi is infinite";
        return rep;
      }
      regular += phi0 * phi0;
      continue;
    }
    if (s0 * s1 > 0.0) {
      regular += quad::gauss8(sq, 0.0, 1.0);
      continue;
    }
    // the interpolant vanishes at t = z; grade toward it from both sides
    const double z = s0 / (s0 - s1);
    auto add = [&](double edge) {
      if (edge == z) return;
      auto gr = quad::graded_toward(sq, z, edge, quad::kGradedLevels);
      double run = 0.0;
      for (int k = 0; k < quad::kGradedLevels; ++k) {
        run += std::abs(gr.panels[k]);
        partial[k + 1] += run;
      }
    };
    add(0.0);
    add(1.0);
  }
  for (int l = kFirstProbe; l <= quad::kGradedLevels; ++l)
    rep.refinements.push_back(g.dx() * (regular + partial[l]));
  const double first = rep.refinements.front(), last = rep.refinements.back();
  if (!std::isfinite(last)) {
    rep.diagnostic = "phi(u)^2 is not finite on the grid";
    return rep;
  }
  rep.phi_l2 = std::sqrt(last);
  const bool stable = last == first || (last - first) < 0.01 * first;
  if (!stable) rep.diagnostic = "graded integral of phi(u)^2 keeps growing near a zero of u";
  else if (!rep.zero_endpoints) rep.diagnostic = "u does not vanish at both ends";
  rep.member = stable && rep.zero_endpoints;
  return rep;
}

double recover_constant_c(const GridFn& a, const GridFn& u, const GridFn& g, const Nonlinearity& phi) {
  check_same_grid(a, u);
  check_same_grid(g, u);
  auto m = membership_U(phi, u);
  if (!m.member) throw Error(Errc::MembershipFailure, m.diagnostic);
  double num = 0.0, den = 0.0;
  for (int j = 0; j < u.grid().cells(); ++j) {
    num += (value_mean(phi, u[j], u[j + 1]) + g.cell(j)) / a.cell(j);
    den += 1.0 / a.cell(j);
  }
  return -num / den;
}

double default_tolerance(const Grid& g) { return 1e-3 * std::sqrt(g.dx() * 4096.0); }

WeakSolutionReport weak_solution_report(const GridFn& a, const GridFn& u, const GridFn& g, const Nonlinearity& phi,
                                        std::optional<double> tol) {
  check_same_grid(a, u);
  check_same_grid(g, u);
  WeakSolutionReport r;
  const Grid& grid = u.grid();
  const int N = grid.cells();
  const double dx = grid.dx();
  r.tol = tol.value_or(default_tolerance(grid));
  r.membership = membership_U(phi, u).member;

  std::vector<double> res(N);
  double den = 0.0, num = 0.0;
  try {
    for (int j = 0; j < N; ++j) {
      res[j] = a.cell(j) * u.slope(j) - value_mean(phi, u[j], u[j + 1]) - g.cell(j);
      num += res[j] / a.cell(j);
      den += 1.0 / a.cell(j);
    }
    r.recovered_c = num / den;
    double run = 0.0;
    for (int j = 0; j < N; ++j) {
      run += dx * (res[j] - r.recovered_c) / a.cell(j);
      r.residual_sup = std::max(r.residual_sup, std::abs(run));
    }
    if (!std::isfinite(r.residual_sup)) r.residual_sup = kInf;
  } catch (const Error&) {
    r.recovered_c = std::numeric_limits<double>::quiet_NaN();
    r.residual_sup = kInf;
  }

  double energy = 0.0, work = 0.0, chain = 0.0;
  for (int j = 0; j < N; ++j) {
    const double du = u[j + 1] - u[j];
    energy += dx * a.cell(j) * u.slope(j) * u.slope(j);
    work += dx * g.cell(j) * u.slope(j);
    if (du != 0.0) {
      double pm = phi(0.5 * (u[j] + u[j + 1]));
      if (!std::isfinite(pm)) {
        try {
          pm = value_mean(phi, u[j], u[j + 1]);
        } catch (const Error&) {
          pm = kInf;
        }
      }
      chain += pm * du;
    }
  }
  r.energy = energy;
  r.energy_gap = std::abs(energy - work);
  try {
    r.chain_rule_gap = std::abs(chain - (antiderivative_psi(phi, u[N]) - antiderivative_psi(phi, u[0])));
  } catch (const Error&) {
    r.chain_rule_gap = kInf;
  }
  if (std::isnan(r.chain_rule_gap)) r.chain_rule_gap = kInf;

  const double alpha = min_cell(a);
  const double gl2 = cell_l2(g);
  double semi = 0.0;
  for (int j = 0; j < N; ++j) semi += dx * u.slope(j) * u.slope(j);
  const double usup = sup_norm(u);
  if (gl2 > 0) {
    r.apriori_ratio_h1 = alpha * std::sqrt(semi) / gl2;
    r.apriori_ratio_sup = alpha * usup / (std::sqrt(grid.length()) * gl2);
  } else {
    r.apriori_ratio_h1 = semi > 0 ? kInf : 0.0;
    r.apriori_ratio_sup = usup > 0 ? kInf : 0.0;
  }

  r.residual_pass = r.residual_sup <= r.tol;
  r.energy_pass = r.energy_gap <= r.tol;
  r.ratios_pass = r.apriori_ratio_h1 <= 1 + 1e-6 && r.apriori_ratio_sup <= 1 + 1e-6;
  r.verdict = r.residual_pass && r.membership && r.energy_pass && r.ratios_pass;
  return r;
}

std::string to_string(SignClass s) {
  switch (s) {
    case SignClass::Unrestricted: return "Unrestricted";
    case SignClass::NonnegativeOnly: return "NonnegativeOnly";
    case SignClass::NonpositiveOnly: return "NonpositiveOnly";
    case SignClass::Empty: return "Empty";
  }
  return "?";
}

NonexistenceFlags nonexistence_flags(const GridFn& g, const Nonlinearity& phi) {
  NonexistenceFlags f;
  std::vector<double> level = g.cell_values();
  // finest first while coarsening, then reversed
  while (true) {
    f.minima.push_back(*std::min_element(level.begin(), level.end()));
    if (level.size() < 2 || level.size() % 2) break;
    std::vector<double> coarse(level.size() / 2);
    for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = 0.5 * (level[2 * i] + level[2 * i + 1]);
    level = std::move(coarse);
  }
  std::reverse(f.minima.begin(), f.minima.end());
  const std::size_t n = f.minima.size();
  bool falling = n >= 5;
  for (std::size_t i = n >= 4 ? n - 4 : 0; falling && i < n; ++i) {
    const double prev = f.minima[i - 1], cur = f.minima[i];
    falling = prev - cur > 0.01 * std::abs(prev);
  }
  f.bounded_below = !falling;

  switch (integrability_class(phi)) {
    case Integrability::BothIntegrable: f.sign_class = SignClass::Unrestricted; break;
    case Integrability::LeftOnly: f.sign_class = SignClass::NonpositiveOnly; break;
    case Integrability::RightOnly: f.sign_class = SignClass::NonnegativeOnly; break;
    case Integrability::NoneIntegrable: f.sign_class = SignClass::Empty; break;
  }
  f.u_empty = f.sign_class == SignClass::Empty;
  return f;
}

ConeCheck forbidden_cone_check(const GridFn& w, int node, double k) {
  const Grid& g = w.grid();
  const int N = g.cells();
  if (node < 0 || node > N) throw Error(Errc::InvalidArgument, "cone apex is not a grid node");
  if (w[node] != 0.0) throw Error(Errc::InvalidArgument, "w does not vanish at the cone apex");
  ConeCheck c;
  const double x0 = g.node(node);
  for (int m = 1;; ++m) {
    const bool has_right = node + m <= N, has_left = node - m >= 0;
    if (!has_right && !has_left) break;
    if (has_right && !(w[node + m] >= k * (g.node(node + m) - x0))) break;
    if (has_left && !(w[node - m] <= k * (g.node(node - m) - x0))) break;
    c.nodes = m;
  }
  c.ok = c.nodes > 0;
  c.delta = c.nodes * g.dx();
  return c;
}

}  // namespace sfl
