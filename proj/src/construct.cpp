#include "sfl/construct.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "sfl/errors.hpp"
#include "sfl/verify.hpp"

namespace sfl {

namespace {

void check_window(double lambda, double K, const SeamSpec& s) {
  const double gamma = K > 0 ? s.gamma_right : s.gamma_left;
  if (!(lambda > 0.5 && lambda * 2 * gamma < 1)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "lambda = %g outside (1/2, 1/(2 gamma)) for gamma = %g", lambda, gamma);
    throw Error(Errc::ExponentOutOfWindow, buf);
  }
}

void validate(const SeamSpec& s, double L) {
  const auto& z = s.zeros;
  if (z.size() < 2 || z.front().x != 0.0 || z.back().x != L)
    throw Error(Errc::InvalidArgument, "seam zeros must start at 0 and end at L");
  for (std::size_t i = 0; i + 1 < z.size(); ++i) {
    if (!(z[i].x < z[i + 1].x)) throw Error(Errc::InvalidArgument, "seam zeros must increase");
    const double kr = z[i].K_right, kl = z[i + 1].K_left;
    if (kr == 0.0 || kl == 0.0 || kr * kl < 0) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "amplitudes on (%g, %g) differ in sign", z[i].x, z[i + 1].x);
      throw Error(Errc::SignClash, buf);
    }
    check_window(z[i].lambda_right, kr, s);
    check_window(z[i + 1].lambda_left, kl, s);
    if (s.connector == Connector::Hermite && !(s.delta > 0 && z[i].x + s.delta < z[i + 1].x - s.delta))
      throw Error(Errc::InvalidArgument, "splice radius too large for the seam spacing");
  }
}

double segment_value(const SeamSpec& s, const SeamZero& p, const SeamZero& q, double x) {
  const double t = x - p.x, r = q.x - x;
  if (t <= 0 || r <= 0) return 0.0;
  if (s.connector == Connector::Product) return p.K_right * std::pow(t, p.lambda_right) * std::pow(r, q.lambda_left);
  if (t <= s.delta) return p.K_right * std::pow(t, p.lambda_right);
  if (r <= s.delta) return q.K_left * std::pow(r, q.lambda_left);
  const double A = p.K_right * std::pow(s.delta, p.lambda_right);
  const double B = q.K_left * std::pow(s.delta, q.lambda_left);
  const double u = (t - s.delta) / (q.x - p.x - 2 * s.delta);
  const double H = A + (B - A) * u * u * (3 - 2 * u);
  const double eta = 0.5 * std::min(std::abs(A), std::abs(B));
  return std::copysign(std::max(std::abs(H), eta), A);
}

// -phi(-s): u = -w turns a u' = phi(u) + g into a w' = -phi(-w) - g, singular at +inf again
// when phi uses the reflected convention phi(0) = -inf
Nonlinearity mirrored(const Nonlinearity& phi) {
  if (const auto& m = phi.model(); m && !phi.cap_radius()) {
    PowerModel r{-m->c, m->gamma_right, m->gamma_left, m->smooth};
    for (std::size_t k = 0; k < r.smooth.size(); ++k) r.smooth[k] *= k % 2 ? 1.0 : -1.0;
    return Nonlinearity::power(std::move(r));
  }
  Nonlinearity::Traits t;
  t.singular_at_zero = phi.traits().minus_infinity_at_zero;
  t.minus_infinity_at_zero = phi.traits().singular_at_zero;
  t.tail_bound_radius = phi.traits().tail_bound_radius;
  t.bound = phi.traits().bound;
  return Nonlinearity([phi](double s) { return -phi(-s); }, t);
}

GridFn restrict_to(const GridFn& f, const Grid& sub) {
  const int n = sub.cells();
  std::vector<double> nodes(f.nodes().begin(), f.nodes().begin() + n + 1);
  if (!f.has_mids()) return GridFn(sub, std::move(nodes));
  std::vector<double> mids(n);
  for (int j = 0; j < n; ++j) mids[j] = f.cell(j);
  return GridFn(sub, std::move(nodes), std::move(mids));
}

}  // namespace

SeamSpec SeamSpec::bump(double L, double K, double lambda, double gamma) {
  SeamSpec s;
  s.zeros = {{0.0, K, lambda, K, lambda}, {L, K, lambda, K, lambda}};
  s.connector = Connector::Product;
  s.gamma_left = s.gamma_right = gamma;
  return s;
}

GridFn power_seam_solution(const SeamSpec& spec, const Grid& grid) {
  validate(spec, grid.length());
  const int N = grid.cells();
  std::vector<double> w(N + 1, 0.0);
  std::size_t seg = 0;
  for (int j = 1; j < N; ++j) {
    const double x = grid.node(j);
    while (seg + 2 < spec.zeros.size() && x >= spec.zeros[seg + 1].x) ++seg;
    w[j] = segment_value(spec, spec.zeros[seg], spec.zeros[seg + 1], x);
  }
  GridFn out(grid, std::move(w));
  out.zero_left = out.zero_right = true;
  return out;
}

GridFn derive_datum(const GridFn& a, const GridFn& w, const Nonlinearity& phi, double c) {
  if (!(a.grid() == w.grid())) throw Error(Errc::DomainMismatch, "a and w live on different grids");
  auto m = membership_U(phi, w);
  if (!m.member) throw Error(Errc::MembershipFailure, m.diagnostic);
  const int N = w.grid().cells();
  std::vector<double> g(N);
  for (int j = 0; j < N; ++j) g[j] = a.cell(j) * w.slope(j) - value_mean(phi, w[j], w[j + 1]) - c;
  return GridFn::from_cells(w.grid(), std::move(g));
}

TailFix tail_fix(const GridFn& a, const GridFn& g, const Nonlinearity& phi, double delta, const Grid& grid,
                 int shrink_budget) {
  if (!(a.grid() == grid) || !(g.grid() == grid)) throw Error(Errc::DomainMismatch, "data live on another grid");
  const int N = grid.cells();
  const double dx = grid.dx();
  const double tau = std::sqrt(dx);
  int m = std::clamp(static_cast<int>(std::lround(delta / dx)), 1, N - 8);

  TailFix out{g, g};
  std::vector<double> v;
  for (int attempt = 0;; ++attempt) {
    Grid sub(grid.node(N - m), N - m);
    IvpOptions opt;
    opt.scheme = IvpScheme::FiniteVolume;
    auto sol = solve_ivp(restrict_to(a, sub), restrict_to(g, sub), phi, sub, opt);
    v.assign(sol.v.nodes().begin(), sol.v.nodes().end());
    if (std::abs(v.back()) >= tau) break;
    if (attempt >= shrink_budget || m == 1) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "|v(L - delta)| = %.3g below tau = %.3g after %d shrinks", std::abs(v.back()),
                    tau, attempt);
      throw Error(Errc::ZeroAtSplice, buf);
    }
    m = std::max(1, m / 2);
    ++out.shrinks;
  }
  const double V = v.back();
  out.delta = m * dx;
  out.splice_value = V;

  // bridge: zeta(|w|) = K (L - x), on the branch matching the sign of V
  const Nonlinearity branch = V > 0 ? phi : mirrored(phi);
  const ZetaTransform z = plus_shift_and_zeta(branch, std::abs(V));
  out.zeta_K = z.zeta(std::abs(V)) / out.delta;
  std::vector<double> u(v);
  u.resize(N + 1);
  for (int j = N - m + 1; j < N; ++j) {
    const double arg = std::min(out.zeta_K * (grid.length() - grid.node(j)), z.zeta_max());
    u[j] = std::copysign(z.zeta_inv(arg), V);
  }
  u[N] = 0.0;

  std::vector<double> gc = g.cell_values();
  for (int j = N - m; j < N; ++j) gc[j] = a.cell(j) * (u[j + 1] - u[j]) / dx - value_mean(phi, u[j], u[j + 1]);
  std::vector<double> gn(g.nodes().begin(), g.nodes().end());
  for (int j = N - m + 1; j < N; ++j) gn[j] = 0.5 * (gc[j - 1] + gc[j]);
  gn[N] = gc[N - 1];
  out.g_hat = GridFn(grid, std::move(gn), std::move(gc));
  out.u_hat = GridFn(grid, std::move(u));
  out.u_hat.zero_left = out.u_hat.zero_right = true;
  return out;
}

GridFn stability_datum(const GridFn& g, const Nonlinearity& phi, const Nonlinearity& phi_n, const GridFn& u) {
  if (!(g.grid() == u.grid())) throw Error(Errc::DomainMismatch, "g and u live on different grids");
  Nonlinearity::Traits t = phi.traits();
  t.bound.reset();
  t.infimum.reset();
  const Nonlinearity diff(
      [phi, phi_n](double s) {
        const double p = phi(s), q = phi_n(s);
        return p == q ? 0.0 : p - q;
      },
      t);
  const int N = u.grid().cells();
  std::vector<double> d(N);
  for (int j = 0; j < N; ++j) d[j] = value_mean(diff, u[j], u[j + 1]);
  // add the increment's node projection so that g survives bitwise where phi_n = phi
  const GridFn inc = GridFn::from_cells(u.grid(), d);
  std::vector<double> nodes(N + 1), cells = g.cell_values();
  for (int j = 0; j <= N; ++j) nodes[j] = g[j] + inc[j];
  for (int j = 0; j < N; ++j) cells[j] += d[j];
  return GridFn(u.grid(), std::move(nodes), std::move(cells));
}

namespace {

std::optional<BvpSolution> lowest_root(const GridFn& a, const GridFn& g, const Nonlinearity& phi, const Grid& grid,
                                       const BvpOptions& opt) {
  auto run = solve_regularized_bvp(a, g, phi, grid, opt);
  if (run.solutions.empty()) return std::nullopt;
  return std::move(run.solutions.front());
}

}  // namespace

InstabilitySchedule instability_schedule(const std::vector<GridFn>& g_bar, const ApproxFamily& phi_family,
                                         const std::vector<double>& eps, const GridFn& a, const Grid& grid,
                                         const BvpOptions& opt) {
  if (g_bar.size() != eps.size()) throw Error(Errc::InvalidArgument, "g_bar and eps differ in length");
  const auto& ks = phi_family.index_schedule;
  if (ks.empty()) throw Error(Errc::InvalidArgument, "family has an empty index schedule");
  InstabilitySchedule out;
  int prev = -1;
  for (std::size_t n = 0; n < g_bar.size(); ++n) {
    InstabilityEntry e;
    e.n = static_cast<int>(n);
    if (!(eps[n] > 0)) throw Error(Errc::InvalidArgument, "eps must be positive");
    for (std::size_t k = 0; k < ks.size(); ++k) {
      const auto sol = lowest_root(a, g_bar[n], make_approx(phi_family, ks[k]), grid, opt);
      if (!sol) continue;
      e.v_l2 = norms(sol->u).l2;
      e.c = sol->c;
      if (e.v_l2 <= eps[n]) {
        e.k_star = static_cast<int>(k);
        break;
      }
    }
    if (e.k_star < 0) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "BudgetExceeded: |v|_2 = %.3g > eps = %.3g after %zu family members", e.v_l2,
                    eps[n], ks.size());
      e.note = buf;
    } else {
      // the diagonal only needs some strictly increasing k_bar >= k_star
      e.k_bar = std::max(e.k_star, prev + 1);
      if (e.k_bar >= static_cast<int>(ks.size())) {
        e.k_bar = -1;
        e.note = "BudgetExceeded: monotone repair ran past the family";
      } else {
        prev = e.k_bar;
        const Nonlinearity phi_k = make_approx(phi_family, ks[e.k_bar]);
        const auto sol = lowest_root(a, g_bar[n], phi_k, grid, opt);
        if (sol) out.diagonal.push_back(limit_sample(ks[e.k_bar], sol->u, sol->c, phi_k));
      }
    }
    out.entries.push_back(std::move(e));
  }
  return out;
}

}  // namespace sfl
