#include "sfl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "sfl/errors.hpp"
#include "sfl/quadrature.hpp"

namespace sfl {

Grid::Grid(double L, int N) : L_(L), N_(N) {
  if (!(L > 0.0) || !std::isfinite(L)) throw Error(Errc::InvalidArgument, "grid length must be positive");
  if (N < 8) throw Error(Errc::InvalidArgument, "grid needs at least 8 cells");
}

static void check_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw Error(Errc::NonFinite, what);
}

GridFn::GridFn(Grid g, std::vector<double> nodes) : grid_(g), nodes_(std::move(nodes)) {
  if (static_cast<int>(nodes_.size()) != grid_.cells() + 1)
    throw Error(Errc::DomainMismatch, "node count does not match grid");
  check_finite(nodes_, "non-finite node value");
}

GridFn::GridFn(Grid g, std::vector<double> nodes, std::vector<double> mids)
    : GridFn(g, std::move(nodes)) {
  if (!mids.empty() && static_cast<int>(mids.size()) != grid_.cells())
    throw Error(Errc::DomainMismatch, "cell count does not match grid");
  check_finite(mids, "non-finite cell value");
  mids_ = std::move(mids);
}

GridFn GridFn::sample(const Grid& g, const std::function<double(double)>& f) {
  std::vector<double> v(g.cells() + 1);
  for (int j = 0; j <= g.cells(); ++j) v[j] = f(g.node(j));
  return GridFn(g, std::move(v));
}

GridFn GridFn::constant(const Grid& g, double c) {
  return GridFn(g, std::vector<double>(g.cells() + 1, c));
}

GridFn GridFn::from_cells(const Grid& g, std::vector<double> cells) {
  const int n = g.cells();
  if (static_cast<int>(cells.size()) != n) throw Error(Errc::DomainMismatch, "cell count does not match grid");
  std::vector<double> v(n + 1);
  v[0] = cells[0];
  v[n] = cells[n - 1];
  for (int j = 1; j < n; ++j) v[j] = 0.5 * (cells[j - 1] + cells[j]);
  return GridFn(g, std::move(v), std::move(cells));
}

std::vector<double> GridFn::cell_values() const {
  if (!mids_.empty()) return mids_;
  std::vector<double> c(grid_.cells());
  for (int j = 0; j < grid_.cells(); ++j) c[j] = cell(j);
  return c;
}

GridFn GridFn::shifted(double c) const {
  GridFn out = *this;
  for (double& v : out.nodes_) v += c;
  for (double& v : out.mids_) v += c;
  out.zero_left = out.zero_right = false;
  return out;
}

GridFn GridFn::scaled(double k) const {
  GridFn out = *this;
  for (double& v : out.nodes_) v *= k;
  for (double& v : out.mids_) v *= k;
  return out;
}

GridFn differentiate(const GridFn& f) {
  const Grid& g = f.grid();
  std::vector<double> s(g.cells());
  for (int j = 0; j < g.cells(); ++j) s[j] = f.slope(j);
  return GridFn::from_cells(g, std::move(s));
}

double integrate(const Grid& g, std::span<const double> mids) {
  check_finite(mids, "non-finite integrand sample");
  double s = 0.0;
  for (double v : mids) s += v;
  return s * g.dx();
}

double integrate(const Grid& g, const std::function<double(double)>& f, bool graded) {
  const int n = g.cells();
  const double h = g.dx();
  auto checked = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) throw Error(Errc::NonFinite, "non-finite integrand sample");
    return v;
  };
  double s = 0.0;
  if (!graded) {
    for (int j = 0; j < n; ++j) s += checked(g.midpoint(j));
    return s * h;
  }
  constexpr double r = 0.5773502691896257;  // 1/sqrt(3)
  for (int j = 1; j < n - 1; ++j) {
    const double c = g.midpoint(j);
    s += 0.5 * h * (checked(c - 0.5 * h * r) + checked(c + 0.5 * h * r));
  }
  const double L = g.length();
  s += quad::graded_toward(checked, 0.0, h).value;
  s += quad::graded_toward([&](double t) { return checked(L - t); }, 0.0, h).value;
  return s;
}

GridFn cumulative_integral(const GridFn& f) {
  const Grid& g = f.grid();
  std::vector<double> v(g.cells() + 1, 0.0);
  for (int j = 0; j < g.cells(); ++j) v[j + 1] = v[j] + g.dx() * f.cell(j);
  return GridFn(g, std::move(v));
}

double l2_norm(const GridFn& f) {
  const Grid& g = f.grid();
  double s = 0.0;
  if (f.has_mids()) {
    for (int j = 0; j < g.cells(); ++j) s += f.cell(j) * f.cell(j);
  } else {
    // exact for the piecewise-linear interpolant
    for (int j = 0; j < g.cells(); ++j) {
      const double a = f[j], b = f[j + 1];
      s += (a * a + a * b + b * b) / 3.0;
    }
  }
  return std::sqrt(s * g.dx());
}

double sup_norm(const GridFn& f) {
  double m = 0.0;
  for (double v : f.nodes()) m = std::max(m, std::abs(v));
  return m;
}

double sup_distance(const GridFn& a, const GridFn& b) {
  if (!(a.grid() == b.grid())) throw Error(Errc::DomainMismatch, "grids differ");
  double m = 0.0;
  for (int j = 0; j <= a.grid().cells(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

static double holder_half(const GridFn& u) {
  const Grid& g = u.grid();
  const int n = g.cells();
  const double sup = sup_norm(u);
  double best = 0.0;
  for (int i = 0; i <= n; ++i) {
    for (int j = i + 1; j <= n; ++j) {
      const double d = std::sqrt((j - i) * g.dx());
      // |u_i - u_j| <= |u_i| + sup, so farther partners cannot win
      if (best > 0.0 && (std::abs(u[i]) + sup) / d <= best) break;
      best = std::max(best, std::abs(u[i] - u[j]) / d);
    }
  }
  return best;
}

Norms norms(const GridFn& u) {
  Norms r;
  const Grid& g = u.grid();
  r.l2 = l2_norm(u);
  double s = 0.0;
  for (int j = 0; j < g.cells(); ++j) s += u.slope(j) * u.slope(j);
  r.h1_semi = std::sqrt(s * g.dx());
  r.sup = sup_norm(u);
  r.holder_half = holder_half(u);
  return r;
}

GridFn resample(const GridFn& u, const Grid& target) {
  const Grid& src = u.grid();
  if (src.length() != target.length()) throw Error(Errc::DomainMismatch, "resample needs equal lengths");
  std::vector<double> v(target.cells() + 1);
  for (int j = 0; j <= target.cells(); ++j) {
    // exact rational position on the source grid
    const long long num = static_cast<long long>(j) * src.cells();
    const long long k = std::min<long long>(num / target.cells(), src.cells() - 1);
    const double t = static_cast<double>(num - k * target.cells()) / target.cells();
    v[j] = t == 0.0 ? u[static_cast<int>(k)] : (1.0 - t) * u[static_cast<int>(k)] + t * u[static_cast<int>(k) + 1];
  }
  GridFn out(target, std::move(v));
  out.zero_left = u.zero_left;
  out.zero_right = u.zero_right;
  return out;
}

void write_profile_csv(std::ostream& os, const GridFn& f) {
  os << "x,value\n";
  char buf[64];
  const Grid& g = f.grid();
  for (int j = 0; j <= g.cells(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", g.node(j), f[j]);
    os << buf;
  }
}

}  // namespace sfl
