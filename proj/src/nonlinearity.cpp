#include "sfl/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sfl/errors.hpp"
#include "sfl/quadrature.hpp"

namespace sfl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sgn(double s) { return s < 0 ? -1.0 : 1.0; }

}  // namespace

double PowerModel::smooth_at(double s) const {
  double r = 0.0;
  for (auto it = smooth.rbegin(); it != smooth.rend(); ++it) r = r * s + *it;
  return r;
}

double PowerModel::smooth_antiderivative(double s) const {
  double r = 0.0;
  for (std::size_t k = smooth.size(); k-- > 0;) r = r * s + smooth[k] / static_cast<double>(k + 1);
  return r * s;
}

bool PowerModel::smooth_is_constant() const {
  for (std::size_t k = 1; k < smooth.size(); ++k)
    if (smooth[k] != 0.0) return false;
  return true;
}

double PowerModel::eval(double s) const {
  if (s == 0.0) {
    if (c > 0) return kInf;
    if (c < 0) return -kInf;
    return smooth_at(0.0);
  }
  const double g = s > 0 ? gamma_right : gamma_left;
  return c * std::pow(std::abs(s), -g) + smooth_at(s);
}

Nonlinearity::Nonlinearity(Fn f, Traits t) : f_(std::move(f)), traits_(t) {}

Nonlinearity Nonlinearity::power(PowerModel m) {
  if (m.gamma_left <= 0 || m.gamma_right <= 0)
    throw Error(Errc::InvalidArgument, "power model exponents must be positive");
  Traits t;
  t.singular_at_zero = m.c > 0;
  t.minus_infinity_at_zero = m.c < 0;
  bool smooth_nonincreasing = true;
  for (std::size_t k = 1; k < m.smooth.size(); ++k)
    if (m.smooth[k] > 0) smooth_nonincreasing = false;
  t.monotone_nonincreasing_on_positive = m.c >= 0 && smooth_nonincreasing;
  const double a0 = m.smooth.empty() ? 0.0 : m.smooth[0];
  if (m.smooth_is_constant()) {
    if (m.c >= 0) t.infimum = a0;
    if (m.c == 0) t.bound = std::abs(a0);
  }
  Nonlinearity out([m](double s) { return m.eval(s); }, t);
  out.model_ = std::move(m);
  return out;
}

Nonlinearity Nonlinearity::constant(double k) {
  return power(PowerModel{0.0, 1.0, 1.0, {k}});
}

Nonlinearity Nonlinearity::tabulated(std::vector<double> s, std::vector<double> v) {
  if (s.size() != v.size() || s.size() < 2) throw Error(Errc::InvalidArgument, "table needs matching columns");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1])) throw Error(Errc::InvalidArgument, "table abscissae must increase");
  Traits t;
  t.bound = 0.0;
  double lo = kInf;
  bool mono = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw Error(Errc::InvalidArgument, "table values must be finite");
    t.bound = std::max(*t.bound, std::abs(v[i]));
    lo = std::min(lo, v[i]);
    if (i > 0 && s[i] > 0 && v[i] > v[i - 1]) mono = false;
  }
  t.infimum = lo;
  t.monotone_nonincreasing_on_positive = mono;
  t.tail_bound_radius = std::max(std::abs(s.front()), std::abs(s.back()));
  return Nonlinearity(
      [s = std::move(s), v = std::move(v)](double x) {
        if (x <= s.front()) return v.front();
        if (x >= s.back()) return v.back();
        const auto i = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin()) - 1;
        const double t = (x - s[i]) / (s[i + 1] - s[i]);
        return (1 - t) * v[i] + t * v[i + 1];
      },
      t);
}

double eval_phi(const Nonlinearity& phi, double s) { return phi(s); }

namespace {

double model_psi(const PowerModel& m, double s) {
  double r = m.smooth_antiderivative(s);
  if (s == 0.0 || m.c == 0.0) return r;
  const double g = s > 0 ? m.gamma_right : m.gamma_left;
  if (g >= 1.0) throw Error(Errc::NonIntegrableSingularity, "power exponent >= 1 at the origin");
  const double v = m.c * std::pow(std::abs(s), 1.0 - g) / (1.0 - g);
  return r + sgn(s) * v;
}

double capped_model_psi(const PowerModel& m, std::optional<double> cap, double s) {
  if (!cap || std::abs(s) <= *cap) return model_psi(m, s);
  const double edge = sgn(s) * *cap;
  return model_psi(m, edge) + m.eval(edge) * (s - edge);
}

// int_a^b phi with geometric panels accumulating toward a.
double graded_from(const Nonlinearity& phi, double a, double b) {
  auto g = quad::graded_toward([&](double t) { return phi(t); }, a, b);
  if (g.divergent) throw Error(Errc::NonIntegrableSingularity, "graded quadrature diverges under refinement");
  return g.value;
}

}  // namespace

double antiderivative_psi(const Nonlinearity& phi, double s) {
  if (s == 0.0) return 0.0;
  if (phi.model()) return capped_model_psi(*phi.model(), phi.cap_radius(), s);
  return graded_from(phi, 0.0, s);
}

double value_mean(const Nonlinearity& phi, double s0, double s1) {
  if (s0 == s1) return phi(s0);
  if (s0 > s1) std::swap(s0, s1);
  const double w = s1 - s0;
  const bool touches = s0 <= 0.0 && s1 >= 0.0;
  const double near = std::min(std::abs(s0), std::abs(s1));
  const double far = std::max(std::abs(s0), std::abs(s1));
  auto f = [&](double t) { return phi(t); };
  if (!touches && far <= 2.0 * near) return quad::gauss8(f, s0, s1) / w;
  if (phi.model()) {
    return (capped_model_psi(*phi.model(), phi.cap_radius(), s1) -
            capped_model_psi(*phi.model(), phi.cap_radius(), s0)) / w;
  }
  if (touches) {
    double total = 0.0;
    if (s1 > 0.0) total += graded_from(phi, 0.0, s1);
    if (s0 < 0.0) total += graded_from(phi, 0.0, s0) * -1.0;
    return total / w;
  }
  // one-signed interval: grade toward the end nearer the origin
  return s0 > 0 ? graded_from(phi, s0, s1) / w : -graded_from(phi, s1, s0) / w;
}

Nonlinearity cap_at(const Nonlinearity& phi, double M) {
  if (!(M > 0)) throw Error(Errc::InvalidArgument, "cap radius must be positive");
  Nonlinearity::Traits t = phi.traits();
  t.tail_bound_radius = std::min(t.tail_bound_radius, M);
  t.infimum.reset();
  const auto& m = phi.model();
  const double radius = phi.cap_radius() ? std::min(*phi.cap_radius(), M) : M;
  if (m && m->smooth_is_constant() && m->c >= 0) {
    const double a0 = m->smooth.empty() ? 0.0 : m->smooth[0];
    t.infimum = a0 + m->c * std::min(std::pow(radius, -m->gamma_left), std::pow(radius, -m->gamma_right));
  }
  Nonlinearity out([base = phi, M](double s) { return base(std::clamp(s, -M, M)); }, t);
  out.model_ = m;
  out.cap_ = radius;
  return out;
}

Nonlinearity reflect(const Nonlinearity& phi) {
  Nonlinearity::Traits t = phi.traits();
  std::swap(t.singular_at_zero, t.minus_infinity_at_zero);
  t.infimum.reset();
  t.monotone_nonincreasing_on_positive = false;
  Nonlinearity out([base = phi](double s) { return -base(-s); }, t);
  if (const auto& m = phi.model()) {
    PowerModel r{-m->c, m->gamma_right, m->gamma_left, m->smooth};
    for (std::size_t k = 0; k < r.smooth.size(); ++k) r.smooth[k] *= (k % 2 == 0) ? -1.0 : 1.0;
    bool smooth_nonincreasing = true;
    for (std::size_t k = 1; k < r.smooth.size(); ++k)
      if (r.smooth[k] > 0) smooth_nonincreasing = false;
    out.traits_.monotone_nonincreasing_on_positive = r.c >= 0 && smooth_nonincreasing;
    if (!phi.cap_radius() && r.smooth_is_constant() && r.c >= 0)
      out.traits_.infimum = r.smooth.empty() ? 0.0 : r.smooth[0];
    out.model_ = std::move(r);
  }
  out.cap_ = phi.cap_radius();
  return out;
}

Nonlinearity truncate_at(const Nonlinearity& phi, double n) {
  Nonlinearity::Traits t = phi.traits();
  t.singular_at_zero = false;
  t.minus_infinity_at_zero = false;
  t.bound = t.bound ? std::min(*t.bound, n) : n;
  if (t.infimum) t.infimum = std::max(*t.infimum, -n);
  return Nonlinearity([base = phi, n](double s) { return std::clamp(base(s), -n, n); }, t);
}

namespace {

Nonlinearity homographic(const Nonlinearity& phi, double n) {
  Nonlinearity::Traits t = phi.traits();
  t.singular_at_zero = false;
  t.minus_infinity_at_zero = false;
  t.bound = n;
  if (t.infimum) t.infimum = *t.infimum / (1.0 + std::abs(*t.infimum) / n);
  return Nonlinearity(
      [base = phi, n](double s) {
        const double v = base(s);
        if (std::isinf(v)) return v > 0 ? n : -n;
        return v / (1.0 + std::abs(v) / n);
      },
      t);
}

// Standard bump supported on [-1, 1], unnormalized.
double bump(double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

Nonlinearity mollified(const Nonlinearity& phi, double n) {
  constexpr int panels = 16;
  double norm = 0.0;
  for (int p = 0; p < panels; ++p) norm += quad::gauss8(bump, -1.0 + 2.0 * p / panels, -1.0 + 2.0 * (p + 1) / panels);
  const double eps = 1.0 / n;
  Nonlinearity::Traits t = phi.traits();
  t.infimum.reset();
  return Nonlinearity(
      [base = phi, eps, norm](double s) {
        double acc = 0.0;
        for (int p = 0; p < panels; ++p)
          acc += quad::gauss8([&](double r) { return base(s - eps * r) * bump(r); },
                              -1.0 + 2.0 * p / panels, -1.0 + 2.0 * (p + 1) / panels);
        return acc / norm;
      },
      t);
}

}  // namespace

Nonlinearity make_approx(const ApproxFamily& family, double n) {
  if (!(n > 0)) throw Error(Errc::InvalidArgument, "approximation index must be positive");
  const Nonlinearity& base = family.base;
  switch (family.kind) {
    case ApproxKind::Truncation: return truncate_at(base, n);
    case ApproxKind::Homographic: return homographic(base, n);
    case ApproxKind::Identity: return base;
    case ApproxKind::ExponentDrift: {
      if (!base.model()) throw Error(Errc::UnsupportedKind, "exponent drift needs a power model base");
      PowerModel m = *base.model();
      m.c += family.drift_c / n;
      m.gamma_left += family.drift_gamma / n;
      m.gamma_right += family.drift_gamma / n;
      if (m.smooth.empty()) m.smooth.push_back(0.0);
      m.smooth[0] += family.drift_smooth / n;
      Nonlinearity out = Nonlinearity::power(std::move(m));
      return base.cap_radius() ? cap_at(out, *base.cap_radius()) : out;
    }
    case ApproxKind::Mollified:
      if (base.traits().singular_at_zero || base.traits().minus_infinity_at_zero)
        throw Error(Errc::UnsupportedKind, "convolution needs a continuous base");
      return mollified(base, n);
    case ApproxKind::Custom:
      if (!family.custom) throw Error(Errc::UnsupportedKind, "custom family without generator");
      return family.custom(n);
  }
  throw Error(Errc::UnsupportedKind, "unknown approximation kind");
}

InfimumResult infimum_of(const Nonlinearity& phi, double S) {
  if (phi.traits().infimum) return {*phi.traits().infimum, 0.0};
  if (phi.traits().minus_infinity_at_zero) throw Error(Errc::InfiniteInfimum, "phi(0) = -inf");
  const auto cap = phi.cap_radius();
  const double r = cap ? std::min(*cap, S) : S;
  constexpr int per_octave = 8, octaves = 60;
  double inner = kInf, outer = kInf, next = kInf;
  for (int side = -1; side <= 1; side += 2) {
    for (int k = 0; k <= per_octave * octaves; ++k) {
      const double s = side * r * std::exp2(-static_cast<double>(k) / per_octave);
      const double v = phi(s);
      if (std::isnan(v) || v == -kInf) throw Error(Errc::InfiniteInfimum, "phi unbounded below on the scan");
      if (k <= per_octave) outer = std::min(outer, v);
      else if (k <= 2 * per_octave) next = std::min(next, v);
      else inner = std::min(inner, v);
    }
  }
  if (!cap && outer < std::min(next, inner) && outer < 0 && std::abs(outer) > 2.0 * std::abs(next))
    throw Error(Errc::InfiniteInfimum, "phi keeps falling at the scan radius");
  return {std::min({inner, next, outer}), r};
}

ZetaTransform::ZetaTransform(Nonlinearity phi_plus, double infimum, double scan_radius, double s_max)
    : phi_plus_(std::move(phi_plus)), inf_(infimum), scan_radius_(scan_radius), s_max_(s_max) {
  if (!(s_max > 0)) throw Error(Errc::InvalidArgument, "s_max must be positive");
  constexpr int sub = 4;
  t_.push_back(0.0);
  for (int k = quad::kGradedLevels; k >= 1; --k) {
    const double a = s_max * std::exp2(-k), b = 2.0 * a;
    if (k == quad::kGradedLevels) t_.push_back(a);
    for (int i = 1; i <= sub; ++i) t_.push_back(a + (b - a) * i / sub);
  }
  t_.back() = s_max;
  auto inv = [this](double r) { return 1.0 / phi_plus_(r); };
  z_.assign(t_.size(), 0.0);
  for (std::size_t i = 1; i < t_.size(); ++i) z_[i] = z_[i - 1] + quad::gauss8(inv, t_[i - 1], t_[i]);
}

double ZetaTransform::zeta(double s) const {
  if (s < 0) throw Error(Errc::InvalidArgument, "zeta is defined on s >= 0");
  auto inv = [this](double r) { return 1.0 / phi_plus_(r); };
  if (s <= s_max_) {
    const auto i = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), s) - t_.begin()) - 1;
    if (t_[i] == s) return z_[i];
    return z_[i] + quad::gauss8(inv, t_[i], s);
  }
  const double panel = 0.25 * s_max_;
  double acc = z_.back(), a = s_max_;
  while (a < s) {
    const double b = std::min(s, a + panel);
    acc += quad::gauss8(inv, a, b);
    a = b;
  }
  return acc;
}

double ZetaTransform::zeta_inv(double z) const {
  if (z < 0 || z > z_.back()) throw Error(Errc::RangeExceeded, "value outside the tabulated zeta range");
  auto i = static_cast<std::size_t>(std::upper_bound(z_.begin(), z_.end(), z) - z_.begin());
  if (i == z_.size()) return t_.back();
  --i;
  double lo = t_[i], hi = t_[i + 1], zlo = z_[i], zhi = z_[i + 1];
  for (int it = 0; it < 200; ++it) {
    if (zhi - zlo <= 1e-12 && hi - lo <= 1e-10 * hi) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double zm = zeta(mid);
    if (zm <= z) {
      lo = mid;
      zlo = zm;
    } else {
      hi = mid;
      zhi = zm;
    }
  }
  if (zhi == zlo) return lo;
  return lo + (hi - lo) * (z - zlo) / (zhi - zlo);
}

ZetaTransform plus_shift_and_zeta(const Nonlinearity& phi, double s_max) {
  const InfimumResult inf = infimum_of(phi, 1e6);
  Nonlinearity::Traits t = phi.traits();
  t.infimum = 1.0;
  if (t.bound) t.bound = *t.bound - inf.value + 1.0;
  const double shift = 1.0 - inf.value;
  Nonlinearity plus([phi, shift](double s) { return phi(s) + shift; }, t);
  return ZetaTransform(std::move(plus), inf.value, inf.scan_radius, s_max);
}

std::string to_string(Integrability c) {
  switch (c) {
    case Integrability::BothIntegrable: return "BothIntegrable";
    case Integrability::RightOnly: return "RightOnly";
    case Integrability::LeftOnly: return "LeftOnly";
    case Integrability::NoneIntegrable: return "NoneIntegrable";
  }
  return "?";
}

namespace {

// true when int_0^{side*delta} phi converges, false when it diverges
bool side_integrable(const Nonlinearity& phi, double side, double delta) {
  auto g = quad::graded_toward([&](double t) { return std::abs(phi(side * t)); }, 0.0, delta);
  if (g.divergent) return false;
  double total = 0.0;
  for (double p : g.panels) total += p;
  const std::size_t n = g.panels.size();
  bool settled = true;
  for (std::size_t i = n - 4; i < n; ++i)
    if (std::abs(g.panels[i]) > 0.01 * std::abs(total)) settled = false;
  if (!settled) throw Error(Errc::Inconclusive, "graded partial integrals neither settle nor diverge");
  return true;
}

}  // namespace

Integrability integrability_class(const Nonlinearity& phi) {
  bool right, left;
  if (const auto& m = phi.model(); m && m->c != 0.0) {
    right = m->gamma_right < 1.0;
    left = m->gamma_left < 1.0;
  } else {
    const double delta = phi.traits().tail_bound_radius;
    right = side_integrable(phi, 1.0, delta);
    left = side_integrable(phi, -1.0, delta);
  }
  if (right && left) return Integrability::BothIntegrable;
  if (right) return Integrability::RightOnly;
  if (left) return Integrability::LeftOnly;
  return Integrability::NoneIntegrable;
}

ReasonableReport check_reasonable_family(const ApproxFamily& family, double eta, double R, double tol) {
  if (!(eta > 0 && eta < R)) throw Error(Errc::InvalidArgument, "need 0 < eta < R");
  ReasonableReport rep;
  const Nonlinearity& phi = family.base;
  constexpr int samples = 256;
  auto sup_dist = [&](const Nonlinearity& m, double side) {
    double d = 0.0;
    for (int i = 0; i <= samples; ++i) {
      const double s = side * eta * std::pow(R / eta, static_cast<double>(i) / samples);
      d = std::max(d, std::abs(m(s) - phi(s)));
    }
    return d;
  };
  auto min_near = [&](const Nonlinearity& m, double e) {
    double lo = m(0.0);
    for (int side = -1; side <= 1; side += 2)
      for (int k = 0; k <= 8 * quad::kGradedLevels; ++k) lo = std::min(lo, m(side * e * std::exp2(-k / 8.0)));
    return lo;
  };
  for (double n : family.index_schedule) {
    const Nonlinearity m = make_approx(family, n);
    rep.n.push_back(n);
    rep.dist_right.push_back(sup_dist(m, 1.0));
    rep.dist_left.push_back(sup_dist(m, -1.0));
    rep.min_near_zero.push_back(min_near(m, eta));
  }
  const std::size_t k = rep.n.size();
  if (k == 0) return rep;
  std::vector<double> d(k);
  for (std::size_t i = 0; i < k; ++i) d[i] = std::max(rep.dist_right[i], rep.dist_left[i]);
  bool trend = d.back() <= tol;
  for (std::size_t i = k / 2; i + 1 < k; ++i) trend = trend && d[i + 1] <= d[i];
  rep.uniform_convergence = trend;

  if (phi.singular_at_zero()) {
    const Nonlinearity last = make_approx(family, rep.n.back());
    for (int l = 0; l < 4; ++l) rep.shrinking_eta_min.push_back(min_near(last, eta * std::pow(4.0, -l)));
    bool grows = true;
    for (int l = 0; l + 1 < 4; ++l) grows = grows && rep.shrinking_eta_min[l + 1] > rep.shrinking_eta_min[l];
    for (std::size_t i = k / 2; i + 1 < k; ++i) grows = grows && rep.min_near_zero[i + 1] >= rep.min_near_zero[i];
    rep.divergence_at_zero = grows;
  } else {
    rep.divergence_at_zero = true;
  }
  rep.pass = rep.uniform_convergence && rep.divergence_at_zero;
  return rep;
}

double sup_outside(const Nonlinearity& phi, double R) {
  if (!(R > 0)) throw Error(Errc::InvalidArgument, "R must be positive");
  const auto& m = phi.model();
  const auto cap = phi.cap_radius();
  if (m && m->smooth_is_constant() && m->c >= 0) {
    const double r = R;
    const double a0 = m->smooth.empty() ? 0.0 : m->smooth[0];
    double best = 0.0;
    for (double g : {m->gamma_left, m->gamma_right}) {
      const double edge = m->c * std::pow(r, -g) + a0;
      best = std::max({best, std::abs(edge), std::abs(a0)});
    }
    if (cap && R >= *cap) return std::max(std::abs(phi(*cap)), std::abs(phi(-*cap)));
    return best;
  }
  const double top = cap ? std::max(*cap, R) : 1e6;
  double best = 0.0;
  for (int side = -1; side <= 1; side += 2) {
    for (int k = 0; k <= 8 * 64; ++k) {
      const double s = R * std::pow(top / R, k / 512.0);
      best = std::max(best, std::abs(phi(side * s)));
      if (s >= top) break;
    }
  }
  return best;
}

double l1_norm_on(const Nonlinearity& phi, double R) {
  const auto& m = phi.model();
  if (m && m->smooth.empty() && m->c > 0 && (!phi.cap_radius() || *phi.cap_radius() >= R)) {
    double total = 0.0;
    for (double g : {m->gamma_left, m->gamma_right}) {
      if (g >= 1.0) throw Error(Errc::NonIntegrableSingularity, "power exponent >= 1 at the origin");
      total += m->c * std::pow(R, 1.0 - g) / (1.0 - g);
    }
    return total;
  }
  double total = 0.0;
  for (double side : {-1.0, 1.0}) {
    auto g = quad::graded_toward([&](double t) { return std::abs(phi(side * t)); }, 0.0, R);
    if (g.divergent) throw Error(Errc::NonIntegrableSingularity, "graded quadrature diverges under refinement");
    total += g.value;
  }
  return total;
}

}  // namespace sfl
