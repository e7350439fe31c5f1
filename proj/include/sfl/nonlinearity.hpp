#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sfl {

// phi(s) = c/|s|^gamma_side + smooth(s); c < 0 gives the reflected convention phi(0) = -inf.
struct PowerModel {
  double c = 1.0;
  double gamma_left = 0.5;
  double gamma_right = 0.5;
  std::vector<double> smooth;  // polynomial coefficients, ascending powers

  static PowerModel symmetric(double c, double gamma, std::vector<double> smooth = {}) {
    return {c, gamma, gamma, std::move(smooth)};
  }
  double eval(double s) const;
  double smooth_at(double s) const;
  double smooth_antiderivative(double s) const;
  bool smooth_is_constant() const;
};

class Nonlinearity {
public:
  using Fn = std::function<double(double)>;

  struct Traits {
    bool singular_at_zero = false;           // phi(0) = +inf
    bool minus_infinity_at_zero = false;     // phi(0) = -inf (reflected convention)
    bool monotone_nonincreasing_on_positive = false;
    double tail_bound_radius = 1.0;
    std::optional<double> bound;             // sup |phi|, when finite and known
    std::optional<double> infimum;           // inf phi, when known in closed form
  };

  Nonlinearity(Fn f, Traits t);

  static Nonlinearity power(PowerModel m);
  static Nonlinearity constant(double k);
  static Nonlinearity tabulated(std::vector<double> s, std::vector<double> v);

  double operator()(double s) const { return f_(s); }
  const Traits& traits() const { return traits_; }
  bool singular_at_zero() const { return traits_.singular_at_zero; }
  const std::optional<PowerModel>& model() const { return model_; }
  std::optional<double> cap_radius() const { return cap_; }

private:
  friend Nonlinearity cap_at(const Nonlinearity&, double);
  friend Nonlinearity reflect(const Nonlinearity&);

  Fn f_;
  Traits traits_;
  std::optional<PowerModel> model_;  // exact description of the uncapped base
  std::optional<double> cap_;
};

double eval_phi(const Nonlinearity& phi, double s);

// psi(s) = int_0^s phi, closed form for power models, graded quadrature otherwise.
double antiderivative_psi(const Nonlinearity& phi, double s);

// Mean of phi over the value interval [s0, s1]: the cell average of phi(u) when u is
// linear on the cell and runs from s0 to s1.
double value_mean(const Nonlinearity& phi, double s0, double s1);

Nonlinearity cap_at(const Nonlinearity& phi, double M);
Nonlinearity reflect(const Nonlinearity& phi);
Nonlinearity truncate_at(const Nonlinearity& phi, double n);

enum class ApproxKind { Truncation, Homographic, Identity, ExponentDrift, Mollified, Custom };

struct ApproxFamily {
  ApproxKind kind = ApproxKind::Truncation;
  Nonlinearity base;
  std::vector<double> index_schedule;
  // ExponentDrift: c_n = c + drift_c/n, gamma_n = gamma + drift_gamma/n,
  // smooth_n = smooth + drift_smooth/n (constant offset)
  double drift_c = 0.0;
  double drift_gamma = 0.0;
  double drift_smooth = 0.0;
  std::function<Nonlinearity(double)> custom;  // Custom kind: member generator
};

Nonlinearity make_approx(const ApproxFamily& family, double n);

class ZetaTransform {
public:
  ZetaTransform(Nonlinearity phi_plus, double infimum, double scan_radius, double s_max);

  const Nonlinearity& phi_plus() const { return phi_plus_; }
  double infimum() const { return inf_; }
  double scan_radius() const { return scan_radius_; }
  double s_max() const { return s_max_; }
  double zeta_max() const { return z_.back(); }
  double zeta(double s) const;
  double zeta_inv(double z) const;

private:
  Nonlinearity phi_plus_;
  double inf_;
  double scan_radius_;
  double s_max_;
  std::vector<double> t_;  // breakpoints on [0, s_max]
  std::vector<double> z_;  // zeta at the breakpoints
};

// Infimum over R: analytic for power models, otherwise a geometric scan on [-S, S].
struct InfimumResult {
  double value;
  double scan_radius;  // 0 when analytic
};
InfimumResult infimum_of(const Nonlinearity& phi, double S = 1e6);

ZetaTransform plus_shift_and_zeta(const Nonlinearity& phi, double s_max);

enum class Integrability { BothIntegrable, RightOnly, LeftOnly, NoneIntegrable };
std::string to_string(Integrability c);
Integrability integrability_class(const Nonlinearity& phi);

struct ReasonableReport {
  std::vector<double> n;
  std::vector<double> dist_right;   // sup over [eta, R]
  std::vector<double> dist_left;    // sup over [-R, -eta]
  std::vector<double> min_near_zero;  // min over [-eta, eta] per n
  std::vector<double> shrinking_eta_min;  // last member, eta/4^l, l = 0..3
  bool uniform_convergence = false;
  bool divergence_at_zero = false;
  bool pass = false;
};
ReasonableReport check_reasonable_family(const ApproxFamily& family, double eta, double R, double tol);

// sup of |phi| outside [-R, R] and the L1 norm on (-R, R).
double sup_outside(const Nonlinearity& phi, double R);
double l1_norm_on(const Nonlinearity& phi, double R);

}  // namespace sfl
