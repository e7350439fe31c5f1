#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sfl/grid.hpp"
#include "sfl/nonlinearity.hpp"

namespace sfl {

struct MembershipReport {
  bool member = false;
  bool zero_endpoints = false;
  double phi_l2 = 0.0;                // sqrt of the finest partial integral of phi(u)^2
  std::vector<double> refinements;    // partial integrals at graded depths 36..40
  std::string diagnostic;
};

MembershipReport membership_U(const Nonlinearity& phi, const GridFn& u);

// c = -(int phi(u)/a + int g/a) / int 1/a, cell by cell
double recover_constant_c(const GridFn& a, const GridFn& u, const GridFn& g, const Nonlinearity& phi);

struct WeakSolutionReport {
  double residual_sup = 0.0;  // sup of the integrated residual of a u' - phi(u) - g - c
  double recovered_c = 0.0;
  double energy_gap = 0.0;
  double energy = 0.0;        // int a u'^2
  double apriori_ratio_h1 = 0.0;
  double apriori_ratio_sup = 0.0;
  double chain_rule_gap = 0.0;
  bool membership = false;
  double tol = 0.0;
  bool residual_pass = false;
  bool energy_pass = false;
  bool ratios_pass = false;
  bool verdict = false;
};

// tol = 1e-3 at dx = 1/4096, scaling as sqrt(dx)
double default_tolerance(const Grid& g);

WeakSolutionReport weak_solution_report(const GridFn& a, const GridFn& u, const GridFn& g, const Nonlinearity& phi,
                                        std::optional<double> tol = std::nullopt);

enum class SignClass { Unrestricted, NonnegativeOnly, NonpositiveOnly, Empty };
std::string to_string(SignClass s);

struct NonexistenceFlags {
  bool bounded_below = false;
  SignClass sign_class = SignClass::Unrestricted;
  bool u_empty = false;
  std::vector<double> minima;  // min of g over dyadic coarsenings, coarsest first
};

NonexistenceFlags nonexistence_flags(const GridFn& g, const Nonlinearity& phi);

struct ConeCheck {
  bool ok = false;   // false means Fail: no node qualifies
  double delta = 0.0;
  int nodes = 0;
};

// Largest delta with w >= k (x - x0) to the right of x0 and w <= k (x - x0) to the left.
ConeCheck forbidden_cone_check(const GridFn& w, int node, double k);

}  // namespace sfl
