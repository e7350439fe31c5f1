#pragma once

#include <string>
#include <vector>

#include "sfl/bvp.hpp"
#include "sfl/grid.hpp"
#include "sfl/nonlinearity.hpp"
#include "sfl/ode.hpp"

namespace sfl {

// A zero of the profile. Near it, w ~ K_left (x0 - x)^lambda_left on the left and
// K_right (x - x0)^lambda_right on the right.
struct SeamZero {
  double x = 0.0;
  double K_left = 1.0, lambda_left = 0.75;
  double K_right = 1.0, lambda_right = 0.75;
};

enum class Connector { Hermite, Product };

struct SeamSpec {
  std::vector<SeamZero> zeros;  // first at 0, last at L; left data of the first and right data of the last unused
  double delta = 0.05;          // splice radius (Hermite)
  Connector connector = Connector::Hermite;
  double gamma_left = 1.0 / 3;  // exponents of the target model, checked against the lambda window
  double gamma_right = 1.0 / 3;

  // K x^lambda (L - x)^lambda
  static SeamSpec bump(double L, double K, double lambda, double gamma);
};

GridFn power_seam_solution(const SeamSpec& spec, const Grid& grid);

// Cell values a w' - mean(phi(w)) - c, node-projected.
GridFn derive_datum(const GridFn& a, const GridFn& w, const Nonlinearity& phi, double c);

struct TailFix {
  GridFn g_hat;
  GridFn u_hat;
  double delta = 0.0;        // splice radius actually used (snapped to the grid, possibly shrunk)
  double splice_value = 0.0; // v(L - delta)
  double zeta_K = 0.0;
  int shrinks = 0;
};

TailFix tail_fix(const GridFn& a, const GridFn& g, const Nonlinearity& phi, double delta, const Grid& grid,
                 int shrink_budget = 8);

// g_n = phi(u) - phi_n(u) + g, cell by cell
GridFn stability_datum(const GridFn& g, const Nonlinearity& phi, const Nonlinearity& phi_n, const GridFn& u);

struct InstabilityEntry {
  int n = 0;            // position in g_bar / eps
  int k_star = -1;      // first family position with |v|_2 <= eps_n; -1 when the budget ran out
  int k_bar = -1;       // repaired, strictly increasing
  double v_l2 = 0.0;    // at k_star (or at the last tried k)
  double c = 0.0;
  std::string note;     // BudgetExceeded report
};

struct InstabilitySchedule {
  std::vector<InstabilityEntry> entries;
  std::vector<LimitSample> diagonal;  // (g_bar_n, phi_{k_bar(n)}) solutions, indexed by the family value
};

// For each n, the smallest k with |v_n^k|_2 <= eps_n for the data (phi_k, g_bar_n), taking the
// lowest-c root of each regularized problem. k indexes phi_family.index_schedule.
InstabilitySchedule instability_schedule(const std::vector<GridFn>& g_bar, const ApproxFamily& phi_family,
                                         const std::vector<double>& eps, const GridFn& a, const Grid& grid,
                                         const BvpOptions& opt = {});

}  // namespace sfl
