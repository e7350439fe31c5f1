#pragma once

#include <utility>
#include <vector>

#include "sfl/grid.hpp"
#include "sfl/nonlinearity.hpp"

namespace sfl {

struct IvpSolution {
  GridFn v;
  GridFn phi_of_v;  // cell values a*dv/dx - h, node-projected
  std::vector<std::pair<int, double>> ladder_trace;  // (level k, sup distance from level k to k+1)
  bool positivity_certificate = false;
  double phi_l2_estimate = 0.0;
  int levels_solved = 0;
};

// Path: exact/implicit-midpoint stepping of the ODE through the regularization ladder.
// FiniteVolume: a (v_{j+1} - v_j)/dx = mean of phi over [v_j, v_{j+1}] + h_j, solved cell by cell
// with the unregularized phi; it satisfies the discrete weak form exactly.
enum class IvpScheme { Path, FiniteVolume };

struct IvpOptions {
  IvpScheme scheme = IvpScheme::Path;
  int ladder_depth = 8;
  double alpha = 0.0;          // coercivity floor; a must also be > 0
  bool deepest_only = false;   // skip the ladder and solve only at level ladder_depth
  double cell_tol = 1e-10;
};

// a v' = phi(v) + h on the grid, v(0) = 0. The coefficients are taken cell-wise.
IvpSolution solve_ivp(const GridFn& a, const GridFn& h, const Nonlinearity& phi, const Grid& grid,
                      int ladder_depth = 8, double alpha = 0.0);
IvpSolution solve_ivp(const GridFn& a, const GridFn& h, const Nonlinearity& phi, const Grid& grid,
                      const IvpOptions& opt);

// w(x) = zeta^{-1}(K x)
GridFn pure_zeta_solve(double K, const ZetaTransform& zeta, const Grid& grid);

double apriori_bound_C_R(const Nonlinearity& phi, const GridFn& h, double alpha, double L, double R);

// sqrt(|v|_2^2 + |v'|_2^2) on the grid
double h1_norm(const GridFn& v);

}  // namespace sfl
