#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sfl/grid.hpp"
#include "sfl/nonlinearity.hpp"
#include "sfl/ode.hpp"
#include "sfl/verify.hpp"

namespace sfl {

enum class BvpMethod { ShootScan, NewtonFD };

struct BvpSolution {
  GridFn u;
  double c = 0.0;
  WeakSolutionReport report;
  BvpMethod method = BvpMethod::ShootScan;
  double cross_check_distance = -1.0;  // sup distance to the NewtonFD solve, when run
};

struct BvpOptions {
  int scan_samples = 64;
  bool cross_check = true;
  int ladder_depth = 8;
  // Finite volume stepping matches the cell means used by derive_datum and newton_fd;
  // with singular-like phi_n the endpoint map is nearly flat in c, so any bias moves the root.
  IvpScheme scheme = IvpScheme::FiniteVolume;
  // Continuation hints (e.g. c of the previous ladder member). Each adds samples at
  // hint +- 1e-3 (1+|hint|) 2^k, since root pairs can hide between equispaced samples
  // where v_c(L) is nearly flat.
  std::vector<double> c_hints;
};

struct BvpRun {
  std::vector<BvpSolution> solutions;  // empty means no sign change in the scanned bracket
  double bracket = 0.0;                // c scanned over [-bracket, bracket]
  std::vector<std::pair<double, double>> scan;  // (c, v_c(L))
  std::string note;
};

// a v' = phi(v) + g + c, v(0) = 0
IvpSolution v_of_c(const GridFn& a, const GridFn& g, const Nonlinearity& phi, double c, const Grid& grid,
                   const IvpOptions& opt = {});

BvpRun solve_regularized_bvp(const GridFn& a, const GridFn& g, const Nonlinearity& phi_n, const Grid& grid,
                             const BvpOptions& opt = {});

// Damped Newton on a (u_{j+1}-u_j)/dx = mean of phi over [u_j, u_{j+1}] + g_j + c with u(0) = u(L) = 0.
BvpSolution newton_fd(const GridFn& a, const GridFn& g, const Nonlinearity& phi_n, const GridFn& u0, double c0);

struct CStarOptions {
  double kappa = 1.0;   // tau_L = kappa sqrt(dx)
  double width = 1e-3;
  int ladder_depth = 8;
};

struct CStarResult {
  std::optional<double> c_star;  // empty: NoSolution
  double lo = 0.0, hi = 0.0;     // final bracket
  double tau = 0.0;
  double upper_bound = 0.0;      // (1/sqrt L)(beta/alpha + 1)|g|_2 - inf phi
  int evaluations = 0;
  std::vector<std::pair<double, double>> trace;  // (c, v_c(L))
  std::string note;
};

CStarResult find_c_star(const GridFn& a, const GridFn& g, const Nonlinearity& phi, const Grid& grid,
                        std::pair<double, double> bracket, const CStarOptions& opt = {});

double c_star_upper_bound(const GridFn& a, const GridFn& g, const Nonlinearity& phi);

struct FamilySample {
  double c;
  GridFn u;
  double endpoint;
};

struct FamilyRecord {
  std::optional<double> c_star;
  std::vector<FamilySample> samples;
  bool ordering_verdict = false;
  std::vector<std::pair<double, double>> vanishing_limit_trend;  // (c, sup norm)
  std::vector<double> continuity_moduli;  // sup distance between adjacent samples
  bool trend_verdict = false;             // sup norms non-increasing as c decreases
};

FamilyRecord sweep_family(const GridFn& a, const GridFn& g, const Nonlinearity& phi, const Grid& grid,
                          const std::vector<double>& c_list, std::optional<double> c_star = std::nullopt,
                          double kappa = 1.0);

struct LimitSample {
  double n;
  double sup;      // |u_n|_inf
  double c;        // c_n
  double min_phi;  // min_x phi_n(u_n)
  double phi_l2;   // |phi_n(u_n)|_2
};

LimitSample limit_sample(double n, const GridFn& u, double c, const Nonlinearity& phi_n);

enum class LimitKind { ZeroLimit, WeakLimit };
std::string to_string(LimitKind k);

struct LimitClassification {
  LimitKind kind;
  double slope_sup = 0, slope_c = 0, slope_min_phi = 0, slope_phi_l2 = 0;
  bool sup_to_zero = false, c_unbounded = false, min_phi_unbounded = false;
  bool c_stable = false, phi_l2_stable = false;
};

// Throws Inconclusive, with the raw trends in the message, when neither pattern is clean.
LimitClassification classify_limit(const std::vector<LimitSample>& run);

}  // namespace sfl
