#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace sfl::quad {

// 8-point Gauss-Legendre on [-1, 1]
inline constexpr std::array<double, 4> kGlX = {0.1834346424956498, 0.5255324099163290,
                                               0.7966664774136267, 0.9602898564975363};
inline constexpr std::array<double, 4> kGlW = {0.3626837833783620, 0.3137066458778873,
                                               0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss8(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < kGlX.size(); ++i)
    s += kGlW[i] * (f(c - h * kGlX[i]) + f(c + h * kGlX[i]));
  return s * h;
}

inline constexpr int kGradedLevels = 40;

struct Graded {
  double value = 0.0;           // partial sum plus geometric tail estimate
  std::vector<double> panels;   // contribution of each level, outermost first
  bool divergent = false;
};

// Successive refinements each adding more than `rel` of the running total.
bool diverges(std::span<const double> panels, int window = 4, double rel = 0.01);

// Tail estimate from the ratio of the last two panel contributions.
double geometric_tail(std::span<const double> panels);

// Integrate over (a, b] with geometric panels accumulating toward a (ratio 1/2).
// The endpoint a is never evaluated.
template <class F>
Graded graded_toward(F&& f, double a, double b, int levels = kGradedLevels) {
  Graded g;
  g.panels.reserve(levels);
  const double w = b - a;
  double outer = 1.0;
  double sum = 0.0;
  for (int k = 0; k < levels; ++k) {
    const double inner = 0.5 * outer;
    const double p = gauss8(f, a + w * inner, a + w * outer);
    g.panels.push_back(p);
    sum += p;
    outer = inner;
  }
  g.divergent = diverges(g.panels);
  g.value = g.divergent ? sum : sum + geometric_tail(g.panels);
  return g;
}

// Graded toward both ends of [a, b], split at the midpoint.
template <class F>
double graded_both(F&& f, double a, double b, int levels = kGradedLevels) {
  const double m = 0.5 * (a + b);
  auto flipped = [&](double t) { return f(a + b - t); };
  return graded_toward(f, a, m, levels).value + graded_toward(flipped, a, m, levels).value;
}

// Adaptive 8-point Gauss-Legendre with interval halving.
template <class F>
double adaptive(F&& f, double a, double b, double tol, int depth = 30) {
  const double whole = gauss8(f, a, b);
  const double m = 0.5 * (a + b);
  const double left = gauss8(f, a, m), right = gauss8(f, m, b);
  const double diff = left + right - whole;
  // never ask for more than roundoff allows, or the tree grows without bound
  const double floor = 64 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
  if (depth <= 0 || std::abs(diff) <= std::max(tol, floor) || !std::isfinite(diff)) return left + right;
  return adaptive(f, a, m, 0.5 * tol, depth - 1) + adaptive(f, m, b, 0.5 * tol, depth - 1);
}

}  // namespace sfl::quad
