#include "sfl/quadrature.hpp"

namespace sfl::quad {

bool diverges(std::span<const double> panels, int window, double rel) {
  if (static_cast<int>(panels.size()) <= window) return false;
  double total = 0.0;
  const std::size_t first = panels.size() - window;
  for (std::size_t i = 0; i < first; ++i) total += panels[i];
  for (std::size_t i = first; i < panels.size(); ++i) {
    if (!(std::abs(panels[i]) > rel * std::abs(total))) return false;
    total += panels[i];
  }
  return true;
}

double geometric_tail(std::span<const double> panels) {
  if (panels.size() < 2) return 0.0;
  const double last = panels.back(), prev = panels[panels.size() - 2];
  if (prev == 0.0 || last == 0.0) return 0.0;
  const double q = last / prev;
  if (!(q > 0.0 && q < 1.0)) return 0.0;
  return last * q / (1.0 - q);
}

}  // namespace sfl::quad
