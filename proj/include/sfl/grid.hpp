#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace sfl {

class Grid {
public:
  Grid(double L, int N);

  double length() const { return L_; }
  int cells() const { return N_; }
  double dx() const { return L_ / N_; }
  double node(int j) const { return j * L_ / N_; }
  double midpoint(int j) const { return (j + 0.5) * L_ / N_; }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  double L_;
  int N_;
};

// Node samples, plus optional cell-midpoint samples for data that was sampled there.
// Cell values fall back to the average of the two adjacent nodes.
class GridFn {
public:
  GridFn(Grid g, std::vector<double> nodes);
  GridFn(Grid g, std::vector<double> nodes, std::vector<double> mids);

  static GridFn sample(const Grid& g, const std::function<double(double)>& f);
  static GridFn constant(const Grid& g, double c);
  // Cell samples projected to nodes: interior nodes average the adjacent cells,
  // end nodes copy their only cell. The cell samples are kept.
  static GridFn from_cells(const Grid& g, std::vector<double> cells);

  const Grid& grid() const { return grid_; }
  std::span<const double> nodes() const { return nodes_; }
  double operator[](int j) const { return nodes_[j]; }
  bool has_mids() const { return !mids_.empty(); }
  double cell(int j) const { return mids_.empty() ? 0.5 * (nodes_[j] + nodes_[j + 1]) : mids_[j]; }
  std::vector<double> cell_values() const;
  double slope(int j) const { return (nodes_[j + 1] - nodes_[j]) / grid_.dx(); }

  GridFn shifted(double c) const;
  GridFn scaled(double k) const;
  GridFn negated() const { return scaled(-1.0); }

  bool zero_left = false;
  bool zero_right = false;

private:
  Grid grid_;
  std::vector<double> nodes_;
  std::vector<double> mids_;
};

struct Norms {
  double l2 = 0;
  double h1_semi = 0;
  double sup = 0;
  double holder_half = 0;
};

// Cell slopes (u_{j+1}-u_j)/dx, node-projected.
GridFn differentiate(const GridFn& f);

// Midpoint rule on cell samples.
double integrate(const Grid& g, std::span<const double> mids);
// Midpoint rule on f at cell centres; graded mode uses 2-point Gauss per cell and
// geometric panels inside the two end cells.
double integrate(const Grid& g, const std::function<double(double)>& f, bool graded);

// Nodal primitive of the cell values, starting from 0.
GridFn cumulative_integral(const GridFn& f);

Norms norms(const GridFn& u);
double l2_norm(const GridFn& f);
double sup_norm(const GridFn& f);
double sup_distance(const GridFn& a, const GridFn& b);

GridFn resample(const GridFn& u, const Grid& target);

void write_profile_csv(std::ostream& os, const GridFn& f);

}  // namespace sfl
