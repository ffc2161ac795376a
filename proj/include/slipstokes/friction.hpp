#pragma once

#include <iosfwd>
#include <vector>

#include "slipstokes/spaces.hpp"
#include "slipstokes/types.hpp"

namespace slipstokes {

/// Friction bound ell at the Gamma0 quadrature points for every node of a
/// time grid. values(n, q) is ell(x'_q, t_n).
struct ThresholdField {
  std::vector<double> time_grid;
  Matrix values;

  int num_times() const { return static_cast<int>(time_grid.size()); }
  int num_points() const { return static_cast<int>(values.cols()); }
  Vector slice(int n) const { return values.row(n).transpose(); }
  /// Throws UsageError / DataError on a bad grid or negative values.
  void validate() const;
};

/// Uniform grid t_n = n dt, n = 0..steps.
std::vector<double> uniform_time_grid(double dt, int steps);

/// ell(x', t) = fn(t) sampled at every quadrature point and grid time.
template <class F>
ThresholdField make_threshold(const std::vector<double>& grid, int points, F&& fn) {
  ThresholdField f;
  f.time_grid = grid;
  f.values.resize(static_cast<int>(grid.size()), points);
  for (int n = 0; n < static_cast<int>(grid.size()); ++n) f.values.row(n).setConstant(fn(grid[n]));
  return f;
}

/// CSV: time,quad_point_id,x1[,x2],value.
void write_threshold_csv(std::ostream& out, const ThresholdField& ell, const Gamma0Quadrature& quad);
ThresholdField read_threshold_csv(std::istream& in, const Gamma0Quadrature& quad);

/// Tangential fields on Gamma0 are stored point-major: entry q * k + c with
/// k = d - 1 components per quadrature point.

/// sum_q w_q ell_q sqrt(eps^2 + |v_q|^2); eps = 0 gives the exact functional.
double friction_energy(const Vector& vt, const Vector& ell, const Vector& weights, int k, double eps);

/// Pointwise ell v / sqrt(eps^2 + |v|^2). Requires eps > 0.
Vector friction_force(const Vector& vt, const Vector& ell, int k, double eps);

/// Block-diagonal derivative of friction_force: per point
/// ell (I / r - v v^T / r^3), r = sqrt(eps^2 + |v|^2).
SparseMatrix friction_jacobian(const Vector& vt, const Vector& ell, int k, double eps);
Matrix friction_jacobian_block(const Vector& v, double ell, double eps);

struct Complementarity {
  double infeasibility = 0.0;  // max(0, max_q |sigma_t| - ell)
  double alignment = 0.0;      // sum_q w_q |sigma_t . slip + ell |slip||
};

Complementarity complementarity_residual(const Vector& sigma_t, const Vector& slip, const Vector& ell,
                                         const Vector& weights, int k);

}  // namespace slipstokes
