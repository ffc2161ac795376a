#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "slipstokes/time_stepping.hpp"

namespace slipstokes {

/// sigma = -p Id + 2 mu D(v), stored per cell at its vertices (exactly
/// linear per cell for the P2/P1 pair).
struct StressField {
  int dim = 2;
  std::vector<std::array<Tensor, 4>> vertex_values;

  Tensor at(int cell, const Barycentric& lambda) const;
  /// Row d of sigma at every (cell, vertex): index ((cell (d+1) + k) d + j).
  Vector normal_row_values() const;
};

/// Stress of v = full velocity coefficients and vertex pressure p.
StressField compute_stress(const FunctionSpacePair& spaces, const Vector& v_full, const Vector& p, double mu);
/// Stress of a state: v = v_tilde + G0 zeta(t).
StressField compute_stress(const Problem& problem, const State& state);

/// div sigma = (v^{n+1} - v^n) / dt - f + G0 zeta' at t_{n+1}, as a P2
/// field in the full numbering. Throws UsageError unless `next` follows `prev`.
Vector momentum_residual_div_stress(const Problem& problem, const State& prev, const State& next, double dt);

/// Radial bump c exp(-1 / (1 - |r / rho|^2)) centred at (x', 0), normalized
/// to unit integral over the hyperplane {x_d = 0}.
class Mollifier {
 public:
  Mollifier(int dim, double rho);

  int dim() const { return dim_; }
  double rho() const { return rho_; }
  double normalization() const { return c_; }
  double value(const Point& x, const Point& centre) const;
  Point gradient(const Point& x, const Point& centre) const;

 private:
  int dim_;
  double rho_;
  double c_;
};

/// Default radius: two mean edge lengths.
double default_mollifier_radius(const Mesh& mesh);

/// Integral of int_{-1}^{1} exp(-1 / (1 - t^2)) dt.
double bump_integral_1d();

/// Quadrature over the cells of `mesh` meeting the mollifier support around
/// `centre`, refined so sub-cells are at most rho / 8 across.
struct SupportQuadrature {
  std::vector<Point> points;
  std::vector<double> weights;
  std::vector<int> cells;
  std::vector<Barycentric> lambdas;
};
SupportQuadrature support_quadrature(const Mesh& mesh, const Mollifier& f, const Point& centre);

/// R(row)(x') = int div(row) f_{x'} + int row . grad f_{x'} for analytic
/// fields: `row(x)` is sigma~ and `div(x)` its divergence.
double regularized_normal_trace(const Mesh& mesh, const std::function<Point(const Point&)>& row,
                                const std::function<double(const Point&)>& div, const Mollifier& f,
                                const Point& x_prime);

/// Finite-element version at one Gamma0 point, evaluating the stress field
/// and the d-th component of the P2 divergence field directly.
double regularized_normal_trace(const FunctionSpacePair& spaces, const StressField& stress, const Vector& div_full,
                                const Mollifier& f, const Point& x_prime);

/// C_R = max(||f||_{L2(Omega)}, ||grad f||_{L2(Omega)}) at x'.
double trace_continuity_constant(const Mesh& mesh, const Mollifier& f, const Point& x_prime);

/// R at every Gamma0 quadrature point as two precomputed linear maps.
class TraceOperator {
 public:
  TraceOperator(const FunctionSpacePair& spaces, const Mollifier& f);

  const Mollifier& mollifier() const { return f_; }
  /// Values of R(sigma^3) at the Gamma0 quadrature points.
  Vector apply(const StressField& stress, const Vector& div_full) const;
  /// max over points of the continuity constant.
  double continuity_constant() const { return c_r_; }

 private:
  const FunctionSpacePair* spaces_;
  Mollifier f_;
  SparseMatrix stress_map_;  // nq x (cells (d+1) d)
  SparseMatrix div_map_;     // nq x nodes
  double c_r_ = 0.0;
};

/// Fills trajectory.boundary_history with |R(sigma^3)| per state. Record 0
/// copies record 1 (no backward difference exists at t = 0).
void compute_trace_history(const Problem& problem, const TraceOperator& R, Trajectory& trajectory, int from_step = 0);

/// CSV: step,time,quad_point_id,x1[,x2],value.
void write_trace_history_csv(std::ostream& out, const Trajectory& trajectory, const Gamma0Quadrature& quad);
std::vector<Vector> read_trace_history_csv(std::istream& in, const Gamma0Quadrature& quad);

}  // namespace slipstokes
