#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "slipstokes/friction.hpp"
#include "slipstokes/problem.hpp"
#include "slipstokes/saddle.hpp"

namespace slipstokes {

struct NewtonStats {
  int iterations = 0;           // summed over the eps stages
  double residual = 0.0;        // final true residual
  std::vector<double> history;  // true residual after each iterate, all stages
};

struct State {
  int step = 0;
  double t = 0.0;
  Vector v_tilde;  // free velocity dofs of v - G0 zeta
  Vector p;        // pressure at the vertices (zero mean)
  NewtonStats newton;
};

struct Trajectory {
  double dt = 0.0;
  std::string scenario_hash;
  std::vector<State> states;
  /// |R(sigma^3)| at the Gamma0 quadrature points, one record per state
  /// (empty until filled by the stress recovery).
  std::vector<Vector> boundary_history;

  int num_steps() const { return static_cast<int>(states.size()) - 1; }
  std::vector<double> times() const;
};

/// Initial state v_tilde = v0 - G0 for the scenario's v0 choice.
State initial_state(const Problem& problem);
/// Initial state from explicit v0 coefficients (full numbering). With
/// `check` set, a discrete divergence above 1e-8 (1 + ||v0||_{H1}) or a
/// trace mismatch with G0 raises DataError.
State initial_state(const Problem& problem, const Vector& v0_full, bool check);

struct StepOptions {
  std::vector<double> eps_schedule{1e-4};
  double newton_tol = 1e-10;
  int max_iter = 50;
};

/// Backward Euler step of the regularized problem for one step size. The
/// saddle matrix [M/dt + A, B^T, 0; B, 0, m; 0, m^T, 0] is factored once;
/// the friction term only touches the tangential Gamma0 dofs, so Newton
/// runs on those dofs with the interior eliminated through the factored
/// matrix (Woodbury form) and the full residual is checked on exit.
class TimeStepper {
 public:
  TimeStepper(const Problem& problem, double dt);

  double dt() const { return dt_; }
  const Problem& problem() const { return *problem_; }

  /// Advances `prev` to t + dt with threshold `ell_next` at t + dt.
  /// `guess` (free velocity dofs) seeds Newton; default: prev.v_tilde.
  State step(const State& prev, const Vector& ell_next, const StepOptions& opts, const Vector* guess = nullptr) const;

  /// Tangential trace of v_tilde at the Gamma0 quadrature points.
  Vector boundary_slip(const Vector& v_tilde) const;
  /// Full residual of the step equation for a candidate (v, p).
  double step_residual(const State& prev, const State& next, const Vector& ell_next, double eps) const;

 private:
  Vector saddle_rhs(const State& prev, double t_next) const;
  Vector friction_load(const Vector& y, const Vector& ell, double eps) const;  // boundary dof space

  const Problem* problem_;
  double dt_;
  std::shared_ptr<SaddleSolver> solver_;
  std::vector<int> boundary_dofs_;  // free dof ids touched by the trace
  SparseMatrix trace_b_;            // (nq k) x nb
  Vector weights_k_;                // quadrature weight per trace row
  Matrix Z_;                        // K^{-1} P_b, saddle size x nb
  Matrix C_;                        // P_b^T Z
};

struct RunOptions {
  StepOptions step;
  std::ostream* log = nullptr;  // progress lines when set
  /// States [0, first_step] are copied from `prefix` and stepping resumes there.
  const Trajectory* prefix = nullptr;
  int first_step = 0;
  int last_step = -1;  // -1: scenario.num_steps()
};

StepOptions step_options(const Scenario& scenario);

/// Marches the Tresca problem with threshold `ell` over the time grid.
Trajectory run_tresca(const Problem& problem, const TimeStepper& stepper, const ThresholdField& ell,
                      const RunOptions& options);
Trajectory run_tresca(const Problem& problem, const ThresholdField& ell, const RunOptions& options);

/// ell from the scenario's Tresca section on the scenario grid.
ThresholdField tresca_threshold(const Problem& problem);

/// Discrete kinetic energy 1/2 v^T M v of a free vector.
double kinetic_energy(const Problem& problem, const Vector& v_tilde);

struct SteadyResult {
  State state;
  int steps = 0;
  double rate = 0.0;  // ||v^{n+1} - v^n||_M / dt at exit
  bool converged = false;
};

/// Marches with a time-independent threshold value until
/// ||v^{n+1} - v^n||_M / dt < tol.
SteadyResult run_to_steady(const Problem& problem, double dt, double ell, double tol, int max_steps,
                           std::ostream* log = nullptr);

}  // namespace slipstokes
