#include "slipstokes/time_stepping.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <set>

#include "slipstokes/errors.hpp"

namespace slipstokes {

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(states.size());
  for (const auto& s : states) t.push_back(s.t);
  return t;
}

State initial_state(const Problem& problem) {
  const Vector v0 = problem.scenario.v0 == Scenario::InitialVelocity::Lifting
                        ? problem.lifting.G0
                        : Vector::Zero(problem.spaces->num_velocity_full());
  return initial_state(problem, v0, false);
}

State initial_state(const Problem& problem, const Vector& v0_full, bool check) {
  const FunctionSpacePair& s = *problem.spaces;
  const DiscreteOperators& ops = *problem.ops;
  if (v0_full.size() != s.num_velocity_full()) throw UsageError("initial_state: v0 has the wrong length");
  const Vector w = v0_full - problem.lifting.G0;
  if (check) {
    const double scale = 1.0 + std::sqrt(std::max(0.0, v0_full.dot((ops.mass_full + ops.h1_full) * v0_full)));
    const double div = (ops.divergence_full * v0_full).norm();
    if (div > 1e-8 * scale) throw DataError("v0 is not divergence-free (||B v0|| = " + std::to_string(div) + ")");
    double mismatch = 0.0;
    for (int i = 0; i < w.size(); ++i)
      if (s.free_of_full[i] < 0) mismatch = std::max(mismatch, std::abs(w(i)));
    if (mismatch > 1e-10 * scale) throw DataError("v0 does not match the boundary data g");
  }
  State st;
  st.step = 0;
  st.t = 0.0;
  st.v_tilde = s.restrict_to_free(w);
  st.p = Vector::Zero(s.num_pressure());
  return st;
}

TimeStepper::TimeStepper(const Problem& problem, double dt) : problem_(&problem), dt_(dt) {
  if (!(dt > 0.0)) throw UsageError("TimeStepper: dt must be positive");
  const DiscreteOperators& ops = *problem.ops;
  const SparseMatrix V = (1.0 / dt) * ops.mass + ops.viscous;
  solver_ = std::make_shared<SaddleSolver>(V, ops.divergence, ops.pressure_mean);

  const SparseMatrix& T = ops.boundary_trace;
  std::set<int> cols;
  for (int k = 0; k < T.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(T, k); it; ++it) cols.insert(static_cast<int>(it.col()));
  boundary_dofs_.assign(cols.begin(), cols.end());
  const int nb = static_cast<int>(boundary_dofs_.size());
  std::vector<Triplet> t;
  for (int j = 0; j < nb; ++j) t.emplace_back(boundary_dofs_[j], j, 1.0);
  SparseMatrix Pb(T.cols(), nb);
  Pb.setFromTriplets(t.begin(), t.end());
  trace_b_ = T * Pb;

  const int k = problem.tangential();
  weights_k_.resize(T.rows());
  for (int q = 0; q < problem.num_quad(); ++q) weights_k_.segment(q * k, k).setConstant(ops.boundary_mass(q));

  Matrix E = Matrix::Zero(solver_->size(), nb);
  for (int j = 0; j < nb; ++j) E(boundary_dofs_[j], j) = 1.0;
  Z_ = nb > 0 ? solver_->solve(E) : Matrix(solver_->size(), 0);
  C_.resize(nb, nb);
  for (int j = 0; j < nb; ++j) C_.row(j) = Z_.row(boundary_dofs_[j]);
}

Vector TimeStepper::boundary_slip(const Vector& v_tilde) const { return problem_->ops->boundary_trace * v_tilde; }

Vector TimeStepper::saddle_rhs(const State& prev, double t_next) const {
  const DiscreteOperators& ops = *problem_->ops;
  Vector r = Vector::Zero(solver_->size());
  r.head(solver_->velocity_size()) = (1.0 / dt_) * (ops.mass * prev.v_tilde) + problem_->rhs_free(t_next);
  return r;
}

Vector TimeStepper::friction_load(const Vector& y, const Vector& ell, double eps) const {
  const Vector phi = friction_force(trace_b_ * y, ell, problem_->tangential(), eps);
  return trace_b_.transpose() * weights_k_.cwiseProduct(phi);
}

double TimeStepper::step_residual(const State& prev, const State& next, const Vector& ell_next, double eps) const {
  const int nv = solver_->velocity_size(), np = solver_->pressure_size();
  Vector x(solver_->size());
  x.head(nv) = next.v_tilde;
  x.segment(nv, np) = next.p;
  x(nv + np) = 0.0;
  Vector r = solver_->matrix() * x - saddle_rhs(prev, next.t);
  const Vector phi = friction_force(boundary_slip(next.v_tilde), ell_next, problem_->tangential(), eps);
  r.head(nv) += problem_->ops->boundary_trace.transpose() * weights_k_.cwiseProduct(phi);
  return r.norm();
}

State TimeStepper::step(const State& prev, const Vector& ell_next, const StepOptions& opts, const Vector* guess) const {
  const int nv = solver_->velocity_size(), np = solver_->pressure_size();
  const int nb = static_cast<int>(boundary_dofs_.size());
  if (ell_next.size() != problem_->num_quad()) throw UsageError("step: threshold layout mismatch");
  if (prev.v_tilde.size() != nv) throw UsageError("step: state layout mismatch");
  const double t_next = (prev.step + 1) * dt_;
  const Vector r0 = saddle_rhs(prev, t_next);
  const double tol = opts.newton_tol * (1.0 + r0.norm());
  const Vector X0 = solver_->solve(r0);
  Vector y0(nb), y(nb);
  const Vector& g0 = guess ? *guess : prev.v_tilde;
  for (int j = 0; j < nb; ++j) {
    y0(j) = X0(boundary_dofs_[j]);
    y(j) = g0(boundary_dofs_[j]);
  }

  State next;
  next.step = prev.step + 1;
  next.t = t_next;
  Vector X = X0;
  const SparseMatrix& K = solver_->matrix();
  for (double eps : opts.eps_schedule) {
    auto reduced = [&](const Vector& yy, Vector& g) {
      g = friction_load(yy, ell_next, eps);
      return Vector(yy - y0 + C_ * g);
    };
    Vector g;
    Vector R = reduced(y, g);
    bool converged = false;
    for (int it = 0; it <= opts.max_iter; ++it) {
      X = X0 - Z_ * g;
      Vector yx(nb);
      for (int j = 0; j < nb; ++j) yx(j) = X(boundary_dofs_[j]);
      const Vector gx = friction_load(yx, ell_next, eps);
      Vector full = K * X - r0;
      for (int j = 0; j < nb; ++j) full(boundary_dofs_[j]) += gx(j);
      const double res = full.norm();
      next.newton.history.push_back(res);
      if (res <= tol) {
        converged = true;
        break;
      }
      if (it == opts.max_iter) break;
      ++next.newton.iterations;
      const Vector slip = trace_b_ * y;
      const SparseMatrix J = friction_jacobian(slip, ell_next, problem_->tangential(), eps);
      const SparseMatrix WJ = weights_k_.asDiagonal() * J;
      const Matrix Jg = Matrix(trace_b_.transpose() * WJ * trace_b_);
      const Matrix jac = Matrix::Identity(nb, nb) + C_ * Jg;
      const Vector delta = jac.partialPivLu().solve(-R);
      double lambda = 1.0;
      Vector yn, gn, Rn;
      const double rnorm = R.norm();
      for (int ls = 0; ls < 30; ++ls) {
        yn = y + lambda * delta;
        Rn = reduced(yn, gn);
        if (Rn.norm() <= rnorm) break;
        lambda *= 0.5;
      }
      if (Rn.norm() > rnorm) {  // round-off level: take the full step
        yn = y + delta;
        Rn = reduced(yn, gn);
      }
      y = yn;
      g = gn;
      R = Rn;
    }
    if (!converged) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "Newton did not converge at step %d (eps=%.3e, residual %.3e, tol %.3e)",
                    next.step, eps, next.newton.history.back(), tol);
      throw StepError(buf, next.step, next.newton.history);
    }
  }
  next.newton.residual = next.newton.history.back();
  next.v_tilde = X.head(nv);
  next.p = X.segment(nv, np);
  return next;
}

StepOptions step_options(const Scenario& scenario) {
  StepOptions o;
  o.eps_schedule = scenario.discretization.eps_schedule;
  o.newton_tol = scenario.discretization.newton_tol;
  o.max_iter = scenario.discretization.newton_max_iter;
  return o;
}

double kinetic_energy(const Problem& problem, const Vector& v_tilde) {
  return 0.5 * v_tilde.dot(problem.ops->mass * v_tilde);
}

Trajectory run_tresca(const Problem& problem, const TimeStepper& stepper, const ThresholdField& ell,
                      const RunOptions& options) {
  const int last = options.last_step < 0 ? problem.scenario.num_steps() : options.last_step;
  if (ell.num_points() != problem.num_quad()) throw UsageError("run_tresca: threshold layout mismatch");
  if (ell.num_times() < last + 1) throw UsageError("run_tresca: threshold does not cover the time grid");
  Trajectory traj;
  traj.dt = stepper.dt();
  traj.states.reserve(last + 1);
  int first = 0;
  if (options.prefix) {
    first = options.first_step;
    if (first < 0 || first >= static_cast<int>(options.prefix->states.size()) || first > last)
      throw UsageError("run_tresca: prefix does not reach the first step");
    traj.states.assign(options.prefix->states.begin(), options.prefix->states.begin() + first + 1);
  } else {
    traj.states.push_back(initial_state(problem));
  }
  for (int n = first; n < last; ++n) {
    State next = stepper.step(traj.states[n], ell.slice(n + 1), options.step);
    if (options.log) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "step=%d t=%.17g newton_iters=%d resid=%.6e energy=%.17g\n", next.step, next.t,
                    next.newton.iterations, next.newton.residual, kinetic_energy(problem, next.v_tilde));
      *options.log << buf;
    }
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Trajectory run_tresca(const Problem& problem, const ThresholdField& ell, const RunOptions& options) {
  const TimeStepper stepper(problem, problem.scenario.dt);
  return run_tresca(problem, stepper, ell, options);
}

ThresholdField tresca_threshold(const Problem& problem) {
  const Scenario& sc = problem.scenario;
  if (!sc.tresca_ell) throw ConfigurationError("scenario has no [friction.tresca] threshold");
  const ScalarFunction ell = *sc.tresca_ell;
  return make_threshold(uniform_time_grid(sc.dt, sc.num_steps()), problem.num_quad(), [&](double t) { return ell(t); });
}

SteadyResult run_to_steady(const Problem& problem, double dt, double ell, double tol, int max_steps, std::ostream* log) {
  const TimeStepper stepper(problem, dt);
  const StepOptions opts = step_options(problem.scenario);
  const Vector ellv = Vector::Constant(problem.num_quad(), ell);
  SteadyResult r;
  r.state = initial_state(problem);
  for (int n = 0; n < max_steps; ++n) {
    State next = stepper.step(r.state, ellv, opts);
    const Vector dv = next.v_tilde - r.state.v_tilde;
    r.rate = std::sqrt(std::max(0.0, dv.dot(problem.ops->mass * dv))) / dt;
    r.state = std::move(next);
    r.steps = n + 1;
    if (log) *log << "steady step=" << r.steps << " rate=" << r.rate << "\n";
    if (r.rate < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

}  // namespace slipstokes
