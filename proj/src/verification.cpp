#include "slipstokes/verification.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <Eigen/SparseCholesky>

#include "slipstokes/coulomb.hpp"
#include "slipstokes/quadrature.hpp"

namespace slipstokes {

CouetteOracle couette_oracle(double mu, double h, double s, double ell) {
  CouetteOracle o;
  if (mu * std::abs(s) / h <= ell) {
    o.regime = CouetteOracle::Regime::Stick;
    o.wall_speed = s;
    o.shear_stress = mu * std::abs(s) / h;
  } else {
    o.regime = CouetteOracle::Regime::Slip;
    o.wall_speed = (s > 0 ? 1.0 : -1.0) * ell * h / mu;
    o.shear_stress = ell;
  }
  return o;
}

namespace {

// Gauss rule over [0, T] composed on the time grid.
template <class F>
double time_integral(F&& fn, double T, int steps) {
  if (T <= 0.0 || steps <= 0) return 0.0;
  const QuadratureRule g = gauss_legendre_unit(4);
  const double h = T / steps;
  double s = 0.0;
  for (int n = 0; n < steps; ++n)
    for (std::size_t q = 0; q < g.size(); ++q) s += h * g.weights[q] * fn((n + g.points[q](0)) * h);
  return s;
}

double force_l2_squared(const Problem& P, double t) {
  if (P.scenario.force_is_zero()) return 0.0;
  const Mesh& mesh = *P.mesh;
  const int d = mesh.dim;
  const QuadratureRule rule = simplex_rule(d, 4);
  double s = 0.0;
  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
    const CellGeometry g = cell_geometry(mesh, c);
    const double jac = g.volume * (d == 2 ? 2.0 : 6.0);
    for (std::size_t q = 0; q < rule.size(); ++q)
      s += rule.weights[q] * jac * P.scenario.body_force(g.to_physical(rule.points[q]), t).squaredNorm();
  }
  return s;
}

double trapezoid(const std::vector<double>& v, double dt) {
  if (v.size() < 2) return 0.0;
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
  return s * dt;
}

}  // namespace

EnergyBudget energy_budget(const Problem& P, const Trajectory& traj, double alpha) {
  const Scenario& sc = P.scenario;
  const DiscreteOperators& ops = *P.ops;
  EnergyBudget e;
  e.alpha = alpha;
  const double T = traj.states.back().t;
  const int N = traj.num_steps();
  const Vector& v0 = traj.states.front().v_tilde;
  e.terms[0] = 0.5 * v0.dot(ops.mass * v0);
  e.terms[1] = 0.5 * time_integral([&](double t) { return force_l2_squared(P, t); }, T, N);
  e.terms[2] = 2.0 * sc.mu * sc.mu / alpha * P.lifting.norm_h1 * P.lifting.norm_h1 *
               time_integral([&](double t) { return sc.zeta(t) * sc.zeta(t); }, T, N);
  e.terms[3] = 0.5 * P.lifting.norm_l2 * P.lifting.norm_l2 *
               time_integral([&](double t) { return sc.zeta.derivative(t) * sc.zeta.derivative(t); }, T, N);
  e.C1_prime = e.terms[0] + e.terms[1] + e.terms[2] + e.terms[3];

  const SparseMatrix H = ops.mass + ops.h1;
  for (int n = 0; n <= N; ++n) {
    const State& s = traj.states[n];
    const double m2 = s.v_tilde.dot(ops.mass * s.v_tilde);
    e.times.push_back(s.t);
    e.measured.push_back(m2);
    e.bound.push_back(2.0 * e.C1_prime * std::exp(2.0 * s.t));
    e.dissipation.push_back(s.v_tilde.dot(ops.viscous * s.v_tilde));
    if (m2 > e.bound.back()) e.bound_holds = false;
    if (n == 0) continue;
    const State& prev = traj.states[n - 1];
    const double dt = s.t - prev.t;
    const double h1 = s.v_tilde.dot(H * s.v_tilde);
    const double lhs = 0.5 * m2 - 0.5 * e.measured[n - 1] + dt * alpha * h1;
    const double rhs = dt * P.rhs_free(s.t).dot(s.v_tilde);
    e.step_lhs.push_back(lhs);
    e.step_rhs.push_back(rhs);
    const double scale = 0.5 * m2 + 0.5 * e.measured[n - 1] + dt * alpha * h1 + std::abs(rhs);
    const double excess = scale > 0.0 ? (lhs - rhs) / scale : 0.0;
    e.worst_step_excess = n == 1 ? excess : std::max(e.worst_step_excess, excess);
    if (excess > 1e-10) e.steps_hold = false;
  }
  return e;
}

int centre_quad_point(const Problem& P) {
  const auto& g = P.spaces->gamma0;
  const auto& om = P.scenario.domain.omega;
  Point c = Point::Zero();
  for (int k = 0; k < P.dim() - 1; ++k) c(k) = 0.5 * (om[k][0] + om[k][1]);
  int best = 0;
  for (int q = 1; q < g.size(); ++q)
    if ((g.points[q] - c).norm() < (g.points[best] - c).norm()) best = q;
  return best;
}

BoundaryFields boundary_fields(const Problem& P, const State& state) {
  const FunctionSpacePair& s = *P.spaces;
  const int d = s.dim, k = d - 1;
  const auto& g = s.gamma0;
  const Vector v = P.full_velocity(state.v_tilde, state.t);
  const double wall = P.scenario.wall.s * P.scenario.zeta(state.t);
  BoundaryFields b;
  b.traction.resize(g.size() * k);
  b.slip.resize(g.size() * k);
  b.speed.resize(g.size() * k);
  for (int q = 0; q < g.size(); ++q) {
    const Point u = s.evaluate_velocity(v, g.cells[q], g.lambdas[q]);
    const Eigen::Matrix3d du = s.velocity_gradient(v, g.cells[q], g.lambdas[q]);
    for (int j = 0; j < k; ++j) {
      // (sigma n)_j with n = -e_d; the pressure does not enter tangential rows.
      b.traction(q * k + j) = -P.scenario.mu * (du(j, d - 1) + du(d - 1, j));
      b.speed(q * k + j) = u(j);
      b.slip(q * k + j) = u(j) - (j == 0 ? wall : 0.0);
    }
  }
  return b;
}

WallMeasurement measure_wall(const Problem& P, const State& state) {
  const int q = centre_quad_point(P);
  const int k = P.tangential();
  const BoundaryFields b = boundary_fields(P, state);
  WallMeasurement m;
  m.wall_speed = b.speed(q * k);
  m.shear_stress = b.traction.segment(q * k, k).norm();
  return m;
}

Complementarity state_complementarity(const Problem& P, const State& state, const Vector& ell) {
  const BoundaryFields b = boundary_fields(P, state);
  return complementarity_residual(b.traction, b.slip, ell, P.ops->boundary_mass, P.tangential());
}

double friction_gap(const Problem& P, const Trajectory& traj, const ThresholdField& ell, double eps) {
  std::vector<double> per_step;
  const int k = P.tangential();
  for (int n = 0; n <= traj.num_steps(); ++n) {
    const Vector vt = P.ops->boundary_trace * traj.states[n].v_tilde;
    const Vector l = ell.slice(n);
    per_step.push_back(friction_energy(vt, l, P.ops->boundary_mass, k, eps) -
                       friction_energy(vt, l, P.ops->boundary_mass, k, 0.0));
  }
  return trapezoid(per_step, traj.dt);
}

double threshold_integral(const Problem& P, const ThresholdField& ell) {
  std::vector<double> per_step;
  for (int n = 0; n < ell.num_times(); ++n) per_step.push_back(P.ops->boundary_mass.dot(ell.slice(n)));
  const double dt = ell.num_times() > 1 ? ell.time_grid[1] - ell.time_grid[0] : 0.0;
  return trapezoid(per_step, dt);
}

std::vector<EpsStudyRow> eps_convergence_study(const Problem& P, const ThresholdField& ell,
                                               const std::vector<double>& eps_list) {
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw UsageError("eps_convergence_study: eps list must be strictly decreasing");
  const TimeStepper stepper(P, P.scenario.dt);
  const double ell_int = threshold_integral(P, ell);
  std::vector<EpsStudyRow> rows;
  for (double eps : eps_list) {
    RunOptions opts;
    opts.step = step_options(P.scenario);
    std::vector<double> sched;
    for (double e : P.scenario.discretization.eps_schedule)
      if (e > eps) sched.push_back(e);
    sched.push_back(eps);
    opts.step.eps_schedule = sched;
    Trajectory traj;
    try {
      traj = run_tresca(P, stepper, ell, opts);
    } catch (const StepError& e) {
      throw StepError(std::string(e.what()) + " [eps study, eps=" + format_double(eps) + "]", e.step(),
                      e.residual_history());
    }
    EpsStudyRow r;
    r.eps = eps;
    r.gap = friction_gap(P, traj, ell, eps);
    r.bound = eps * ell_int;
    const State& last = traj.states.back();
    const Vector vt = P.ops->boundary_trace * last.v_tilde;
    const int k = P.tangential();
    for (int q = 0; q < P.num_quad(); ++q)
      if (vt.segment(q * k, k).norm() < 10.0 * eps) r.stick_measure += P.ops->boundary_mass(q);
    const Complementarity c = state_complementarity(P, last, ell.slice(traj.num_steps()));
    r.alignment = c.alignment;
    r.infeasibility = c.infeasibility;
    r.order = rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                           : std::log(rows.back().gap / r.gap) / std::log(rows.back().eps / eps);
    rows.push_back(r);
  }
  return rows;
}

DtStudy dt_convergence_study(const Problem& P, const std::vector<double>& dts, double reference_dt) {
  auto terminal = [&](double dt) {
    Scenario sc = P.scenario;
    sc.dt = dt;
    const Problem Q = setup_problem(sc, P.ops);
    const Trajectory traj = run_tresca(Q, tresca_threshold(Q), RunOptions{step_options(sc)});
    return traj.states.back().v_tilde;
  };
  DtStudy s;
  s.reference_dt = reference_dt;
  const Vector ref = 2.0 * terminal(reference_dt) - terminal(2.0 * reference_dt);
  for (double dt : dts) {
    const Vector e = terminal(dt) - ref;
    s.dts.push_back(dt);
    s.errors.push_back(std::sqrt(std::max(0.0, e.dot(P.ops->mass * e))));
  }
  for (std::size_t i = 1; i < s.errors.size(); ++i)
    s.orders.push_back(std::log(s.errors[i - 1] / s.errors[i]) / std::log(s.dts[i - 1] / s.dts[i]));
  return s;
}

double trace_norm_estimate(const Problem& P) {
  const DiscreteOperators& ops = *P.ops;
  const SparseMatrix H = ops.mass + ops.h1;
  Eigen::SimplicialLDLT<SparseMatrix> solver(H);
  if (solver.info() != Eigen::Success) throw SolverError("trace_norm_estimate: H1 matrix not factorizable");
  Vector wk(ops.boundary_trace.rows());
  const int k = P.tangential();
  for (int q = 0; q < P.num_quad(); ++q) wk.segment(q * k, k).setConstant(ops.boundary_mass(q));
  Vector x = Vector::Ones(H.rows());
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    const Vector y = solver.solve(ops.boundary_trace.transpose() * wk.cwiseProduct(ops.boundary_trace * x));
    const double num = x.dot(H * y);
    const double den = x.dot(H * x);
    const double next = num / den;
    x = y / std::sqrt(std::max(1e-300, y.dot(H * y)));
    if (it > 0 && std::abs(next - lambda) <= 1e-12 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

void VerificationReport::add(std::string section, std::string name, double value, double tolerance, bool pass,
                             std::string detail) {
  entries.push_back({std::move(section), std::move(name), value, tolerance,
                     pass ? ReportEntry::Status::Pass : ReportEntry::Status::Fail, std::move(detail)});
}

void VerificationReport::info(std::string section, std::string name, double value, std::string detail) {
  entries.push_back({std::move(section), std::move(name), value, 0.0, ReportEntry::Status::Info, std::move(detail)});
}

bool VerificationReport::all_pass() const {
  for (const auto& e : entries)
    if (e.status == ReportEntry::Status::Fail) return false;
  return true;
}

std::string VerificationReport::to_text() const {
  std::ostringstream out;
  std::string current;
  for (const auto& e : entries) {
    if (e.section != current) {
      if (!current.empty()) out << "\n";
      out << "[" << e.section << "]\n";
      current = e.section;
    }
    const char* tok = e.status == ReportEntry::Status::Pass ? "PASS" : e.status == ReportEntry::Status::Fail ? "FAIL" : "INFO";
    out << tok << " " << e.name << " value=" << format_double(e.value);
    if (e.status != ReportEntry::Status::Info) out << " tolerance=" << format_double(e.tolerance);
    if (!e.detail.empty()) out << " " << e.detail;
    out << "\n";
  }
  out << "\n" << (all_pass() ? "OVERALL PASS" : "OVERALL FAIL") << "\n";
  return out.str();
}

namespace {

bool is_couette(const Scenario& sc) {
  return sc.dim() == 2 && sc.height.kind() == "constant" && sc.force_is_zero() && sc.zeta.kind() == "constant" &&
         sc.tresca_ell && sc.tresca_ell->kind() == "constant" && !sc.coulomb &&
         sc.wall.lateral == WallData::Lateral::Linear;
}

}  // namespace

VerifyOutcome verify_scenario(const Problem& P) {
  const Scenario& sc = P.scenario;
  VerifyOutcome out;
  VerificationReport& rep = out.report;
  const double alpha = korn_coercivity_estimate(*P.ops);
  rep.info("constants", "korn_alpha", alpha);
  rep.info("constants", "lifting_norm_h1", P.lifting.norm_h1);
  rep.info("constants", "trace_norm_c_gamma0", trace_norm_estimate(P));

  if (sc.coulomb) {
    CoulombResult r = solve_coulomb(P, CoulombConfig{});
    const double bound = 2.0 * sc.coulomb->tol * (1.0 + r.threshold_norm);
    rep.add("coulomb", "self_consistency", r.self_consistency, bound, r.self_consistency <= bound);
    double worst = 0.0;
    for (const auto& rec : r.trace.records)
      if (!std::isnan(rec.ratio)) worst = std::max(worst, rec.ratio);
    rep.info("coulomb", "max_contraction_ratio", worst);
    rep.info("coulomb", "windows", static_cast<double>(r.schedule.tau_steps.size() - 1));
    out.trajectory = std::move(r.trajectory);
    out.threshold = std::move(r.threshold);
  } else {
    out.threshold = tresca_threshold(P);
    out.trajectory = run_tresca(P, out.threshold, RunOptions{step_options(sc)});
  }
  const Trajectory& traj = out.trajectory;

  out.energy = energy_budget(P, traj, alpha);
  double worst_ratio = 0.0;
  for (std::size_t n = 0; n < out.energy.measured.size(); ++n)
    if (out.energy.bound[n] > 0.0) worst_ratio = std::max(worst_ratio, out.energy.measured[n] / out.energy.bound[n]);
  rep.info("energy", "C1_prime", out.energy.C1_prime);
  rep.add("energy", "gronwall_bound_max_ratio", worst_ratio, 1.0, out.energy.bound_holds,
          "max_n ||v^n||^2 / (2 C1' exp(2 t_n))");
  rep.add("energy", "step_inequality_worst_excess", out.energy.worst_step_excess, 1e-10, out.energy.steps_hold);

  double div_excess = 0.0, div_max = 0.0;
  bool div_ok = true;
  for (const State& s : traj.states) {
    const double r = (P.ops->divergence * s.v_tilde).norm();
    div_max = std::max(div_max, r);
    if (r > 1e-10 * s.v_tilde.norm()) div_ok = false;
    if (s.v_tilde.norm() > 0) div_excess = std::max(div_excess, r / s.v_tilde.norm());
  }
  rep.add("divergence", "max_relative_residual", div_excess, 1e-10, div_ok);
  rep.info("divergence", "max_residual", div_max);

  const double eps = sc.discretization.eps_schedule.back();
  const double gap = friction_gap(P, traj, out.threshold, eps);
  const double gap_bound = eps * threshold_integral(P, out.threshold);
  rep.add("regularization", "friction_gap", gap, gap_bound, gap >= 0.0 && gap <= gap_bound, "eps=" + format_double(eps));

  const int N = traj.num_steps();
  const Complementarity c = state_complementarity(P, traj.states.back(), out.threshold.slice(N));
  rep.info("complementarity", "terminal_infeasibility", c.infeasibility);
  rep.info("complementarity", "terminal_alignment", c.alignment);

  double dvdt = 0.0, pmax = 0.0, d2 = 0.0;
  for (int n = 0; n <= N; ++n) {
    const Vector& p = traj.states[n].p;
    pmax = std::max(pmax, std::sqrt(std::max(0.0, p.dot(P.ops->pressure_mass * p))));
    if (n >= 1) {
      const Vector dv = (traj.states[n].v_tilde - traj.states[n - 1].v_tilde) / traj.dt;
      dvdt = std::max(dvdt, std::sqrt(std::max(0.0, dv.dot(P.ops->mass * dv))));
    }
    if (n >= 2) {
      const Vector a = (traj.states[n].v_tilde - 2.0 * traj.states[n - 1].v_tilde + traj.states[n - 2].v_tilde) /
                       (traj.dt * traj.dt);
      d2 = std::max(d2, std::sqrt(std::max(0.0, a.dot(P.ops->mass * a))));
    }
  }
  rep.info("regularity", "max_dvdt_l2", dvdt);
  rep.info("regularity", "max_pressure_l2", pmax);
  rep.info("regularity", "max_second_difference_l2", d2);

  if (is_couette(sc)) {
    const double ell = (*sc.tresca_ell)(0.0);
    const double h = sc.height(0.0);
    const CouetteOracle o = couette_oracle(sc.mu, h, sc.wall.s * sc.zeta(0.0), ell);
    const SteadyResult st = run_to_steady(P, 0.5, ell, sc.verify.steady_tol, sc.verify.max_steady_steps);
    const WallMeasurement m = measure_wall(P, st.state);
    rep.add("couette", "steady_reached", st.rate, sc.verify.steady_tol, st.converged);
    rep.add("couette", "wall_speed_error", std::abs(m.wall_speed - o.wall_speed), 1e-3,
            std::abs(m.wall_speed - o.wall_speed) <= 1e-3,
            std::string("regime=") + (o.regime == CouetteOracle::Regime::Stick ? "stick" : "slip"));
    rep.add("couette", "shear_stress_error", std::abs(m.shear_stress - o.shear_stress), 1e-3,
            std::abs(m.shear_stress - o.shear_stress) <= 1e-3);
    const Complementarity cs = state_complementarity(P, st.state, Vector::Constant(P.num_quad(), ell));
    rep.add("couette", "steady_infeasibility", cs.infeasibility, 1e-2 * ell, cs.infeasibility <= 1e-2 * ell);
    const double atol = 1e-2 * ell * std::abs(sc.wall.s);
    rep.add("couette", "steady_alignment", cs.alignment, atol, cs.alignment <= atol);
  }
  return out;
}

}  // namespace slipstokes
