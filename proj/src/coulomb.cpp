#include "slipstokes/coulomb.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "slipstokes/parallel.hpp"

namespace slipstokes {

namespace {

std::string fmt(double x) { return format_double(x); }

double trapezoid_weight(int j, int n, double dt) { return (j == 0 || j == n) ? 0.5 * dt : dt; }

}  // namespace

void IterationTrace::write_csv(std::ostream& out) const {
  out << "window,iteration,increment_norm,ratio,attempt,tau_start,tau_end\n";
  for (const auto& r : records)
    out << r.window << "," << r.iteration << "," << fmt(r.increment) << "," << fmt(r.ratio) << "," << r.attempt << ","
        << fmt(r.tau_start) << "," << fmt(r.tau_end) << "\n";
}

double window_length(double C_prime_data, double p) {
  if (!(C_prime_data > 0.0) || !(p > 2.0)) throw UsageError("window_length: need C' > 0 and p > 2");
  const double a = 1.0 / (4.0 * C_prime_data);
  return a >= 1.0 ? a * a : std::pow(a, 2.0 * p / (p - 2.0));
}

bool window_admissible(double dtau, double C_prime_data, double p) {
  return std::sqrt(dtau) + std::pow(dtau, (p - 2.0) / (2.0 * p)) <= 1.0 / (2.0 * C_prime_data) * (1.0 + 1e-12);
}

Vector history_integral(const std::vector<Vector>& history, const CoulombSpec& spec,
                        const std::vector<double>& grid, int n) {
  if (static_cast<int>(history.size()) <= n) throw UsageError("update_threshold: missing history slot at step " + std::to_string(n));
  Vector Q = Vector::Zero(history[0].size());
  if (n == 0) return Q;
  const double dt = (grid[n] - grid[0]) / n;
  for (int j = 0; j <= n; ++j) {
    if (history[j].size() != Q.size()) throw UsageError("update_threshold: missing history slot at step " + std::to_string(j));
    Q += trapezoid_weight(j, n, dt) * spec.S(grid[n] - grid[j]) * history[j];
  }
  return Q;
}

void update_threshold_rows(const std::vector<Vector>& history, const CoulombSpec& spec, ThresholdField& ell, int first,
                           int last) {
  for (int n = first; n <= last; ++n) {
    const double t = ell.time_grid[n];
    const double fs = spec.Fsigma(t);
    Vector row = Vector::Constant(ell.num_points(), spec.F0(t));
    if (fs != 0.0) row += fs * history_integral(history, spec, ell.time_grid, n);
    ell.values.row(n) = row.transpose();
  }
}

ThresholdField update_threshold(const std::vector<Vector>& history, const CoulombSpec& spec,
                                const std::vector<double>& grid) {
  if (history.empty()) throw UsageError("update_threshold: missing history slot at step 0");
  ThresholdField ell;
  ell.time_grid = grid;
  ell.values = Matrix::Zero(static_cast<int>(grid.size()), history[0].size());
  update_threshold_rows(history, spec, ell, 0, static_cast<int>(grid.size()) - 1);
  return ell;
}

namespace {
double surrogate_norm(const Matrix& v, const std::vector<double>& grid, const Vector& w, int last) {
  double s = 0.0;
  for (int n = 0; n <= last; ++n) {
    const double tw = last == 0 ? 1.0 : trapezoid_weight(n, last, grid[last] / last);
    s += tw * v.row(n).cwiseAbs2().dot(w.transpose());
    if (n < last) {
      const double h = grid[n + 1] - grid[n];
      s += h * ((v.row(n + 1) - v.row(n)) / h).cwiseAbs2().dot(w.transpose());
    }
  }
  return std::sqrt(s);
}
}  // namespace

double threshold_norm(const ThresholdField& ell, const Vector& weights, int last) {
  return surrogate_norm(ell.values, ell.time_grid, weights, last);
}

double threshold_distance(const ThresholdField& a, const ThresholdField& b, const Vector& weights, int last) {
  return surrogate_norm(a.values - b.values, a.time_grid, weights, last);
}

CoulombResult solve_coulomb(const Problem& problem, const CoulombConfig& config) {
  const Scenario& sc = problem.scenario;
  if (!sc.coulomb) throw ConfigurationError("scenario has no [friction.coulomb] section");
  const CoulombSpec& spec = *sc.coulomb;
  const int N = sc.num_steps();
  const double dt = sc.dt;
  const std::vector<double> grid = uniform_time_grid(dt, N);
  const Vector& w = problem.ops->boundary_mass;
  const int nq = problem.num_quad();

  const TimeStepper stepper(problem, dt);
  const double rho = sc.discretization.rho > 0.0 ? sc.discretization.rho : default_mollifier_radius(*problem.mesh);
  const TraceOperator R(*problem.spaces, Mollifier(problem.dim(), rho));
  RunOptions run;
  run.step = step_options(sc);
  run.log = config.log;

  CoulombResult res;
  int windows_done = 0;
  if (config.resume) {
    std::ifstream in(config.checkpoint_path);
    if (!in) throw IoError("cannot open checkpoint " + config.checkpoint_path);
    res = read_checkpoint(in, problem, config.scenario_hash, windows_done);
  } else {
    res.trajectory.dt = dt;
    res.trajectory.scenario_hash = config.scenario_hash;
    res.trajectory.states = {initial_state(problem)};
    res.trajectory.boundary_history = {Vector::Zero(nq)};
    res.threshold.time_grid = grid;
    res.threshold.values = Matrix::Zero(N + 1, nq);
    res.threshold.values.row(0).setConstant(spec.F0(0.0));
    res.schedule.C_prime_data = spec.C_prime_data;
  }
  res.trajectory.scenario_hash = config.scenario_hash;

  auto say = [&](const std::string& s) {
    if (config.log) *config.log << s << "\n";
  };

  while (res.schedule.tau_steps.back() < N) {
    if (config.stop_after_window >= 0 && windows_done >= config.stop_after_window) return res;
    const int n_tau = res.schedule.tau_steps.back();
    const double tau = grid[n_tau];
    double dtau = window_length(spec.C_prime_data, spec.p_exponent);
    if (spec.max_window > 0.0) dtau = std::min(dtau, spec.max_window);

    // ell_0 beyond tau: F0(t) + Fsigma(tau) Q(tau), frozen history integral.
    const Vector q_tau = history_integral(res.trajectory.boundary_history, spec, grid, n_tau);
    bool accepted = false;
    for (int attempt = 0; attempt <= spec.max_halvings && !accepted; ++attempt) {
      const int n_end = std::min(N, n_tau + std::max(1, static_cast<int>(std::floor(dtau / dt + 1e-9))));
      ThresholdField ell = res.threshold;
      for (int n = n_tau + 1; n <= n_end; ++n)
        ell.values.row(n) = (Vector::Constant(nq, spec.F0(grid[n])) + spec.Fsigma(tau) * q_tau).transpose();
      run.prefix = &res.trajectory;
      run.first_step = n_tau;
      run.last_step = n_end;
      double previous = std::numeric_limits<double>::quiet_NaN();
      int rising = 0;
      bool contracting = true;
      for (int k = 0; k < spec.max_iter; ++k) {
        Trajectory traj = run_tresca(problem, stepper, ell, run);
        traj.scenario_hash = config.scenario_hash;
        traj.boundary_history = res.trajectory.boundary_history;
        traj.boundary_history.resize(n_tau + 1);
        compute_trace_history(problem, R, traj, n_tau + 1);
        if (config.on_threshold) config.on_threshold(windows_done, k, ell);
        ThresholdField next = ell;
        update_threshold_rows(traj.boundary_history, spec, next, n_tau + 1, n_end);
        const double inc = threshold_distance(next, ell, w, n_end);
        const double norm = threshold_norm(ell, w, n_end);
        IterationRecord rec;
        rec.window = windows_done;
        rec.attempt = attempt;
        rec.iteration = k;
        rec.increment = inc;
        rec.ratio = std::isnan(previous) ? std::numeric_limits<double>::quiet_NaN() : (previous > 0 ? inc / previous : 0.0);
        rec.tau_start = tau;
        rec.tau_end = grid[n_end];
        res.trace.records.push_back(rec);
        char buf[200];
        std::snprintf(buf, sizeof buf, "window=%d attempt=%d iter=%d tau=[%.6g,%.6g] increment=%.6e ratio=%.6g",
                      windows_done, attempt, k, tau, grid[n_end], inc, rec.ratio);
        say(buf);
        if (inc <= spec.tol * (1.0 + norm)) {
          // Accept the trajectory computed with ell_k.
          res.trajectory = std::move(traj);
          res.threshold = ell;
          res.schedule.tau_steps.push_back(n_end);
          res.schedule.tau_points.push_back(grid[n_end]);
          accepted = true;
          break;
        }
        rising = (!std::isnan(previous) && inc >= previous) ? rising + 1 : 0;
        if (rising >= 2) {
          contracting = false;
          break;
        }
        previous = inc;
        ell = std::move(next);
      }
      if (!accepted) {
        say(contracting ? "window did not converge within max_iter; halving" : "increments not decreasing; halving");
        dtau *= 0.5;
      }
    }
    if (!accepted)
      throw NonContractionError("threshold iteration does not contract on window starting at t=" + fmt(tau) +
                                    " after " + std::to_string(spec.max_halvings) + " halvings",
                                res.trace);
    ++windows_done;
    if (!config.checkpoint_path.empty()) {
      std::ofstream out(config.checkpoint_path);
      if (!out) throw IoError("cannot write checkpoint " + config.checkpoint_path);
      write_checkpoint(out, res, windows_done);
      if (!out) throw IoError("failed writing checkpoint " + config.checkpoint_path);
    }
  }

  const ThresholdField consistent = update_threshold(res.trajectory.boundary_history, spec, grid);
  res.self_consistency = threshold_distance(res.threshold, consistent, w, N);
  res.threshold_norm = threshold_norm(res.threshold, w, N);
  res.complete = true;
  return res;
}

// ---------------------------------------------------------------- checkpoint

namespace {

void write_vector(std::ostream& out, const char* tag, const Vector& v) {
  out << tag << " " << v.size();
  for (int i = 0; i < v.size(); ++i) out << " " << fmt(v(i));
  out << "\n";
}

Vector read_vector(std::istream& in, const std::string& tag) {
  std::string t;
  int n = 0;
  if (!(in >> t >> n) || t != tag || n < 0) throw IoError("checkpoint: expected '" + tag + "'");
  Vector v(n);
  for (int i = 0; i < n; ++i) {
    std::string s;
    if (!(in >> s)) throw IoError("checkpoint: truncated '" + tag + "'");
    v(i) = std::stod(s);
  }
  return v;
}

template <class T>
T read_keyed(std::istream& in, const std::string& key) {
  std::string k;
  T v{};
  if (!(in >> k) || k != key) throw IoError("checkpoint: expected key '" + key + "'");
  if constexpr (std::is_same_v<T, double>) {
    std::string s;
    if (!(in >> s)) throw IoError("checkpoint: missing value for '" + key + "'");
    v = std::stod(s);
  } else {
    if (!(in >> v)) throw IoError("checkpoint: missing value for '" + key + "'");
  }
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const CoulombResult& r, int windows_done) {
  const Trajectory& tr = r.trajectory;
  out << "SLIPSTOKES-CHECKPOINT v1\n";
  out << "scenario_hash " << (tr.scenario_hash.empty() ? "-" : tr.scenario_hash) << "\n";
  out << "windows_done " << windows_done << "\n";
  out << "C_prime_data " << fmt(r.schedule.C_prime_data) << "\n";
  out << "tau_count " << r.schedule.tau_steps.size() << "\n";
  for (std::size_t i = 0; i < r.schedule.tau_steps.size(); ++i)
    out << "tau " << r.schedule.tau_steps[i] << " " << fmt(r.schedule.tau_points[i]) << "\n";
  out << "dt " << fmt(tr.dt) << "\n";
  out << "states " << tr.states.size() << "\n";
  for (const State& s : tr.states) {
    out << "state " << s.step << " " << fmt(s.t) << " " << s.newton.iterations << " " << fmt(s.newton.residual) << "\n";
    write_vector(out, "v", s.v_tilde);
    write_vector(out, "p", s.p);
  }
  out << "history " << tr.boundary_history.size() << "\n";
  for (const Vector& h : tr.boundary_history) write_vector(out, "h", h);
  out << "threshold " << r.threshold.values.rows() << " " << r.threshold.values.cols() << "\n";
  for (int n = 0; n < r.threshold.values.rows(); ++n) {
    write_vector(out, "t", Vector::Constant(1, r.threshold.time_grid[n]));
    write_vector(out, "l", r.threshold.values.row(n).transpose());
  }
  out << "trace " << r.trace.records.size() << "\n";
  for (const auto& rec : r.trace.records)
    out << "rec " << rec.window << " " << rec.attempt << " " << rec.iteration << " " << fmt(rec.increment) << " "
        << fmt(rec.ratio) << " " << fmt(rec.tau_start) << " " << fmt(rec.tau_end) << "\n";
  out << "end\n";
}

CoulombResult read_checkpoint(std::istream& in, const Problem& problem, const std::string& scenario_hash,
                              int& windows_done) {
  std::string line;
  std::getline(in, line);
  if (line != "SLIPSTOKES-CHECKPOINT v1") throw IoError("checkpoint: bad header '" + line + "'");
  CoulombResult r;
  const std::string hash = read_keyed<std::string>(in, "scenario_hash");
  if (!scenario_hash.empty() && hash != scenario_hash) throw IoError("checkpoint: scenario hash mismatch");
  windows_done = read_keyed<int>(in, "windows_done");
  r.schedule.C_prime_data = read_keyed<double>(in, "C_prime_data");
  const int ntau = read_keyed<int>(in, "tau_count");
  r.schedule.tau_steps.clear();
  r.schedule.tau_points.clear();
  for (int i = 0; i < ntau; ++i) {
    std::string t, s;
    int n = 0;
    if (!(in >> t >> n >> s) || t != "tau") throw IoError("checkpoint: bad tau line");
    r.schedule.tau_steps.push_back(n);
    r.schedule.tau_points.push_back(std::stod(s));
  }
  r.trajectory.dt = read_keyed<double>(in, "dt");
  r.trajectory.scenario_hash = hash == "-" ? "" : hash;
  const int ns = read_keyed<int>(in, "states");
  const int nv = problem.spaces->num_velocity_free(), np = problem.spaces->num_pressure();
  for (int i = 0; i < ns; ++i) {
    std::string tag, t, res;
    State s;
    if (!(in >> tag >> s.step >> t >> s.newton.iterations >> res) || tag != "state") throw IoError("checkpoint: bad state");
    s.t = std::stod(t);
    s.newton.residual = std::stod(res);
    s.v_tilde = read_vector(in, "v");
    s.p = read_vector(in, "p");
    if (s.v_tilde.size() != nv || s.p.size() != np) throw IoError("checkpoint: state size does not match the problem");
    r.trajectory.states.push_back(std::move(s));
  }
  const int nh = read_keyed<int>(in, "history");
  for (int i = 0; i < nh; ++i) r.trajectory.boundary_history.push_back(read_vector(in, "h"));
  std::string tag;
  int rows = 0, cols = 0;
  if (!(in >> tag >> rows >> cols) || tag != "threshold") throw IoError("checkpoint: bad threshold block");
  r.threshold.values.resize(rows, cols);
  r.threshold.time_grid.resize(rows);
  for (int n = 0; n < rows; ++n) {
    r.threshold.time_grid[n] = read_vector(in, "t")(0);
    const Vector l = read_vector(in, "l");
    if (l.size() != cols) throw IoError("checkpoint: threshold row has wrong length");
    r.threshold.values.row(n) = l.transpose();
  }
  const int nr = read_keyed<int>(in, "trace");
  for (int i = 0; i < nr; ++i) {
    IterationRecord rec;
    std::string inc, ratio, a, b;
    if (!(in >> tag >> rec.window >> rec.attempt >> rec.iteration >> inc >> ratio >> a >> b) || tag != "rec")
      throw IoError("checkpoint: bad trace record");
    rec.increment = std::stod(inc);
    rec.ratio = std::stod(ratio);
    rec.tau_start = std::stod(a);
    rec.tau_end = std::stod(b);
    r.trace.records.push_back(rec);
  }
  if (!(in >> tag) || tag != "end") throw IoError("checkpoint: missing end marker");
  if (r.threshold.num_points() != problem.num_quad()) throw IoError("checkpoint: quadrature layout mismatch");
  return r;
}

}  // namespace slipstokes
