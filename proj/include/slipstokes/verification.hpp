#pragma once

#include <string>
#include <vector>

#include "slipstokes/stress.hpp"

namespace slipstokes {

struct CouetteOracle {
  enum class Regime { Stick, Slip } regime = Regime::Stick;
  double wall_speed = 0.0;
  double shear_stress = 0.0;
};

/// Steady Couette flow with Tresca bound ell: stick when mu|s|/h <= ell.
CouetteOracle couette_oracle(double mu, double h, double s, double ell);

struct EnergyBudget {
  double alpha = 0.0;
  double C1_prime = 0.0;
  /// Terms of C1': 1/2||v0||^2, 1/2 int ||f||^2, (2mu^2/alpha)||G0||_H1^2 int zeta^2,
  /// 1/2 ||G0||^2 int zeta'^2.
  double terms[4] = {0, 0, 0, 0};
  std::vector<double> times;
  std::vector<double> measured;     // ||v^n||_M^2
  std::vector<double> bound;        // 2 C1' exp(2 t_n)
  std::vector<double> dissipation;  // a(v^n, v^n)
  /// Per-step discrete inequality: lhs_n <= rhs_n within 1e-10 relative.
  std::vector<double> step_lhs, step_rhs;
  bool bound_holds = true;
  bool steps_hold = true;
  double worst_step_excess = 0.0;  // max (lhs - rhs) / scale
};

EnergyBudget energy_budget(const Problem& problem, const Trajectory& trajectory, double alpha);

/// Tangential traction sigma n (n = -e_d) and slip v_t - s zeta e_1 at the
/// Gamma0 quadrature points, point-major.
struct BoundaryFields {
  Vector traction;
  Vector slip;
  Vector speed;  // tangential fluid velocity v_t
};
BoundaryFields boundary_fields(const Problem& problem, const State& state);

/// Gamma0 quadrature point nearest the centre of omega.
int centre_quad_point(const Problem& problem);

/// Wall fluid speed v_1 and |sigma_t| at the centre quadrature point.
struct WallMeasurement {
  double wall_speed = 0.0;
  double shear_stress = 0.0;
};
WallMeasurement measure_wall(const Problem& problem, const State& state);

/// Exact-law residuals of a state against the threshold row `ell`.
Complementarity state_complementarity(const Problem& problem, const State& state, const Vector& ell);

/// int int ell (sqrt(eps^2 + |v|^2) - |v|) over Gamma0 x (0, T), trapezoid in time.
double friction_gap(const Problem& problem, const Trajectory& trajectory, const ThresholdField& ell, double eps);
/// int int ell over Gamma0 x (0, T), trapezoid in time.
double threshold_integral(const Problem& problem, const ThresholdField& ell);

struct EpsStudyRow {
  double eps = 0.0;
  double gap = 0.0;
  double bound = 0.0;  // eps int int ell
  double stick_measure = 0.0;
  double alignment = 0.0;
  double infeasibility = 0.0;
  double order = 0.0;  // empirical order against the previous row (NaN on the first)
};

/// One run per eps (continuation through the larger scenario stages).
std::vector<EpsStudyRow> eps_convergence_study(const Problem& problem, const ThresholdField& ell,
                                               const std::vector<double>& eps_list);

struct DtStudy {
  std::vector<double> dts;
  std::vector<double> errors;  // ||v_dt(T) - v_ref(T)||_M
  std::vector<double> orders;  // log2 ratios of consecutive errors
  double reference_dt = 0.0;
};

/// Terminal-state errors against the Richardson extrapolation
/// 2 v_{h} - v_{2h} with h = reference_dt.
DtStudy dt_convergence_study(const Problem& problem, const std::vector<double>& dts, double reference_dt);

/// Largest generalized singular value of the Gamma0 trace map: ||T v||_{L2(Gamma0)} <= c ||v||_{H1}.
double trace_norm_estimate(const Problem& problem);

struct ReportEntry {
  std::string section;
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  enum class Status { Pass, Fail, Info } status = Status::Info;
  std::string detail;
};

/// Append-only list of checks; `to_text` prints one section per check group
/// with PASS / FAIL / INFO tokens.
struct VerificationReport {
  std::vector<ReportEntry> entries;

  void add(std::string section, std::string name, double value, double tolerance, bool pass, std::string detail = "");
  void info(std::string section, std::string name, double value, std::string detail = "");
  bool all_pass() const;
  std::string to_text() const;
};

struct VerifyOutcome {
  Trajectory trajectory;
  ThresholdField threshold;
  EnergyBudget energy;
  VerificationReport report;
};

/// Runs the scenario (Tresca, or Coulomb when configured) and checks the
/// energy budget, divergence, regularization bound and complementarity;
/// Couette-shaped scenarios are also checked against the oracle.
VerifyOutcome verify_scenario(const Problem& problem);

}  // namespace slipstokes
