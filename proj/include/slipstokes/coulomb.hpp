#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "slipstokes/errors.hpp"
#include "slipstokes/stress.hpp"

namespace slipstokes {

struct IterationRecord {
  int window = 0;
  int attempt = 0;
  int iteration = 0;
  double increment = 0.0;  // ||ell_{k+1} - ell_k|| in the W^{1,2} surrogate
  double ratio = 0.0;      // increment / previous increment (NaN on the first)
  double tau_start = 0.0;
  double tau_end = 0.0;
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  /// CSV: window,iteration,increment_norm,ratio,attempt,tau_start,tau_end.
  void write_csv(std::ostream& out) const;
};

/// Raised when the threshold iteration stops contracting on the smallest
/// admissible window.
class NonContractionError : public Error {
 public:
  NonContractionError(const std::string& what, IterationTrace trace) : Error(what), trace_(std::move(trace)) {}
  const IterationTrace& trace() const { return trace_; }

 private:
  IterationTrace trace_;
};

struct WindowSchedule {
  std::vector<double> tau_points{0.0};
  std::vector<int> tau_steps{0};
  double C_prime_data = 0.0;
};

/// Window length from C'_data: (1/(4C'))^2 when 1/(4C') >= 1, else
/// (1/(4C'))^(2p/(p-2)).
double window_length(double C_prime_data, double p);
/// sqrt(dtau) + dtau^((p-2)/(2p)) <= 1/(2C').
bool window_admissible(double dtau, double C_prime_data, double p);

/// ell(x', t_n) = F0(t_n) + Fsigma(t_n) sum_j w_j S(t_n - t_j) |R_j(x')| with
/// trapezoid weights on the grid. history[j] holds |R| at t_j.
ThresholdField update_threshold(const std::vector<Vector>& history, const CoulombSpec& spec,
                                const std::vector<double>& time_grid);
/// Rows [first, last] only, written into `ell`.
void update_threshold_rows(const std::vector<Vector>& history, const CoulombSpec& spec, ThresholdField& ell, int first,
                           int last);
/// The history integral Q(t_n) alone.
Vector history_integral(const std::vector<Vector>& history, const CoulombSpec& spec,
                        const std::vector<double>& time_grid, int n);

/// Discrete W^{1,2}(0, t_last; L2(Gamma0)) norm over rows [0, last]:
/// trapezoid-in-time L2 values plus forward-difference time derivatives.
double threshold_norm(const ThresholdField& ell, const Vector& weights, int last);
double threshold_distance(const ThresholdField& a, const ThresholdField& b, const Vector& weights, int last);

struct CoulombConfig {
  std::ostream* log = nullptr;
  std::string scenario_hash;
  std::string checkpoint_path;  // written after every window when set
  bool resume = false;          // start from checkpoint_path
  int stop_after_window = -1;   // return after this many windows (interruption drill)
  std::function<void(int window, int iteration, const ThresholdField&)> on_threshold;
};

struct CoulombResult {
  Trajectory trajectory;  // with boundary_history
  ThresholdField threshold;
  IterationTrace trace;
  WindowSchedule schedule;
  double self_consistency = 0.0;  // ||ell - F(sigma)|| in the surrogate norm
  double threshold_norm = 0.0;
  bool complete = false;
};

/// Windowed successive approximation of the threshold.
CoulombResult solve_coulomb(const Problem& problem, const CoulombConfig& config);

/// Checkpoint text: header, scenario hash, window state, states, history,
/// thresholds and the iteration trace, all printed with 17 digits.
void write_checkpoint(std::ostream& out, const CoulombResult& partial, int windows_done);
CoulombResult read_checkpoint(std::istream& in, const Problem& problem, const std::string& scenario_hash,
                              int& windows_done);

}  // namespace slipstokes
