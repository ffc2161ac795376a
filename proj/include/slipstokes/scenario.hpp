#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "slipstokes/functions.hpp"
#include "slipstokes/mesh.hpp"

namespace slipstokes {

/// Boundary data g: the slip datum s e_1 on Gamma0, zero on Gamma1, and on
/// GammaL either zero or the shear profile b (1 - x_d / h(x')) e_1.
struct WallData {
  double s = 0.0;
  enum class Lateral { Zero, Linear } lateral = Lateral::Zero;
  double lateral_value = 0.0;  // b

  /// g(x) on a boundary point carrying `tag` (g itself, without zeta).
  Point value(BoundaryTag tag, const Point& x, double height, int dim) const;
  std::string describe_lateral() const;
};

/// Non-local threshold F0 + Fsigma int_0^t S(t - s) |R(sigma^3)| ds.
struct CoulombSpec {
  ScalarFunction F0 = ScalarFunction::constant(0.0);
  ScalarFunction Fsigma = ScalarFunction::constant(0.0);
  ScalarFunction S = ScalarFunction::constant(1.0);
  double p_exponent = 4.0;
  double C_S = 1.0;             // declared bound of |S| and |S'|
  double C_prime_data = 0.125;  // contraction constant estimate
  double tol = 1e-8;
  int max_iter = 50;
  int max_halvings = 6;
  double max_window = 0.0;      // > 0 caps every window length

  /// Throws ParseError-compatible messages via DataError.
  void validate(double T) const;
};

struct Discretization {
  std::vector<int> resolution{16, 16};
  std::vector<double> eps_schedule{1e-2, 1e-3, 1e-4};
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  double rho = 0.0;  // mollifier radius; 0 selects 2 mean edge lengths
  std::vector<int> dump_steps;  // field dumps; -1 means the final step
};

struct VerifyConfig {
  std::vector<double> eps_list{1e-2, 1e-3, 1e-4};
  std::vector<double> dt_list{1.0 / 16, 1.0 / 32, 1.0 / 64};
  double steady_tol = 1e-8;
  int max_steady_steps = 2000;
};

/// Complete continuous problem data plus discretization choices.
struct Scenario {
  DomainSpec domain;
  ScalarFunction height = ScalarFunction::constant(1.0);  // h(x_1)
  double mu = 1.0;
  double T = 1.0;
  double dt = 0.0625;
  std::vector<double> force{0.0, 0.0};  // constant body force
  /// Optional space-time body force overriding `force` (not serializable).
  std::function<Point(const Point&, double)> force_fn;
  ScalarFunction zeta = ScalarFunction::constant(1.0);
  WallData wall;
  enum class InitialVelocity { Lifting, Zero } v0 = InitialVelocity::Lifting;
  bool compatibility = true;
  std::optional<ScalarFunction> tresca_ell;
  std::optional<CoulombSpec> coulomb;
  Discretization discretization;
  VerifyConfig verify;

  int dim() const { return domain.dimension; }
  int num_steps() const;
  Point body_force(const Point& x, double t) const;
  bool force_is_zero() const;
  /// Re-applies `height` to the domain description and checks every
  /// constraint; throws DataError / GeometryError naming the condition.
  void validate() const;
  /// Points domain.height at `height` (bounds stay as declared).
  void sync_domain();
};

/// The unit-square Couette channel: mu, s, Tresca ell, lateral shear profile
/// with bottom value `lateral`, zeta = 1, f = 0, v0 = G0.
Scenario couette_scenario(int resolution, double s, double ell, double lateral, double T, double dt);

}  // namespace slipstokes
