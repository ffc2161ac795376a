#include "slipstokes/scenario.hpp"

#include <cmath>

#include "slipstokes/errors.hpp"

namespace slipstokes {

Point WallData::value(BoundaryTag tag, const Point& x, double height, int dim) const {
  Point g = Point::Zero();
  switch (tag) {
    case BoundaryTag::Gamma0:
      g(0) = s;
      break;
    case BoundaryTag::Gamma1:
      break;
    case BoundaryTag::GammaL:
      if (lateral == Lateral::Linear) g(0) = lateral_value * (1.0 - x(dim - 1) / height);
      break;
  }
  return g;
}

std::string WallData::describe_lateral() const {
  return lateral == Lateral::Zero ? "zero" : "linear(" + format_double(lateral_value) + ")";
}

void CoulombSpec::validate(double T) const {
  if (!(p_exponent > 2.0)) throw DataError("p must exceed 2");
  if (!(C_prime_data > 0.0)) throw DataError("C_prime_data must be positive");
  if (!(tol > 0.0)) throw DataError("tol must be positive");
  if (max_iter < 1) throw DataError("max_iter must be at least 1");
  if (max_halvings < 0) throw DataError("max_halvings must be nonnegative");
  if (F0.inf(0.0, T) < 0.0) throw DataError("F0 must be nonnegative");
  if (Fsigma.inf(0.0, T) < 0.0) throw DataError("Fsigma must be nonnegative");
  if (S.inf(0.0, T) < 0.0) throw DataError("S must be nonnegative");
  if (S.sup_abs(0.0, T) > C_S * (1 + 1e-12) || S.sup_abs_derivative(0.0, T) > C_S * (1 + 1e-12))
    throw DataError("|S| and |S'| must be bounded by C_S");
}

int Scenario::num_steps() const {
  const double n = T / dt;
  return static_cast<int>(std::llround(n));
}

Point Scenario::body_force(const Point& x, double t) const {
  if (force_fn) return force_fn(x, t);
  Point f = Point::Zero();
  for (int c = 0; c < dim(); ++c) f(c) = force[c];
  return f;
}

bool Scenario::force_is_zero() const {
  if (force_fn) return false;
  for (double v : force)
    if (v != 0.0) return false;
  return true;
}

void Scenario::sync_domain() {
  ScalarFunction h = height;
  domain.height = [h](const Point& xp) { return h(xp(0)); };
}

void Scenario::validate() const {
  domain.validate();
  if (!(mu > 0.0)) throw DataError("mu must be positive");
  if (!(T >= 0.0)) throw DataError("T must be nonnegative");
  if (!(dt > 0.0)) throw DataError("dt must be positive");
  if (std::abs(num_steps() * dt - T) > 1e-9 * std::max(1.0, T)) throw DataError("T / dt must be an integer");
  if (std::abs(zeta(0.0) - 1.0) > 1e-14) throw DataError("zeta(0) must equal 1");
  if (static_cast<int>(force.size()) != dim() && !force_fn) throw DataError("f must have one component per dimension");
  if (tresca_ell && tresca_ell->inf(0.0, T) < 0.0) throw DataError("ell must be nonnegative");
  if (coulomb) coulomb->validate(T);
  const auto& d = discretization;
  if (static_cast<int>(d.resolution.size()) != dim()) throw DataError("resolution needs one entry per axis");
  if (d.eps_schedule.empty()) throw DataError("eps_schedule must not be empty");
  for (std::size_t i = 0; i < d.eps_schedule.size(); ++i) {
    if (!(d.eps_schedule[i] > 0.0)) throw DataError("eps must be positive");
    if (i > 0 && !(d.eps_schedule[i] < d.eps_schedule[i - 1])) throw DataError("eps_schedule must be decreasing");
  }
  if (!(d.newton_tol > 0.0) || d.newton_max_iter < 1) throw DataError("newton settings must be positive");
  if (d.rho < 0.0) throw DataError("rho must be nonnegative");
}

Scenario couette_scenario(int resolution, double s, double ell, double lateral, double T, double dt) {
  Scenario sc;
  sc.domain.dimension = 2;
  sc.height = ScalarFunction::constant(1.0);
  sc.sync_domain();
  sc.mu = 1.0;
  sc.T = T;
  sc.dt = dt;
  sc.force = {0.0, 0.0};
  sc.zeta = ScalarFunction::constant(1.0);
  sc.wall.s = s;
  sc.wall.lateral = WallData::Lateral::Linear;
  sc.wall.lateral_value = lateral;
  sc.v0 = Scenario::InitialVelocity::Lifting;
  sc.tresca_ell = ScalarFunction::constant(ell);
  sc.discretization.resolution = {resolution, resolution};
  sc.discretization.eps_schedule = {1e-2, 1e-3, 1e-4, 1e-5};
  return sc;
}

}  // namespace slipstokes
