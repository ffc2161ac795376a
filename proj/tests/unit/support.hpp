#pragma once

#include <cmath>
#include <functional>

#include "slipstokes/scenario.hpp"

namespace testing_support {

// Recursive adaptive Simpson; independent of the library's Gauss rules.
inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                           double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) return left + right + (left + right - whole) / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return simpson_step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 40);
}

// f = 0, s = 0, zero lateral data, v0 = 0: the zero field is the solution.
inline slipstokes::Scenario zero_flow_scenario(int res, double ell, double T, double dt) {
  slipstokes::Scenario sc = slipstokes::couette_scenario(res, 0.0, ell, 0.0, T, dt);
  sc.wall.lateral = slipstokes::WallData::Lateral::Zero;
  sc.discretization.eps_schedule = {1e-2, 1e-3, 1e-4};
  return sc;
}

}  // namespace testing_support
