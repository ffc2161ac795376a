#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace slipstokes {

/// Scalar function of one variable from the built-in catalog, with its
/// first two derivatives. Built-ins:
///   constant(c)         c
///   linear(a, b)        a + b s
///   sine(a, b, w)       a + b sin(w s)
///   exp-kernel(a, r)    a exp(-r s)
///   bump(a, b, c, w)    a + b exp(-1 / (1 - ((s - c) / w)^2)) for |s - c| < w, else a
/// A custom function carries arbitrary callables and cannot be serialized.
class ScalarFunction {
 public:
  ScalarFunction();  // constant(0)

  static ScalarFunction constant(double c);
  static ScalarFunction linear(double a, double b);
  static ScalarFunction sine(double a, double b, double w);
  static ScalarFunction exp_kernel(double a, double r);
  static ScalarFunction bump(double a, double b, double c, double w);
  static ScalarFunction custom(std::function<double(double)> f,
                               std::function<double(double)> df, std::function<double(double)> d2f);
  /// Parses `name(p1, p2, ...)`; throws std::invalid_argument with a short reason.
  static ScalarFunction parse(std::string_view text);

  double operator()(double s) const { return f_(s); }
  double derivative(double s) const { return df_(s); }
  double second_derivative(double s) const { return d2f_(s); }

  const std::string& kind() const { return kind_; }
  const std::vector<double>& params() const { return params_; }
  bool is_builtin() const { return kind_ != "custom"; }
  /// Canonical text `name(p1,p2)` with 17 significant digits.
  std::string describe() const;
  /// Bounds of |f| and |f'| over [lo, hi] by dense sampling plus endpoints.
  double sup_abs(double lo, double hi) const;
  double sup_abs_derivative(double lo, double hi) const;
  double inf(double lo, double hi) const;

 private:
  ScalarFunction(std::string kind, std::vector<double> params, std::function<double(double)> f,
                 std::function<double(double)> df, std::function<double(double)> d2f);

  std::string kind_;
  std::vector<double> params_;
  std::function<double(double)> f_, df_, d2f_;
};

/// Shortest round-trip text of a double (17 significant digits).
std::string format_double(double x);

}  // namespace slipstokes
