#include "slipstokes/functions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace slipstokes {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ScalarFunction::ScalarFunction(std::string kind, std::vector<double> params, std::function<double(double)> f,
                               std::function<double(double)> df, std::function<double(double)> d2f)
    : kind_(std::move(kind)), params_(std::move(params)), f_(std::move(f)), df_(std::move(df)), d2f_(std::move(d2f)) {}

ScalarFunction::ScalarFunction() : ScalarFunction(constant(0.0)) {}

ScalarFunction ScalarFunction::constant(double c) {
  ScalarFunction fn = custom([c](double) { return c; }, [](double) { return 0.0; }, [](double) { return 0.0; });
  fn.kind_ = "constant";
  fn.params_ = {c};
  return fn;
}

ScalarFunction ScalarFunction::linear(double a, double b) {
  ScalarFunction fn = custom([a, b](double s) { return a + b * s; }, [b](double) { return b; },
                             [](double) { return 0.0; });
  fn.kind_ = "linear";
  fn.params_ = {a, b};
  return fn;
}

ScalarFunction ScalarFunction::sine(double a, double b, double w) {
  ScalarFunction fn = custom(
      [a, b, w](double s) { return a + b * std::sin(w * s); },
      [b, w](double s) { return b * w * std::cos(w * s); },
      [b, w](double s) { return -b * w * w * std::sin(w * s); });
  fn.kind_ = "sine";
  fn.params_ = {a, b, w};
  return fn;
}

ScalarFunction ScalarFunction::exp_kernel(double a, double r) {
  ScalarFunction fn = custom(
      [a, r](double s) { return a * std::exp(-r * s); }, [a, r](double s) { return -a * r * std::exp(-r * s); },
      [a, r](double s) { return a * r * r * std::exp(-r * s); });
  fn.kind_ = "exp-kernel";
  fn.params_ = {a, r};
  return fn;
}

ScalarFunction ScalarFunction::bump(double a, double b, double c, double w) {
  if (!(w > 0.0)) throw std::invalid_argument("bump width must be positive");
  // g(u) = exp(-1/(1-u^2)), u = (s-c)/w.
  auto g = [](double u, int order) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double q = 1.0 - u * u;
    const double e = std::exp(-1.0 / q);
    const double d1 = -2.0 * u / (q * q);
    if (order == 0) return e;
    if (order == 1) return e * d1;
    // (e * d1)' = e * (d1^2 + d1'), d1' = -2/q^2 - 8u^2/q^3
    return e * (d1 * d1 - 2.0 / (q * q) - 8.0 * u * u / (q * q * q));
  };
  ScalarFunction fn = custom(
      [=](double s) { return a + b * g((s - c) / w, 0); }, [=](double s) { return b * g((s - c) / w, 1) / w; },
      [=](double s) { return b * g((s - c) / w, 2) / (w * w); });
  fn.kind_ = "bump";
  fn.params_ = {a, b, c, w};
  return fn;
}

ScalarFunction ScalarFunction::custom(std::function<double(double)> f,
                                      std::function<double(double)> df, std::function<double(double)> d2f) {
  return ScalarFunction("custom", {}, std::move(f), std::move(df), std::move(d2f));
}

ScalarFunction ScalarFunction::parse(std::string_view text) {
  std::string t;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) t.push_back(ch);
  const auto open = t.find('(');
  if (open == std::string::npos || t.back() != ')') throw std::invalid_argument("expected name(p1, ...)");
  const std::string name = t.substr(0, open);
  std::vector<double> p;
  const std::string body = t.substr(open + 1, t.size() - open - 2);
  std::size_t pos = 0;
  while (pos <= body.size() && !body.empty()) {
    const auto comma = body.find(',', pos);
    const std::string item = body.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number '" + item + "'");
    }
    if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument("bad number '" + item + "'");
    p.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  auto need = [&](std::size_t n) {
    if (p.size() != n)
      throw std::invalid_argument(name + " takes " + std::to_string(n) + " parameter(s), got " + std::to_string(p.size()));
  };
  if (name == "constant") {
    need(1);
    return constant(p[0]);
  }
  if (name == "linear") {
    need(2);
    return linear(p[0], p[1]);
  }
  if (name == "sine") {
    need(3);
    return sine(p[0], p[1], p[2]);
  }
  if (name == "exp-kernel") {
    need(2);
    return exp_kernel(p[0], p[1]);
  }
  if (name == "bump") {
    need(4);
    return bump(p[0], p[1], p[2], p[3]);
  }
  throw std::invalid_argument("unknown function '" + name + "'");
}

std::string ScalarFunction::describe() const {
  if (!is_builtin()) return "custom";
  std::string out = kind_ + "(";
  for (std::size_t i = 0; i < params_.size(); ++i) out += (i ? "," : "") + format_double(params_[i]);
  return out + ")";
}

namespace {
template <class F>
double sample_extreme(F&& f, double lo, double hi, bool maximize) {
  const int n = 4096;
  double best = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  for (int i = 0; i <= n; ++i) {
    const double s = lo + (hi - lo) * i / n;
    best = maximize ? std::max(best, f(s)) : std::min(best, f(s));
  }
  return best;
}
}  // namespace

double ScalarFunction::sup_abs(double lo, double hi) const {
  return sample_extreme([this](double s) { return std::abs(f_(s)); }, lo, hi, true);
}
double ScalarFunction::sup_abs_derivative(double lo, double hi) const {
  return sample_extreme([this](double s) { return std::abs(df_(s)); }, lo, hi, true);
}
double ScalarFunction::inf(double lo, double hi) const {
  return sample_extreme([this](double s) { return f_(s); }, lo, hi, false);
}

}  // namespace slipstokes
