#include "slipstokes/stress.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>

#include "slipstokes/errors.hpp"
#include "slipstokes/parallel.hpp"
#include "slipstokes/quadrature.hpp"

namespace slipstokes {

Tensor StressField::at(int cell, const Barycentric& lambda) const {
  Tensor s = Tensor::Zero();
  for (int k = 0; k <= dim; ++k) s += lambda(k) * vertex_values[cell][k];
  return s;
}

Vector StressField::normal_row_values() const {
  const int d = dim;
  Vector out(static_cast<int>(vertex_values.size()) * (d + 1) * d);
  for (std::size_t c = 0; c < vertex_values.size(); ++c)
    for (int k = 0; k <= d; ++k)
      for (int j = 0; j < d; ++j) out((static_cast<int>(c) * (d + 1) + k) * d + j) = vertex_values[c][k](d - 1, j);
  return out;
}

StressField compute_stress(const FunctionSpacePair& s, const Vector& v_full, const Vector& p, double mu) {
  const int d = s.dim;
  StressField out;
  out.dim = d;
  out.vertex_values.resize(s.mesh->cells.size());
  for (std::size_t c = 0; c < s.mesh->cells.size(); ++c) {
    for (int k = 0; k <= d; ++k) {
      Barycentric l = Barycentric::Zero();
      l(k) = 1.0;
      const Eigen::Matrix3d du = s.velocity_gradient(v_full, static_cast<int>(c), l);
      Tensor sig = mu * (du + du.transpose());
      const double pk = p(s.mesh->cells[c][k]);
      for (int i = 0; i < d; ++i) sig(i, i) -= pk;
      out.vertex_values[c][k] = sig;
    }
  }
  return out;
}

StressField compute_stress(const Problem& problem, const State& state) {
  return compute_stress(*problem.spaces, problem.full_velocity(state.v_tilde, state.t), state.p, problem.scenario.mu);
}

Vector momentum_residual_div_stress(const Problem& problem, const State& prev, const State& next, double dt) {
  if (next.step != prev.step + 1) throw UsageError("momentum_residual_div_stress: states are not consecutive");
  const FunctionSpacePair& s = *problem.spaces;
  const double t = next.t;
  Vector div = s.expand((next.v_tilde - prev.v_tilde) / dt);
  div -= s.interpolate([&](const Point& x) { return problem.scenario.body_force(x, t); });
  const double dz = problem.scenario.zeta.derivative(t);
  if (dz != 0.0) div += dz * problem.lifting.G0;
  return div;
}

double bump_integral_1d() {
  static const double value = [] {
    const QuadratureRule g = gauss_legendre_unit(20);
    const int pieces = 32;
    double sum = 0.0;
    for (int i = 0; i < pieces; ++i) {
      for (std::size_t q = 0; q < g.size(); ++q) {
        const double t = -1.0 + 2.0 * (i + g.points[q](0)) / pieces;
        sum += 2.0 / pieces * g.weights[q] * std::exp(-1.0 / (1.0 - t * t));
      }
    }
    return sum;
  }();
  return value;
}

namespace {

// int_0^1 exp(-1 / v) dv
double bump_integral_radial() {
  static const double value = [] {
    const QuadratureRule g = gauss_legendre_unit(20);
    const int pieces = 32;
    double sum = 0.0;
    for (int i = 0; i < pieces; ++i)
      for (std::size_t q = 0; q < g.size(); ++q) {
        const double v = (i + g.points[q](0)) / pieces;
        sum += g.weights[q] / pieces * std::exp(-1.0 / v);
      }
    return sum;
  }();
  return value;
}

}  // namespace

Mollifier::Mollifier(int dim, double rho) : dim_(dim), rho_(rho) {
  if (!(rho > 0.0)) throw UsageError("Mollifier: rho must be positive");
  if (dim == 2)
    c_ = 1.0 / (rho * bump_integral_1d());
  else if (dim == 3)
    c_ = 1.0 / (rho * rho * M_PI * bump_integral_radial());
  else
    throw UsageError("Mollifier: dimension must be 2 or 3");
}

double Mollifier::value(const Point& x, const Point& centre) const {
  const double u = (x - centre).squaredNorm() / (rho_ * rho_);
  if (u >= 1.0) return 0.0;
  return c_ * std::exp(-1.0 / (1.0 - u));
}

Point Mollifier::gradient(const Point& x, const Point& centre) const {
  const Point r = x - centre;
  const double u = r.squaredNorm() / (rho_ * rho_);
  if (u >= 1.0) return Point::Zero();
  const double b = c_ * std::exp(-1.0 / (1.0 - u));
  return (-2.0 * b / (rho_ * rho_ * (1.0 - u) * (1.0 - u))) * r;
}

double default_mollifier_radius(const Mesh& mesh) { return 2.0 * mesh.mean_edge_length(); }

SupportQuadrature support_quadrature(const Mesh& mesh, const Mollifier& f, const Point& centre) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, QuadratureRule> cache;
  auto rule_for = [&](int dim, int levels) -> const QuadratureRule& {
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find({dim, levels});
    if (it == cache.end()) it = cache.emplace(std::make_pair(dim, levels), subdivided_simplex_rule(dim, 6, levels)).first;
    return it->second;
  };
  const int d = mesh.dim;
  const double rho = f.rho();
  SupportQuadrature out;
  for (int c = 0; c < static_cast<int>(mesh.cells.size()); ++c) {
    const auto& cell = mesh.cells[c];
    Point lo = mesh.vertices[cell[0]], hi = lo;
    double diam = 0.0;
    for (int a = 0; a <= d; ++a) {
      lo = lo.cwiseMin(mesh.vertices[cell[a]]);
      hi = hi.cwiseMax(mesh.vertices[cell[a]]);
      for (int b = a + 1; b <= d; ++b) diam = std::max(diam, (mesh.vertices[cell[a]] - mesh.vertices[cell[b]]).norm());
    }
    const Point nearest = centre.cwiseMax(lo).cwiseMin(hi);
    if ((nearest - centre).norm() >= rho) continue;
    int levels = static_cast<int>(std::ceil(std::log2(std::max(1.0, 8.0 * diam / rho))));
    levels = std::min(levels, d == 2 ? 5 : 3);
    const QuadratureRule& rule = rule_for(d, levels);
    const CellGeometry g = cell_geometry(mesh, c);
    const double jac = g.volume * (d == 2 ? 2.0 : 6.0);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point x = g.to_physical(rule.points[q]);
      if ((x - centre).squaredNorm() >= rho * rho) continue;
      out.points.push_back(x);
      out.weights.push_back(rule.weights[q] * jac);
      out.cells.push_back(c);
      out.lambdas.push_back(g.barycentric_of_reference(rule.points[q]));
    }
  }
  return out;
}

namespace {
Point centre_of(const Point& x_prime, int d) {
  Point c = Point::Zero();
  for (int k = 0; k < d - 1; ++k) c(k) = x_prime(k);
  return c;
}
}  // namespace

double regularized_normal_trace(const Mesh& mesh, const std::function<Point(const Point&)>& row,
                                const std::function<double(const Point&)>& div, const Mollifier& f,
                                const Point& x_prime) {
  const Point c = centre_of(x_prime, mesh.dim);
  const SupportQuadrature sq = support_quadrature(mesh, f, c);
  double r = 0.0;
  for (std::size_t q = 0; q < sq.weights.size(); ++q) {
    const Point& x = sq.points[q];
    r += sq.weights[q] * (div(x) * f.value(x, c) + row(x).dot(f.gradient(x, c)));
  }
  return r;
}

double regularized_normal_trace(const FunctionSpacePair& s, const StressField& stress, const Vector& div_full,
                                const Mollifier& f, const Point& x_prime) {
  const int d = s.dim;
  const Point c = centre_of(x_prime, d);
  const SupportQuadrature sq = support_quadrature(*s.mesh, f, c);
  double r = 0.0;
  double phi[10];
  for (std::size_t q = 0; q < sq.weights.size(); ++q) {
    const Point& x = sq.points[q];
    const Tensor sig = stress.at(sq.cells[q], sq.lambdas[q]);
    Point row = Point::Zero();
    for (int j = 0; j < d; ++j) row(j) = sig(d - 1, j);
    p2_values(d, sq.lambdas[q], phi);
    double dv = 0.0;
    for (int a = 0; a < p2_local_count(d); ++a) dv += phi[a] * div_full(s.velocity_dof(s.cell_nodes[sq.cells[q]][a], d - 1));
    r += sq.weights[q] * (dv * f.value(x, c) + row.dot(f.gradient(x, c)));
  }
  return r;
}

double trace_continuity_constant(const Mesh& mesh, const Mollifier& f, const Point& x_prime) {
  const Point c = centre_of(x_prime, mesh.dim);
  const SupportQuadrature sq = support_quadrature(mesh, f, c);
  double v2 = 0.0, g2 = 0.0;
  for (std::size_t q = 0; q < sq.weights.size(); ++q) {
    const double v = f.value(sq.points[q], c);
    v2 += sq.weights[q] * v * v;
    g2 += sq.weights[q] * f.gradient(sq.points[q], c).squaredNorm();
  }
  return std::max(std::sqrt(v2), std::sqrt(g2));
}

TraceOperator::TraceOperator(const FunctionSpacePair& s, const Mollifier& f) : spaces_(&s), f_(f) {
  const int d = s.dim;
  const auto& g0 = s.gamma0;
  const int nq = g0.size();
  struct Chunk {
    std::vector<Triplet> stress, div;
    double c_r = 0.0;
  };
  std::vector<Chunk> chunks(kReductionChunks);
  for_each_chunk(nq, kReductionChunks, [&](int chunk, int begin, int end) {
    Chunk& out = chunks[chunk];
    double phi[10];
    for (int q = begin; q < end; ++q) {
      const Point c = centre_of(g0.points[q], d);
      const SupportQuadrature sq = support_quadrature(*s.mesh, f_, c);
      std::map<int, double> srow, drow;
      double v2 = 0.0, g2 = 0.0;
      for (std::size_t i = 0; i < sq.weights.size(); ++i) {
        const double w = sq.weights[i];
        const double b = f_.value(sq.points[i], c);
        const Point gb = f_.gradient(sq.points[i], c);
        v2 += w * b * b;
        g2 += w * gb.squaredNorm();
        const int cell = sq.cells[i];
        for (int k = 0; k <= d; ++k)
          for (int j = 0; j < d; ++j) srow[(cell * (d + 1) + k) * d + j] += w * sq.lambdas[i](k) * gb(j);
        p2_values(d, sq.lambdas[i], phi);
        for (int a = 0; a < p2_local_count(d); ++a) drow[s.cell_nodes[cell][a]] += w * b * phi[a];
      }
      for (const auto& [col, v] : srow) out.stress.emplace_back(q, col, v);
      for (const auto& [col, v] : drow) out.div.emplace_back(q, col, v);
      out.c_r = std::max(out.c_r, std::max(std::sqrt(v2), std::sqrt(g2)));
    }
  });
  std::vector<Triplet> st, dt;
  for (const auto& c : chunks) {
    st.insert(st.end(), c.stress.begin(), c.stress.end());
    dt.insert(dt.end(), c.div.begin(), c.div.end());
    c_r_ = std::max(c_r_, c.c_r);
  }
  stress_map_.resize(nq, static_cast<int>(s.mesh->cells.size()) * (d + 1) * d);
  stress_map_.setFromTriplets(st.begin(), st.end());
  div_map_.resize(nq, s.num_nodes());
  div_map_.setFromTriplets(dt.begin(), dt.end());
}

Vector TraceOperator::apply(const StressField& stress, const Vector& div_full) const {
  const int d = spaces_->dim;
  Vector dn(spaces_->num_nodes());
  for (int n = 0; n < spaces_->num_nodes(); ++n) dn(n) = div_full(spaces_->velocity_dof(n, d - 1));
  return stress_map_ * stress.normal_row_values() + div_map_ * dn;
}

void compute_trace_history(const Problem& problem, const TraceOperator& R, Trajectory& traj, int from_step) {
  const int N = traj.num_steps();
  traj.boundary_history.resize(N + 1);
  if (N == 0) {
    const State& s0 = traj.states[0];
    State before = s0;
    before.step = -1;
    traj.boundary_history[0] =
        R.apply(compute_stress(problem, s0), momentum_residual_div_stress(problem, before, s0, traj.dt)).cwiseAbs();
    return;
  }
  for (int n = std::max(1, from_step); n <= N; ++n) {
    const Vector div = momentum_residual_div_stress(problem, traj.states[n - 1], traj.states[n], traj.dt);
    traj.boundary_history[n] = R.apply(compute_stress(problem, traj.states[n]), div).cwiseAbs();
  }
  if (from_step <= 1) traj.boundary_history[0] = traj.boundary_history[1];
}

void write_trace_history_csv(std::ostream& out, const Trajectory& traj, const Gamma0Quadrature& quad) {
  const int k = quad.tangential();
  out << "step,time,quad_point_id,x1" << (k == 2 ? ",x2" : "") << ",value\n";
  char buf[256];
  for (std::size_t n = 0; n < traj.boundary_history.size(); ++n) {
    const Vector& h = traj.boundary_history[n];
    if (h.size() != quad.size()) throw UsageError("write_trace_history_csv: missing history slot at step " + std::to_string(n));
    for (int q = 0; q < quad.size(); ++q) {
      if (k == 1)
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%d,%.17g,%.17g\n", n, traj.states[n].t, q, quad.points[q](0), h(q));
      else
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%d,%.17g,%.17g,%.17g\n", n, traj.states[n].t, q, quad.points[q](0),
                      quad.points[q](1), h(q));
      out << buf;
    }
  }
}

std::vector<Vector> read_trace_history_csv(std::istream& in, const Gamma0Quadrature& quad) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("trace history CSV: empty input");
  const int k = quad.tangential();
  std::vector<Vector> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != 4 + k) throw IoError("trace history CSV: bad row '" + line + "'");
    const int n = std::stoi(cells[0]);
    const int q = std::stoi(cells[2]);
    if (n < 0 || q < 0 || q >= quad.size()) throw IoError("trace history CSV: index out of range");
    if (n >= static_cast<int>(out.size())) out.resize(n + 1, Vector::Constant(quad.size(), std::nan("")));
    out[n](q) = std::stod(cells.back());
  }
  for (std::size_t n = 0; n < out.size(); ++n)
    if (out[n].hasNaN()) throw IoError("trace history CSV: missing slot at step " + std::to_string(n));
  return out;
}

}  // namespace slipstokes
