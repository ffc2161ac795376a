#include "slipstokes/output.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "slipstokes/errors.hpp"
#include "slipstokes/hashing.hpp"
#include "slipstokes/scenario_file.hpp"
#include "slipstokes/stress.hpp"

namespace slipstokes {

namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

namespace {

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

void write_energy_csv(std::ostream& o, const EnergyBudget& e, const Trajectory& traj) {
  o << "step,t,kinetic,dissipation,bound\n";
  for (std::size_t n = 0; n < e.measured.size(); ++n)
    o << traj.states[n].step << "," << format_double(e.times[n]) << "," << format_double(0.5 * e.measured[n]) << ","
      << format_double(e.dissipation[n]) << "," << format_double(0.5 * e.bound[n]) << "\n";
}

void write_boundary_csv(std::ostream& o, const Problem& P, const Trajectory& traj, const ThresholdField& ell) {
  const int k = P.tangential();
  const auto& g = P.spaces->gamma0;
  o << "step,t,quad_point_id";
  for (int j = 0; j < k; ++j) o << ",x" << j + 1;
  for (int j = 0; j < k; ++j) o << ",slip_" << j + 1;
  for (int j = 0; j < k; ++j) o << ",traction_" << j + 1;
  o << ",threshold\n";
  for (const State& s : traj.states) {
    const BoundaryFields b = boundary_fields(P, s);
    const Vector l = ell.slice(s.step);
    for (int q = 0; q < g.size(); ++q) {
      o << s.step << "," << format_double(s.t) << "," << q;
      for (int j = 0; j < k; ++j) o << "," << format_double(g.points[q](j));
      for (int j = 0; j < k; ++j) o << "," << format_double(b.slip(q * k + j));
      for (int j = 0; j < k; ++j) o << "," << format_double(b.traction(q * k + j));
      o << "," << format_double(l(q)) << "\n";
    }
  }
}

}  // namespace

void write_field(std::ostream& out, const Problem& P, const State& s) {
  const FunctionSpacePair& sp = *P.spaces;
  const int d = sp.dim;
  const Vector v = P.full_velocity(s.v_tilde, s.t);
  out << "FIELD v1 dim=" << d << " step=" << s.step << " t=" << format_double(s.t) << "\n";
  out << "velocity " << sp.num_nodes() << "\n";
  for (int n = 0; n < sp.num_nodes(); ++n) {
    for (int c = 0; c < d; ++c) out << (c ? " " : "") << format_double(sp.nodes[n](c));
    for (int c = 0; c < d; ++c) out << " " << format_double(v(sp.velocity_dof(n, c)));
    out << "\n";
  }
  out << "pressure " << sp.num_pressure() << "\n";
  for (int i = 0; i < sp.num_pressure(); ++i) out << format_double(s.p(i)) << "\n";
}

std::string Manifest::to_text() const {
  std::string o = "MANIFEST v1\nscenario_hash " + (scenario_hash.empty() ? std::string("-") : scenario_hash) + "\n";
  for (const auto& e : entries) o += e.sha256 + " " + std::to_string(e.bytes) + " " + e.path + "\n";
  return o;
}

Manifest build_manifest(const fs::path& dir, const std::string& hash) {
  Manifest m;
  m.scenario_hash = hash;
  std::error_code ec;
  for (fs::recursive_directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    const std::string rel = fs::relative(it->path(), dir).generic_string();
    if (rel == "manifest.txt") continue;
    m.entries.push_back({rel, it->file_size(), sha256_file(it->path())});
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(m.entries.begin(), m.entries.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  return m;
}

Manifest write_outputs(const RunOutputs& run, const fs::path& dir) {
  if (!run.problem || !run.trajectory || !run.threshold) throw UsageError("write_outputs: problem, trajectory and threshold are required");
  const Problem& P = *run.problem;
  const Trajectory& traj = *run.trajectory;
  const std::string hash = traj.scenario_hash.empty() ? scenario_hash(P.scenario) : traj.scenario_hash;

  auto emit = [&](const std::string& name, auto&& body) {
    const fs::path path = dir / name;
    std::ofstream out = open_output(path);
    body(out);
    finish(out, path);
  };

  emit("scenario.ini", [&](std::ostream& o) { o << serialize_scenario(P.scenario); });
  emit("mesh.txt", [&](std::ostream& o) { write_mesh(o, *P.mesh); });
  const EnergyBudget e = energy_budget(P, traj, run.alpha);
  emit("energy.csv", [&](std::ostream& o) { write_energy_csv(o, e, traj); });
  emit("boundary.csv", [&](std::ostream& o) { write_boundary_csv(o, P, traj, *run.threshold); });
  emit("thresholds.csv", [&](std::ostream& o) { write_threshold_csv(o, *run.threshold, P.spaces->gamma0); });
  if (!traj.boundary_history.empty())
    emit("trace_history.csv", [&](std::ostream& o) { write_trace_history_csv(o, traj, P.spaces->gamma0); });

  std::set<int> steps;
  for (int s : P.scenario.discretization.dump_steps) steps.insert(s < 0 ? traj.num_steps() : s);
  if (steps.empty()) steps.insert(traj.num_steps());
  for (int s : steps) {
    if (s > traj.num_steps()) throw UsageError("dump step " + std::to_string(s) + " exceeds the run length");
    char name[64];
    std::snprintf(name, sizeof name, "fields/step_%06d.txt", s);
    emit(name, [&](std::ostream& o) { write_field(o, P, traj.states[s]); });
  }
  if (run.report) emit("report.txt", [&](std::ostream& o) { o << run.report->to_text(); });
  if (run.iteration) emit("iteration.csv", [&](std::ostream& o) { run.iteration->write_csv(o); });

  Manifest m = build_manifest(dir, hash);
  emit("manifest.txt", [&](std::ostream& o) { o << m.to_text(); });
  return m;
}

}  // namespace slipstokes
