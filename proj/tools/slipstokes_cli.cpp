#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include "CLI11.hpp"

#include "slipstokes/coulomb.hpp"
#include "slipstokes/errors.hpp"
#include "slipstokes/output.hpp"
#include "slipstokes/parallel.hpp"
#include "slipstokes/scenario_file.hpp"
#include "slipstokes/verification.hpp"

namespace fs = std::filesystem;
using namespace slipstokes;

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kBadInput = 2;
constexpr int kNumerical = 3;
constexpr int kIo = 4;

struct Args {
  std::string scenario;
  std::string out = "out";
  std::string checkpoint;
  bool resume = false;
  bool dump_thresholds = false;
  bool quiet = false;
  int threads = 0;
  int stop_after_window = -1;
};

std::ostream* log_stream(const Args& a) { return a.quiet ? nullptr : &std::cerr; }

Problem load(const Args& a) { return setup_problem(parse_scenario(a.scenario)); }

void print_warnings(const Problem& P) {
  for (const auto& w : P.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_mesh(const Args& a) {
  const Problem P = load(a);
  std::ofstream out = open_output(fs::path(a.out) / "mesh.txt");
  write_mesh(out, *P.mesh);
  std::printf("vertices %zu cells %zu facets %zu velocity_free %d pressure %d gamma0_points %d\n", P.mesh->vertices.size(),
              P.mesh->cells.size(), P.mesh->facets.size(), P.spaces->num_velocity_free(), P.spaces->num_pressure(),
              P.num_quad());
  return kOk;
}

int cmd_run_tresca(const Args& a) {
  const Problem P = load(a);
  print_warnings(P);
  if (!P.scenario.tresca_ell) throw ConfigurationError("run-tresca needs a [friction.tresca] section");
  const ThresholdField ell = tresca_threshold(P);
  RunOptions opts{step_options(P.scenario)};
  opts.log = log_stream(a);
  Trajectory traj = run_tresca(P, ell, opts);
  traj.scenario_hash = scenario_hash(P.scenario);
  RunOutputs run{&P, &traj, &ell, korn_coercivity_estimate(*P.ops)};
  const Manifest m = write_outputs(run, a.out);
  std::printf("run-tresca: %d steps, %zu files, manifest %s\n", traj.num_steps(), m.entries.size(),
              (fs::path(a.out) / "manifest.txt").c_str());
  return kOk;
}

int cmd_run_coulomb(const Args& a) {
  const Problem P = load(a);
  print_warnings(P);
  if (!P.scenario.coulomb) throw ConfigurationError("run-coulomb needs a [friction.coulomb] section");
  if (a.resume && a.checkpoint.empty()) throw UsageError("--resume needs --checkpoint");
  CoulombConfig cfg;
  cfg.log = log_stream(a);
  cfg.scenario_hash = scenario_hash(P.scenario);
  cfg.checkpoint_path = a.checkpoint;
  cfg.resume = a.resume;
  cfg.stop_after_window = a.stop_after_window;
  if (a.dump_thresholds) {
    const fs::path dir = fs::path(a.out) / "thresholds";
    cfg.on_threshold = [dir, &P](int window, int iteration, const ThresholdField& ell) {
      char name[64];
      std::snprintf(name, sizeof name, "window_%03d_iter_%03d.csv", window, iteration);
      std::ofstream out = open_output(dir / name);
      write_threshold_csv(out, ell, P.spaces->gamma0);
    };
  }
  const CoulombResult r = solve_coulomb(P, cfg);
  if (!r.complete) {
    std::printf("run-coulomb: stopped after %d window(s); resume with --resume --checkpoint %s\n",
                a.stop_after_window, a.checkpoint.c_str());
    return kOk;
  }
  RunOutputs run{&P, &r.trajectory, &r.threshold, korn_coercivity_estimate(*P.ops)};
  run.iteration = &r.trace;
  const Manifest m = write_outputs(run, a.out);
  std::printf("run-coulomb: %zu window(s), %zu iterations, self-consistency %.6e, %zu files\n",
              r.schedule.tau_steps.size() - 1, r.trace.records.size(), r.self_consistency, m.entries.size());
  return kOk;
}

int cmd_verify(const Args& a) {
  const Problem P = load(a);
  print_warnings(P);
  VerifyOutcome v = verify_scenario(P);
  v.trajectory.scenario_hash = scenario_hash(P.scenario);
  RunOutputs run{&P, &v.trajectory, &v.threshold, v.energy.alpha, &v.report};
  write_outputs(run, a.out);
  std::cout << v.report.to_text();
  return v.report.all_pass() ? kOk : kCheckFailed;
}

int cmd_study_eps(const Args& a) {
  const Problem P = load(a);
  print_warnings(P);
  if (!P.scenario.tresca_ell) throw ConfigurationError("study-eps needs a [friction.tresca] section");
  const auto rows = eps_convergence_study(P, tresca_threshold(P), P.scenario.verify.eps_list);
  std::ofstream out = open_output(fs::path(a.out) / "eps_study.csv");
  out << "eps,gap,bound,stick_measure,alignment,infeasibility,order\n";
  std::printf("%-12s %-14s %-14s %-12s %-14s %-14s %s\n", "eps", "gap", "bound", "stick", "alignment", "infeas", "order");
  for (const auto& r : rows) {
    out << format_double(r.eps) << "," << format_double(r.gap) << "," << format_double(r.bound) << ","
        << format_double(r.stick_measure) << "," << format_double(r.alignment) << "," << format_double(r.infeasibility)
        << "," << format_double(r.order) << "\n";
    std::printf("%-12.3e %-14.6e %-14.6e %-12.6f %-14.6e %-14.6e %.3f\n", r.eps, r.gap, r.bound, r.stick_measure,
                r.alignment, r.infeasibility, r.order);
  }
  return kOk;
}

int cmd_study_dt(const Args& a) {
  const Problem P = load(a);
  print_warnings(P);
  if (!P.scenario.tresca_ell) throw ConfigurationError("study-dt needs a [friction.tresca] section");
  const auto& dts = P.scenario.verify.dt_list;
  if (dts.empty()) throw ConfigurationError("verify.dt_list is empty");
  const double ref = *std::min_element(dts.begin(), dts.end()) / 4.0;
  const DtStudy s = dt_convergence_study(P, dts, ref);
  std::ofstream out = open_output(fs::path(a.out) / "dt_study.csv");
  out << "dt,error,order\n";
  std::printf("reference: Richardson extrapolation from dt=%.6g and dt=%.6g\n", ref, 2 * ref);
  for (std::size_t i = 0; i < s.dts.size(); ++i) {
    const double order = i == 0 ? std::nan("") : s.orders[i - 1];
    out << format_double(s.dts[i]) << "," << format_double(s.errors[i]) << "," << format_double(order) << "\n";
    std::printf("dt=%-10.6g error=%-14.6e order=%.3f\n", s.dts[i], s.errors[i], order);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slipstokes: unsteady Stokes flow with Tresca and non-local Coulomb slip friction"};
  app.require_subcommand(1);
  Args a;
  app.add_option("--threads", a.threads, "worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", a.scenario, "scenario file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", a.out, "output directory");
    sub->add_flag("-q,--quiet", a.quiet, "suppress per-step log lines");
    sub->add_option("--threads", a.threads, "worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
  };
  auto* mesh = app.add_subcommand("mesh", "build the mesh and dump it");
  auto* tresca = app.add_subcommand("run-tresca", "time-march with the given Tresca threshold");
  auto* coulomb = app.add_subcommand("run-coulomb", "windowed fixed point on the Coulomb threshold");
  auto* verify = app.add_subcommand("verify", "run and check energy, regularization, divergence and oracle properties");
  auto* eps = app.add_subcommand("study-eps", "regularization study over verify.eps_list");
  auto* dt = app.add_subcommand("study-dt", "temporal convergence over verify.dt_list");
  for (auto* s : {mesh, tresca, coulomb, verify, eps, dt}) add_common(s);
  coulomb->add_option("--checkpoint", a.checkpoint, "checkpoint file written after each window");
  coulomb->add_flag("--resume", a.resume, "resume from --checkpoint");
  coulomb->add_flag("--dump-thresholds", a.dump_thresholds, "write every threshold iterate under <out>/thresholds");
  coulomb->add_option("--stop-after-window", a.stop_after_window, "stop after this many windows (testing)")
      ->group("");

  CLI11_PARSE(app, argc, argv);
  set_num_threads(a.threads > 0 ? a.threads : static_cast<int>(std::thread::hardware_concurrency()));

  try {
    if (*mesh) return cmd_mesh(a);
    if (*tresca) return cmd_run_tresca(a);
    if (*coulomb) return cmd_run_coulomb(a);
    if (*verify) return cmd_verify(a);
    if (*eps) return cmd_study_eps(a);
    if (*dt) return cmd_study_dt(a);
  } catch (const ParseError& e) {
    std::cerr << "error: " << a.scenario << ": " << e.what() << "\n";
    return kBadInput;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const ConfigurationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const GeometryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const NonContractionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
