#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "slipstokes/coulomb.hpp"
#include "slipstokes/verification.hpp"

namespace slipstokes {

struct ManifestEntry {
  std::string path;  // relative to the output directory, '/' separated
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct Manifest {
  std::string scenario_hash;
  std::vector<ManifestEntry> entries;  // sorted by path
  std::string to_text() const;
};

/// What a run leaves behind. Optional pieces are skipped when null.
struct RunOutputs {
  const Problem* problem = nullptr;
  const Trajectory* trajectory = nullptr;
  const ThresholdField* threshold = nullptr;
  double alpha = 0.0;  // Korn constant for the energy bound column
  const VerificationReport* report = nullptr;
  const IterationTrace* iteration = nullptr;
};

/// Writes scenario.ini, mesh.txt, energy.csv, boundary.csv, thresholds.csv,
/// fields/step_<n>.txt for the requested dump steps, and the optional
/// report.txt, iteration.csv, trace_history.csv. Then hashes every file under
/// out_dir (except manifest.txt) into manifest.txt. Throws IoError naming the path.
Manifest write_outputs(const RunOutputs& run, const std::filesystem::path& out_dir);

/// Hashes every regular file below dir except manifest.txt.
Manifest build_manifest(const std::filesystem::path& dir, const std::string& scenario_hash);

/// Field dump: `FIELD v1 dim=<d> step=<n> t=<t>`, P2 node coordinates with the
/// full velocity, then vertex pressures.
void write_field(std::ostream& out, const Problem& problem, const State& state);

/// Opens a file for writing or throws IoError with the path.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace slipstokes
