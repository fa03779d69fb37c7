#pragma once
// Experiment runner: deterministic (optionally multi-threaded) execution of
// the named experiments, CSV and JSON-lines manifest output, and the CLI
// entry point.
//
// Streams are derived root -> experiment -> unit (setting pair, sweep point,
// grid point) -> trial, so results depend only on (config, seed), never on
// worker count or scheduling. Parallel reductions merge integer counts in a
// fixed chunk order; all floating summaries are computed after the merge.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lhv/analysis.hpp"
#include "lhv/config.hpp"
#include "lhv/tomography.hpp"

namespace lhv {

// Top-level stream for one experiment under a root seed.
RandomStream experiment_stream(std::uint64_t seed, Experiment e);

// --- experiment cores (used by run_experiment and directly by tests) ---

ChshRun run_bell_test(const RunConfig& cfg);

struct SweepRow {
  double value = 0.0;           // swept parameter value
  double kept_fraction = 0.0;   // observed coincidences / event-ready pairs
  double s_conventional = 0.0;  // NaN when some pair block has no observations
  double s_fair = 0.0;          // NaN when some pair block has no event-ready pairs
  double sigma_s_conventional = 0.0;
  double sigma_s_fair = 0.0;
};
std::vector<SweepRow> run_sweep(const RunConfig& cfg);

Histogram run_histogram(const RunConfig& cfg);
CoincidenceCurves run_curve(const RunConfig& cfg);
std::vector<std::pair<double, double>> run_scatter(const RunConfig& cfg);
std::vector<CurvePoint> run_singles(const RunConfig& cfg);

struct TomographyResult {
  WignerGrid grid;
  MinDensity minimum{};
  double negativity_epsilon = 0.0;
  double calibration_sigma = 0.0;  // matched to the data's peak marginal density
  std::uint64_t n_samples = 0;
};
TomographyResult run_tomography(const RunConfig& cfg);

// Execute cfg, write the experiment CSV to cfg.out_path and the run manifest
// to cfg.out_path + ".manifest.jsonl". Throws on any failure.
void run_experiment(const RunConfig& cfg);

// Full CLI: parse flags, load the config file, apply overrides, run.
// Failures exit nonzero with a one-line JSON error object on stderr
// (2 config, 3 I/O, 4 estimator undefined).
int cli_main(int argc, const char* const* argv) noexcept;

}  // namespace lhv
