#pragma once

#include <string>
#include <vector>

#include "ulr/linalg.hpp"
#include "ulr/model.hpp"

namespace ulr {

// A reproducible simulation study: model, sample length, anchor grid, window
// width, replication count and seed, plus the list of table artifacts to emit.
struct ExperimentSpec {
  std::string name;
  ModelParams params;
  long T = 0;
  std::vector<double> c_grid;
  long H_T = 0;
  long K = 0;  // must equal c_grid.size()
  long reps = 0;
  unsigned long seed = 0;
  std::vector<std::string> outputs;  // empty means every known artifact
};

// Rejects empty names, grids that are not strictly increasing in [0, 1),
// windows that spill past the sample, K mismatching the grid, nonpositive
// T / H_T / reps, and unknown output names.
void validate(const ExperimentSpec& spec);

// 64-bit FNV-1a over the canonical text form of the experiment spec, as 16
// hex digits.
// Any change to the model, the grid, the sizes or the seed changes the hash.
std::string spec_hash(const ExperimentSpec& spec);

// Two-coordinate benchmark configuration expressed on the coarse clock where
// the slow block mean-reverts at rate 2*ln(2.5) with diffusion sqrt(20):
// phi = diag(0.3, 0.7), omega_half = [[1,1],[0,2]], a = (1,1)', T = 7200,
// H_T = 60, anchors (k-1)/20 for k = 1..20, 200 replications, seed 1.
ExperimentSpec bivariate_ulr_preset();

struct FigSuiteResult {
  std::string out_dir;
  std::vector<std::string> artifacts;  // file names in emission order
  std::string hash;
  bool degenerate = false;  // sample variance vanished; correlation tables zeroed
};

// Simulates one path under the experiment spec and writes the figure tables:
// the trajectory, the window means over the anchor grid, and the standard,
// averaged-window and window-mean autocorrelation tables, each as CSV with a
// companion SVG line plot.  Every artifact starts with a comment line naming
// the experiment hash, and a manifest file lists artifact -> hash.  Output is
// byte-identical across reruns of the same experiment spec.
FigSuiteResult run_fig_suite(const ExperimentSpec& spec, const std::string& out_dir,
                             bool with_svg = true);

struct VarianceCheckRow {
  long H = 0;
  double empirical = 0.0;  // H times the variance of the window-mean innovation
  double predicted = 0.0;  // (1/3) s^2 exp(2 theta c) H^2 / T
  double ratio = 0.0;
  bool flagged = false;  // window too wide for the asymptotic regime (H^2 > T)
};

// Monte Carlo check of the slow-innovation variance approximation for a
// scalar slow block.  For each H the innovation part of the window mean over
// (cT, cT + H] is simulated reps times from a zero start and H * Var is
// compared against the closed-form rate above.  s = 0 gives exact zeros.
std::vector<VarianceCheckRow> local_mean_variance_check(const ModelParams& params, double c,
                                                        const std::vector<long>& H_grid, long T,
                                                        long reps, unsigned long seed);

struct DispersionRow {
  long T = 0;
  long H = 0;
  double iqr_theta = 0.0;
  double iqr_phi = 0.0;
  double ratio_theta = 0.0;  // vs the first row
  double ratio_phi = 0.0;
  bool flagged = false;  // dispersion undefined (fewer than two replications)
};

// Dispersion of the drift estimate against sample length at a fixed anchor
// count K: anchors (k-1)/K, window T/30, two-coordinate benchmark model with
// fast innovations shrunk to a quarter scale.  Each replication fits theta
// from the dominant factor of the window means and the second diagonal
// autoregressive coefficient from averaged window autocovariances; rows
// report interquartile ranges and ratios against the first sample length.
std::vector<DispersionRow> drift_dispersion_study(long K, const std::vector<long>& T_grid,
                                                  long reps, unsigned long seed);

// Plain-text key = value spec documents.  Keys: name, T, H_T, K, reps, seed,
// c_grid (comma or space separated) or even_grid (anchor count m giving
// (k-1)/m), params_file (model parameter file; the two-coordinate benchmark
// model when absent), outputs (comma separated artifact names).  Unknown or
// duplicate keys and malformed numbers are rejected with line numbers.
ExperimentSpec parse_experiment_spec(const std::string& text);
ExperimentSpec load_experiment_spec(const std::string& path);

}  // namespace ulr
