#pragma once

#include <string>
#include <vector>

#include "ulr/linalg.hpp"
#include "ulr/predict.hpp"

namespace ulr {

// A dated multi-series panel; column t of values holds observation t of every
// series, so the layout matches the n x T convention used everywhere else.
struct SeriesBundle {
  std::vector<std::string> names;  // numeric columns, header order
  std::vector<std::string> dates;  // one label per observation, all distinct
  Mat values;                      // n x T_obs
};

// Non-overlapping block averages of a bundle: the slow-component proxy.
struct FilteredULR {
  std::vector<std::string> names;
  long block_len = 11;
  long dropped = 0;                 // trailing observations not covered by a block
  std::vector<std::string> centers; // date labels at block midpoints
  Mat averages;                     // n x n_blocks
};

// Parses a CSV with a leading date column and one or more numeric columns.
// Ragged rows, duplicate dates, empty cells and non-numeric fields are
// rejected with the offending line number.
SeriesBundle ingest_csv(const std::string& path);

// Averages each series over consecutive blocks of block_len observations
// (at least 2); a trailing partial block is dropped and counted.  The mean
// of the block averages equals the mean of the covered observations.
FilteredULR block_filter(const SeriesBundle& bundle, long block_len);

// Persistence carried from the block clock back to the observation clock.
double block_to_obs_persistence(double rho_block, long block_len);

// One fitted row of the persistence table.
struct UlrFitRow {
  std::string name;
  double rho_block = 0.0;  // signed AR(1) coefficient of the demeaned block means
  double rho_obs = 0.0;    // |rho_block|^(1 / block_len)
  double sigma2 = 0.0;     // innovation variance on the block clock
  double mean = 0.0;       // sample mean added back for forecasting
  bool negative = false;   // the block coefficient came out below zero
  bool weak = false;       // magnitude below the sampling noise scale
  bool degenerate = false; // constant series, coefficients meaningless
};

// Zero-mean AR(1) maximum likelihood on each demeaned filtered series.
std::vector<UlrFitRow> fit_ulr_ar1(const FilteredULR& filtered);

// One row of the horizon-interval table: a direct autoregressive forecast on
// the observation clock, a plug-in slow-component interval on the block
// clock, and the estimation-risk-adjusted interval from the level split.
struct HorizonRow {
  std::string name;
  long horizon_obs = 0;
  long horizon_blocks = 0;  // round(horizon_obs / block_len)
  double ar_center = 0.0, ar_lower = 0.0, ar_upper = 0.0;
  double plug_center = 0.0, plug_lower = 0.0, plug_upper = 0.0;
  double robust_center = 0.0, robust_lower = 0.0, robust_upper = 0.0;
  double alpha1_star = 0.0;  // level spent on the drift confidence set
  bool negative = false;     // block persistence fitted below zero
  bool degenerate = false;   // no usable variation; widths collapse to zero
  bool clipped = false;      // the drift confidence set hit the belt boundary
};

// Builds the three-interval table at the given two-sided level.  The direct
// column fits AR(p) with an intercept by least squares on the raw series
// (1 <= p <= 4) and propagates the innovation variance through the moving
// average weights.  The plug-in column applies the fitted block persistence
// at round(horizon_obs / block_len) blocks.  The robust column splits the
// level between a simulated-belt confidence set for the drift and the
// quantile bound, mirroring the one-sided construction at alpha / 2; its
// interval always contains the plug-in one.  A prebuilt belt with
// K = number of blocks may be supplied; otherwise one is simulated from
// belt_seed with belt_reps paths per grid cell.
std::vector<HorizonRow> horizon_intervals(const SeriesBundle& bundle, const FilteredULR& filtered,
                                          long horizon_obs, double alpha, long p = 1,
                                          const ConfidenceBelt* belt = nullptr,
                                          long belt_reps = 1000, unsigned long belt_seed = 2718);

struct ApplyResult {
  std::string out_dir;
  std::vector<std::string> files;  // table1.csv, table2.csv, filtered.csv, run.log
  std::vector<UlrFitRow> table1;
  std::vector<HorizonRow> table2;
};

// End-to-end run: ingest, filter, fit, tabulate, and write the report files.
// Reruns on the same input produce byte-identical output.
ApplyResult run_apply(const std::string& input_csv, long block_len, long horizon_obs,
                      double alpha, const std::string& out_dir, long p = 1);

}  // namespace ulr
