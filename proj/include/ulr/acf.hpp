#pragma once

#include <vector>

#include "ulr/linalg.hpp"

namespace ulr {

enum class AcfKind { standard, distant, local, averaged_sr, long_run_of_means };

// Tabulated autocovariance estimates for reporting; lags strictly increasing.
struct AcfEstimate {
  AcfKind kind = AcfKind::standard;
  std::vector<long> lags;
  std::vector<Mat> values;
  std::vector<double> c_grid;  // window anchors, when the kind uses them
  long H_T = 0;                // window width, when the kind uses one
  long K = 0;                  // number of grid points, when applicable
};

// Window means over (c_k T, c_k T + H_T] for each grid point.
struct LocalMeans {
  std::vector<double> c_grid;
  Mat means;  // n x K, column k is the window mean at c_k
  long H_T = 0;
};

// Demeaned lag-h cross product over the full sample: the mean of y_t y_{t-h}'
// minus the product of the two window means (current values and lagged values
// are demeaned separately).
Mat sample_acov(const Mat& y, long h);

// The same statistic at the long lag h = round(c T). With demean off it is
// the raw cross-product mean, whose limit is trajectory-dependent.
Mat sample_acov_distant(const Mat& y, double c, bool demean);

// Windowed lag-h autocovariance over (cT, cT + H_T], normalized by H_T.
// The lagged index reaches h observations before the window start, so the
// window must satisfy cT >= h and cT + H_T <= T; anything else throws.
Mat local_acov(const Mat& y, double c, long H_T, long h);

// Window means on the anchor grid; windows that spill past the end of the
// sample are rejected rather than truncated.
LocalMeans local_means(const Mat& y, const std::vector<double>& c_grid, long H_T);

// Arithmetic mean of local_acov across the anchor grid.
Mat averaged_sr_acov(const Mat& y, const std::vector<double>& c_grid, long H_T, long h);

// sample_acov applied to the K window means on the coarse time scale.
// Throws for lag >= K and for a degenerate (constant) mean series.
Mat acf_of_means(const LocalMeans& means, long lag);

// Table builders used by reporting and the command-line tool.
AcfEstimate standard_acf_table(const Mat& y, long max_lag);
AcfEstimate distant_acf_table(const Mat& y, const std::vector<double>& c_values, bool demean);
AcfEstimate local_acf_table(const Mat& y, double c, long H_T, long max_lag);
AcfEstimate averaged_acf_table(const Mat& y, const std::vector<double>& c_grid, long H_T,
                               long max_lag);
AcfEstimate means_acf_table(const LocalMeans& means, long max_lag);

}  // namespace ulr
