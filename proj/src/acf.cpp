#include "ulr/acf.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ulr {

namespace {

// Demeaned lag-h cross product over columns [first, last): mean of
// y_t y_{t-h}' minus the outer product of the two value-window means.
Mat windowed_acov(const Mat& y, Eigen::Index first, Eigen::Index last, long h, bool demean) {
  const Eigen::Index n = y.rows();
  const Eigen::Index count = last - first;
  Mat cross = Mat::Zero(n, n);
  Vec mean_cur = Vec::Zero(n);
  Vec mean_lag = Vec::Zero(n);
  for (Eigen::Index t = first; t < last; ++t) {
    cross.noalias() += y.col(t) * y.col(t - h).transpose();
    mean_cur += y.col(t);
    mean_lag += y.col(t - h);
  }
  cross /= static_cast<double>(count);
  if (!demean) return cross;
  mean_cur /= static_cast<double>(count);
  mean_lag /= static_cast<double>(count);
  return cross - mean_cur * mean_lag.transpose();
}

long anchor_index(double c, Eigen::Index T) {
  if (!(c >= 0.0) || !(c <= 1.0)) {
    throw std::invalid_argument("window anchor c must lie in [0, 1]");
  }
  return std::lround(c * static_cast<double>(T));
}

}  // namespace

Mat sample_acov(const Mat& y, long h) {
  const Eigen::Index T = y.cols();
  if (h < 0) throw std::invalid_argument("lag must be nonnegative");
  if (h >= T) {
    throw std::invalid_argument("lag " + std::to_string(h) + " needs a series longer than " +
                                std::to_string(T));
  }
  return windowed_acov(y, h, T, h, /*demean=*/true);
}

Mat sample_acov_distant(const Mat& y, double c, bool demean) {
  const Eigen::Index T = y.cols();
  long h = anchor_index(c, T);
  if (h < 1 || h >= T) {
    throw std::invalid_argument("distant lag round(cT) = " + std::to_string(h) +
                                " leaves no usable window");
  }
  return windowed_acov(y, h, T, h, demean);
}

Mat local_acov(const Mat& y, double c, long H_T, long h) {
  const Eigen::Index T = y.cols();
  if (H_T < 1) throw std::invalid_argument("window width must be at least 1");
  if (h < 0) throw std::invalid_argument("lag must be nonnegative");
  if (h > H_T) throw std::invalid_argument("lag must not exceed the window width");
  long i0 = anchor_index(c, T);
  if (i0 + H_T > T) {
    throw std::invalid_argument("window (cT, cT+H] spills past the end of the sample");
  }
  if (i0 < h) {
    throw std::invalid_argument("lagged window reaches before the start of the sample");
  }
  return windowed_acov(y, i0, i0 + H_T, h, /*demean=*/true);
}

LocalMeans local_means(const Mat& y, const std::vector<double>& c_grid, long H_T) {
  const Eigen::Index T = y.cols();
  if (H_T < 1) throw std::invalid_argument("window width must be at least 1");
  if (c_grid.empty()) throw std::invalid_argument("anchor grid is empty");
  LocalMeans out;
  out.c_grid = c_grid;
  out.H_T = H_T;
  out.means.resize(y.rows(), static_cast<Eigen::Index>(c_grid.size()));
  for (size_t k = 0; k < c_grid.size(); ++k) {
    long i0 = anchor_index(c_grid[k], T);
    if (i0 + H_T > T) {
      throw std::invalid_argument("window at c = " + std::to_string(c_grid[k]) +
                                  " spills past the end of the sample");
    }
    out.means.col(static_cast<Eigen::Index>(k)) =
        y.middleCols(i0, H_T).rowwise().mean();
  }
  return out;
}

Mat averaged_sr_acov(const Mat& y, const std::vector<double>& c_grid, long H_T, long h) {
  if (c_grid.empty()) throw std::invalid_argument("anchor grid is empty");
  Mat acc = Mat::Zero(y.rows(), y.rows());
  for (double c : c_grid) acc += local_acov(y, c, H_T, h);
  return acc / static_cast<double>(c_grid.size());
}

Mat acf_of_means(const LocalMeans& means, long lag) {
  const Eigen::Index K = means.means.cols();
  if (lag >= K) {
    throw std::invalid_argument("lag must be below the number of window means");
  }
  Mat var0 = windowed_acov(means.means, 0, K, 0, /*demean=*/true);
  if (var0.trace() <= 0.0) {
    throw std::domain_error("window means are constant; autocovariance undefined");
  }
  return sample_acov(means.means, lag);
}

AcfEstimate standard_acf_table(const Mat& y, long max_lag) {
  AcfEstimate est;
  est.kind = AcfKind::standard;
  for (long h = 0; h <= max_lag; ++h) {
    est.lags.push_back(h);
    est.values.push_back(sample_acov(y, h));
  }
  return est;
}

AcfEstimate distant_acf_table(const Mat& y, const std::vector<double>& c_values, bool demean) {
  AcfEstimate est;
  est.kind = AcfKind::distant;
  est.c_grid = c_values;
  long prev = -1;
  for (double c : c_values) {
    long h = std::lround(c * static_cast<double>(y.cols()));
    if (h <= prev) throw std::invalid_argument("distant lags must be strictly increasing");
    prev = h;
    est.lags.push_back(h);
    est.values.push_back(sample_acov_distant(y, c, demean));
  }
  return est;
}

AcfEstimate local_acf_table(const Mat& y, double c, long H_T, long max_lag) {
  AcfEstimate est;
  est.kind = AcfKind::local;
  est.c_grid = {c};
  est.H_T = H_T;
  for (long h = 0; h <= max_lag; ++h) {
    est.lags.push_back(h);
    est.values.push_back(local_acov(y, c, H_T, h));
  }
  return est;
}

AcfEstimate averaged_acf_table(const Mat& y, const std::vector<double>& c_grid, long H_T,
                               long max_lag) {
  AcfEstimate est;
  est.kind = AcfKind::averaged_sr;
  est.c_grid = c_grid;
  est.H_T = H_T;
  est.K = static_cast<long>(c_grid.size());
  for (long h = 0; h <= max_lag; ++h) {
    est.lags.push_back(h);
    est.values.push_back(averaged_sr_acov(y, c_grid, H_T, h));
  }
  return est;
}

AcfEstimate means_acf_table(const LocalMeans& means, long max_lag) {
  AcfEstimate est;
  est.kind = AcfKind::long_run_of_means;
  est.c_grid = means.c_grid;
  est.H_T = means.H_T;
  est.K = static_cast<long>(means.c_grid.size());
  for (long h = 0; h <= max_lag; ++h) {
    est.lags.push_back(h);
    est.values.push_back(acf_of_means(means, h));
  }
  return est;
}

}  // namespace ulr
