#include "ulr/estimate.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace ulr {

namespace {

// Clip negative eigenvalues of a symmetric matrix at zero.  Negatives at
// roundoff scale are zeroed silently; anything material raises the flag.
Mat clip_psd(const Mat& sym, bool* clipped) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
  Vec lam = es.eigenvalues();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  bool any = false;
  bool material = false;
  for (long i = 0; i < lam.size(); ++i) {
    if (lam[i] < 0.0) {
      any = true;
      if (lam[i] < -1e-12 * scale) material = true;
      lam[i] = 0.0;
    }
  }
  if (clipped != nullptr) *clipped = material;
  if (!any) return sym;
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

// Lower-triangular factor L with L L^T = a for a symmetric PSD input.  A
// pivot at or below roundoff scale zeroes its column, which is exact for PSD
// matrices where a vanishing pivot forces the residual column to vanish too.
Mat lower_cholesky_psd(const Mat& a) {
  const long n = a.rows();
  Mat l = Mat::Zero(n, n);
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  for (long j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (d <= 1e-14 * scale) continue;
    l(j, j) = std::sqrt(d);
    for (long i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return l;
}

Mat vec_to_square(const Vec& v, long n) {
  Mat m(n, n);
  for (long j = 0; j < n; ++j) m.col(j) = v.segment(j * n, n);
  return m;
}

Vec square_to_vec(const Mat& m) {
  Vec v(m.size());
  for (long j = 0; j < m.cols(); ++j) v.segment(j * m.rows(), m.rows()) = m.col(j);
  return v;
}

}  // namespace

SRFit step1_sr(const Mat& gamma0, const Mat& gamma1) {
  if (gamma0.rows() != gamma0.cols() || gamma1.rows() != gamma1.cols() ||
      gamma0.rows() != gamma1.rows() || gamma0.rows() == 0) {
    throw std::invalid_argument("moment matrices must be square with matching dimension");
  }
  Eigen::FullPivLU<Mat> lu(gamma0.transpose());
  if (!lu.isInvertible()) throw std::domain_error("lag-0 moment matrix is singular");

  SRFit fit;
  fit.phi_hat = lu.solve(gamma1.transpose()).transpose();
  Mat omega = gamma0 - fit.phi_hat * gamma0 * fit.phi_hat.transpose();
  omega = 0.5 * (omega + omega.transpose()).eval();
  fit.omega_hat = clip_psd(omega, &fit.omega_clipped);
  fit.omega_half_hat = lower_cholesky_psd(fit.omega_hat);
  fit.spectral_radius = spectral_radius(fit.phi_hat);
  fit.unstable = fit.spectral_radius >= 1.0;
  return fit;
}

LocalMeans step2_means(const Mat& y, const std::vector<double>& c_grid, long H_T) {
  return local_means(y, c_grid, H_T);
}

PCAFit step3_pca(const LocalMeans& means, double threshold) {
  const Mat& m = means.means;
  const long n = m.rows();
  const long k = m.cols();
  if (k < 2) throw std::invalid_argument("factor extraction needs at least two anchors");
  if (!(threshold >= 0.0) || !(threshold < 1.0)) {
    throw std::invalid_argument("eigenvalue-share threshold must lie in [0, 1)");
  }

  Eigen::SelfAdjointEigenSolver<Mat> es(m * m.transpose());
  if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");

  PCAFit fit;
  fit.eigenvalues = es.eigenvalues().reverse();
  fit.shares = Vec::Zero(n);
  const double trace = fit.eigenvalues.sum();
  if (!(trace > 0.0)) {
    fit.L_hat = 0;
    fit.no_factor = true;
    fit.a_hat = Mat::Zero(n, 0);
    fit.y_l_hat = Mat::Zero(0, k);
    return fit;
  }
  fit.shares = fit.eigenvalues / trace;
  long l_hat = 0;
  for (long i = 0; i < n; ++i) {
    if (fit.shares[i] > threshold) ++l_hat;
  }
  fit.L_hat = l_hat;
  fit.no_factor = (l_hat == 0);
  fit.a_hat = Mat(n, l_hat);
  for (long j = 0; j < l_hat; ++j) {
    Vec col = es.eigenvectors().col(n - 1 - j);
    for (long i = 0; i < n; ++i) {
      if (std::abs(col[i]) > 1e-12) {
        if (col[i] < 0.0) col = -col;
        break;
      }
    }
    fit.a_hat.col(j) = col;
  }
  fit.y_l_hat = fit.a_hat.transpose() * m;
  return fit;
}

Ar1Fit ar1_mle(const Vec& series) {
  const long n = series.size();
  if (n < 3) throw std::invalid_argument("autoregressive fit needs at least three points");
  if (series.maxCoeff() == series.minCoeff()) {
    throw std::domain_error("constant series: autoregressive coefficient is at the boundary");
  }
  const long m = n - 1;
  double s00 = 0.0, s01 = 0.0, s11 = 0.0;
  for (long t = 1; t < n; ++t) {
    s00 += series[t - 1] * series[t - 1];
    s01 += series[t - 1] * series[t];
    s11 += series[t] * series[t];
  }
  const auto ssr = [&](double rho) { return s11 - 2.0 * rho * s01 + rho * rho * s00; };

  // 512-point scan over (-0.999, 0.999), then golden-section polish around the
  // best cell.  The objective is the residual sum of squares: the stationary
  // variance concentrates out of the conditional Gaussian likelihood.
  constexpr double kLo = -0.999;
  constexpr double kHi = 0.999;
  constexpr int kGrid = 512;
  const double step = (kHi - kLo) / kGrid;
  double best_rho = 0.0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    const double rho = kLo + (i + 0.5) * step;
    const double v = ssr(rho);
    if (v < best_val) {
      best_val = v;
      best_rho = rho;
    }
  }
  double lo = std::max(kLo, best_rho - step);
  double hi = std::min(kHi, best_rho + step);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo);
  double x2 = lo + invphi * (hi - lo);
  double f1 = ssr(x1);
  double f2 = ssr(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = ssr(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = ssr(x2);
    }
  }

  Ar1Fit fit;
  fit.rho_hat = 0.5 * (lo + hi);
  if (fit.rho_hat >= kHi - 1e-9) {
    fit.rho_hat = kHi;
    fit.boundary = true;
  } else if (fit.rho_hat <= kLo + 1e-9) {
    fit.rho_hat = kLo;
    fit.boundary = true;
  }
  const double vhat = ssr(fit.rho_hat) / static_cast<double>(m);
  if (!(vhat > 1e-300)) throw std::domain_error("vanishing innovation variance");
  fit.sigma2_hat = vhat / (1.0 - fit.rho_hat * fit.rho_hat);
  fit.loglik = -0.5 * static_cast<double>(m) * (std::log(2.0 * M_PI * vhat) + 1.0);
  fit.nonpositive = fit.rho_hat <= 0.0;
  fit.weak = std::abs(fit.rho_hat) < 1.96 / std::sqrt(static_cast<double>(m));
  return fit;
}

OUFit step4_mle_ou(const Mat& y_l_hat, long K_scale) {
  const long l = y_l_hat.rows();
  const long k = y_l_hat.cols();
  if (l < 1) throw std::invalid_argument("drift fit needs at least one factor");
  if (k < 3) throw std::invalid_argument("drift fit needs at least three grid points");
  if (K_scale < 1) throw std::invalid_argument("inverse grid spacing must be positive");
  const double kk = static_cast<double>(K_scale);

  OUFit fit;
  if (l == 1) {
    fit.ar1 = ar1_mle(y_l_hat.row(0).transpose());
    const double rho_mag = std::abs(fit.ar1.rho_hat);
    if (!(rho_mag > 0.0)) throw std::domain_error("autoregressive coefficient is exactly zero");
    const double theta = -kk * std::log(rho_mag);
    fit.theta_hat = Mat::Constant(1, 1, theta);
    fit.s_hat = Mat::Constant(1, 1, std::sqrt(2.0 * theta * fit.ar1.sigma2_hat));
    fit.loglik = fit.ar1.loglik;
    return fit;
  }

  const long m = k - 1;
  Mat c0 = Mat::Zero(l, l);
  Mat c1 = Mat::Zero(l, l);
  for (long t = 1; t < k; ++t) {
    c0 += y_l_hat.col(t - 1) * y_l_hat.col(t - 1).transpose();
    c1 += y_l_hat.col(t) * y_l_hat.col(t - 1).transpose();
  }
  Eigen::FullPivLU<Mat> lu(c0.transpose());
  if (!lu.isInvertible()) throw std::domain_error("factor path has a degenerate lag structure");
  Mat b = lu.solve(c1.transpose()).transpose();
  fit.theta_hat = -kk * principal_log(b);
  if (!fit.theta_hat.allFinite()) throw std::domain_error("drift estimate is not finite");

  Mat v = Mat::Zero(l, l);
  for (long t = 1; t < k; ++t) {
    Vec e = y_l_hat.col(t) - b * y_l_hat.col(t - 1);
    v += e * e.transpose();
  }
  v /= static_cast<double>(m);

  Eigen::SelfAdjointEigenSolver<Mat> ev(v);
  if (ev.eigenvalues().minCoeff() <= 0.0) {
    throw std::domain_error("innovation covariance of the factor path is singular");
  }
  const double logdet = ev.eigenvalues().array().log().sum();
  fit.loglik = -0.5 * static_cast<double>(m) *
               (static_cast<double>(l) * std::log(2.0 * M_PI) + logdet + static_cast<double>(l));

  // Invert the exact one-step discretization to recover the diffusion square:
  // (Theta (+) Theta) vec(V) = (I - exp(-(Theta (+) Theta)/K)) vec(S S^T).
  Mat ks = kron_sum(fit.theta_hat);
  Mat f = Mat::Identity(l * l, l * l) - mat_exp(-ks / kk);
  Eigen::FullPivLU<Mat> luf(f);
  if (!luf.isInvertible()) {
    throw std::domain_error("discretization map is singular; diffusion not identified");
  }
  Mat ss = vec_to_square(luf.solve(ks * square_to_vec(v)), l);
  ss = 0.5 * (ss + ss.transpose()).eval();
  Mat ss_psd = clip_psd(ss, &fit.s_clipped);
  Eigen::SelfAdjointEigenSolver<Mat> es(ss_psd);
  fit.s_hat = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
              es.eigenvectors().transpose();
  return fit;
}

std::vector<ResidualRow> step5_residuals(const Mat& y, const EstimationReport& report,
                                         const std::vector<double>& gamma_grid) {
  const long n = y.rows();
  const long t_max = y.cols();
  if (t_max < 1) throw std::invalid_argument("path is empty");
  if (report.phi_hat.rows() != n || report.phi_hat.cols() != n) {
    throw std::invalid_argument("transition matrix does not match the path dimension");
  }
  if (report.L_hat > 0 && report.a_hat.rows() != n) {
    throw std::invalid_argument("factor loading does not match the path dimension");
  }
  if (gamma_grid.size() < 2) {
    throw std::invalid_argument("need at least two evaluation points");
  }

  const auto anchor_of = [&](double gamma) -> long {
    for (std::size_t j = 0; j < report.c_grid.size(); ++j) {
      if (std::abs(report.c_grid[j] - gamma) <= 1e-9) return static_cast<long>(j);
    }
    throw std::invalid_argument("evaluation point is not an anchor of the estimation grid");
  };
  const auto slow_at = [&](long j) -> Vec {
    if (report.L_hat == 0) return Vec::Zero(n);
    return report.a_hat * report.y_l_hat.col(j);
  };

  std::vector<long> idx(gamma_grid.size());
  std::vector<long> anchor(gamma_grid.size());
  for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
    const double g = gamma_grid[i];
    if (i > 0 && !(g > gamma_grid[i - 1])) {
      throw std::invalid_argument("evaluation points must be strictly increasing");
    }
    if (!(g > 0.0) || !(g <= 1.0)) {
      throw std::invalid_argument("evaluation points must lie in (0, 1]");
    }
    idx[i] = std::lround(g * static_cast<double>(t_max));
    if (idx[i] < 1 || idx[i] > t_max) throw std::invalid_argument("evaluation point outside the data");
    if (i > 0 && idx[i] <= idx[i - 1]) {
      throw std::invalid_argument("evaluation points collapse onto the same observation");
    }
    anchor[i] = anchor_of(g);
  }

  std::vector<ResidualRow> table;
  table.reserve(gamma_grid.size() - 1);
  for (std::size_t i = 1; i < gamma_grid.size(); ++i) {
    ResidualRow row;
    row.gamma = gamma_grid[i];
    row.observed = y.col(idx[i] - 1);
    Mat power = matrix_power(report.phi_hat, idx[i] - idx[i - 1]);
    row.fitted = power * (y.col(idx[i - 1] - 1) - slow_at(anchor[i - 1])) + slow_at(anchor[i]);
    row.residual = row.observed - row.fitted;
    table.push_back(std::move(row));
  }
  return table;
}

Mat long_run_variance(const Mat& y_window, long bandwidth) {
  if (y_window.cols() < 2) throw std::invalid_argument("window too short");
  if (bandwidth < 0) throw std::invalid_argument("bandwidth must be nonnegative");
  if (bandwidth >= y_window.cols()) {
    throw std::invalid_argument("bandwidth must be smaller than the window length");
  }
  Mat sigma = sample_acov(y_window, 0);
  for (long h = 1; h <= bandwidth; ++h) {
    const double w = 1.0 - static_cast<double>(h) / static_cast<double>(bandwidth + 1);
    Mat g = sample_acov(y_window, h);
    sigma += w * (g + g.transpose());
  }
  return sigma;
}

EstimationReport estimate_pipeline(const Mat& y, const std::vector<double>& c_grid, long H_T,
                                   double threshold, long lrv_bandwidth) {
  const long t_max = y.cols();
  if (c_grid.size() < 2) throw std::invalid_argument("anchor grid needs at least two points");
  const double spacing = c_grid[1] - c_grid[0];
  if (!(spacing > 0.0)) throw std::invalid_argument("anchor grid must be increasing");
  for (std::size_t i = 1; i < c_grid.size(); ++i) {
    if (std::abs(c_grid[i] - c_grid[i - 1] - spacing) > 1e-9) {
      throw std::invalid_argument("anchor grid must be evenly spaced");
    }
  }
  const long k_scale = std::lround(1.0 / spacing);
  if (k_scale < 2 || std::abs(spacing * static_cast<double>(k_scale) - 1.0) > 1e-6) {
    throw std::invalid_argument("anchor spacing must be the reciprocal of an integer >= 2");
  }

  EstimationReport report;
  report.c_grid = c_grid;
  report.H_T = H_T;
  report.K_scale = k_scale;
  report.threshold = threshold;
  report.means = step2_means(y, c_grid, H_T);

  // The lag-1 moment needs one observation before each window, so anchors at
  // the very origin are excluded from the moment fit (but kept for the means).
  std::vector<double> lag_grid;
  for (double c : c_grid) {
    if (std::lround(c * static_cast<double>(t_max)) >= 1) lag_grid.push_back(c);
  }
  if (lag_grid.empty()) throw std::invalid_argument("no anchor supports a one-step lag");
  Mat gamma0 = averaged_sr_acov(y, lag_grid, H_T, 0);
  Mat gamma1 = averaged_sr_acov(y, lag_grid, H_T, 1);
  SRFit sr = step1_sr(gamma0, gamma1);
  report.phi_hat = sr.phi_hat;
  report.omega_hat = sr.omega_hat;
  report.omega_half_hat = sr.omega_half_hat;
  report.spectral_radius_phi = sr.spectral_radius;
  report.flags.omega_clipped = sr.omega_clipped;
  report.flags.phi_unstable = sr.unstable;

  PCAFit pca = step3_pca(report.means, threshold);
  report.L_hat = pca.L_hat;
  report.a_hat = pca.a_hat;
  report.y_l_hat = pca.y_l_hat;
  report.eigenvalues = pca.eigenvalues;
  report.flags.no_factor = pca.no_factor;

  if (pca.L_hat >= 1) {
    OUFit ou = step4_mle_ou(pca.y_l_hat, k_scale);
    report.theta_hat = ou.theta_hat;
    report.s_hat = ou.s_hat;
    report.ou_loglik = ou.loglik;
    report.ar1 = ou.ar1;
    report.flags.s_clipped = ou.s_clipped;
    if (pca.L_hat == 1) {
      report.flags.rho_nonpositive = ou.ar1.nonpositive;
      report.flags.rho_boundary = ou.ar1.boundary;
      report.flags.rho_weak = ou.ar1.weak;
    }
  } else {
    report.theta_hat = Mat::Zero(0, 0);
    report.s_hat = Mat::Zero(0, 0);
  }

  long bw = lrv_bandwidth;
  if (bw < 0) bw = std::max<long>(1, std::lround(2.0 * std::cbrt(static_cast<double>(H_T))));
  if (bw >= H_T) throw std::invalid_argument("long-run variance bandwidth must be below the window length");
  Mat sigma = Mat::Zero(y.rows(), y.rows());
  for (double c : c_grid) {
    const long i0 = std::lround(c * static_cast<double>(t_max));
    sigma += long_run_variance(y.middleCols(i0, H_T), bw);
  }
  report.sigma_inf_hat = sigma / static_cast<double>(c_grid.size());

  if (lag_grid.size() >= 2) {
    report.diagnostics = step5_residuals(y, report, lag_grid);
  }
  return report;
}

}  // namespace ulr
