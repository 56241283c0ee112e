#pragma once

#include <vector>

#include "ulr/acf.hpp"
#include "ulr/linalg.hpp"

namespace ulr {

// Conditions detected while fitting.  Estimation never repairs data silently:
// every adjustment (clipping, magnitude fallback) leaves a flag here.
struct FitFlags {
  bool omega_clipped = false;    // innovation covariance had negative eigenvalues clipped to 0
  bool phi_unstable = false;     // spectral radius of the fitted transition >= 1
  bool no_factor = false;        // every eigenvalue share fell at or below the threshold
  bool rho_nonpositive = false;  // coarse-grid AR coefficient <= 0; magnitude used for the decay rate
  bool rho_boundary = false;     // coarse-grid AR coefficient pinned at the search boundary
  bool rho_weak = false;         // |rho_hat| below the 1.96/sqrt(#pairs) significance band
  bool s_clipped = false;        // implied diffusion square was indefinite, clipped to PSD
};

// Fast-component transition fit from a lag-0 / lag-1 moment pair.
struct SRFit {
  Mat phi_hat;
  Mat omega_hat;       // symmetrized, eigenvalues clipped at zero when negative
  Mat omega_half_hat;  // lower-triangular factor of omega_hat (recursive identification)
  double spectral_radius = 0.0;
  bool omega_clipped = false;
  bool unstable = false;
};

// Principal-component extraction of the common slow level from local means.
struct PCAFit {
  long L_hat = 0;
  Mat a_hat;        // n x L_hat, orthonormal columns, first nonzero entry of each positive
  Mat y_l_hat;      // L_hat x K factor path on the anchor grid
  Vec eigenvalues;  // full spectrum of the outer-product matrix, descending
  Vec shares;       // eigenvalues / trace; all zero when the trace vanishes
  bool no_factor = false;
};

// Scalar AR(1) fit by conditional Gaussian likelihood.  sigma2_hat is the
// stationary variance; the innovation variance is sigma2_hat * (1 - rho^2).
struct Ar1Fit {
  double rho_hat = 0.0;
  double sigma2_hat = 0.0;
  double loglik = 0.0;
  bool nonpositive = false;
  bool boundary = false;
  bool weak = false;
};

// Continuous-time drift and diffusion backed out of the coarse-grid factor path.
struct OUFit {
  Mat theta_hat;  // L x L
  Mat s_hat;      // L x L, PSD square root of the implied diffusion square
  double loglik = 0.0;
  Ar1Fit ar1;     // populated for the scalar branch only
  bool s_clipped = false;
};

// One row of the coarse-horizon fit diagnostic: the observation at fraction
// gamma of the sample against its prediction from the previous anchor.
struct ResidualRow {
  double gamma = 0.0;
  Vec observed;
  Vec fitted;
  Vec residual;
};

struct EstimationReport {
  Mat phi_hat;
  Mat omega_hat;
  Mat omega_half_hat;
  long L_hat = 0;
  Mat a_hat;
  Mat y_l_hat;
  Mat theta_hat;
  Mat s_hat;
  Mat sigma_inf_hat;
  Vec eigenvalues;
  std::vector<ResidualRow> diagnostics;

  // Echo of the configuration plus scalar diagnostics.
  std::vector<double> c_grid;
  long H_T = 0;
  long K_scale = 0;  // inverse anchor spacing driving the coarse-grid decay rate
  double threshold = 0.0;
  LocalMeans means;
  double spectral_radius_phi = 0.0;
  double ou_loglik = 0.0;
  Ar1Fit ar1;
  FitFlags flags;
};

// Transition and innovation covariance solving gamma1 = phi * gamma0 and the
// stationarity identity omega = gamma0 - phi * gamma0 * phi^T.  Throws
// std::domain_error when gamma0 is singular.
SRFit step1_sr(const Mat& gamma0, const Mat& gamma1);

// Window means of the path over the anchor grid (forwards to local_means).
LocalMeans step2_means(const Mat& y, const std::vector<double>& c_grid, long H_T);

// Eigendecomposition of sum_k m(c_k) m(c_k)^T.  Factors are the eigenvectors
// whose eigenvalue share of the trace exceeds the threshold.  Requires at
// least two anchors.
PCAFit step3_pca(const LocalMeans& means, double threshold);

// Conditional Gaussian AR(1) likelihood maximized by a 512-point grid scan
// over (-0.999, 0.999) followed by golden-section refinement.  Throws
// std::domain_error on constant input or vanishing innovation variance.
Ar1Fit ar1_mle(const Vec& series);

// Drift and diffusion of the slow component from its factor path sampled on a
// grid of spacing 1/K_scale.  Scalar branch: theta = -K * ln(rho) with the
// magnitude of rho used (and a flag raised) when rho <= 0, and
// s^2 = 2 * theta * sigma_c^2.  Multi-factor branch: least-squares VAR(1),
// principal matrix logarithm, and the diffusion square recovered from the
// innovation covariance through the exact discretization relation.
OUFit step4_mle_ou(const Mat& y_l_hat, long K_scale);

// Coarse-horizon predictions at fractions gamma_grid of the sample: the
// observation at the previous anchor is stripped of its slow level, propagated
// by the matched power of phi_hat, and re-anchored at the current slow level.
// Every gamma must coincide with an anchor of the report's c_grid.
std::vector<ResidualRow> step5_residuals(const Mat& y, const EstimationReport& report,
                                         const std::vector<double>& gamma_grid);

// Bartlett-weighted sum of sample autocovariances up to the bandwidth;
// symmetric PSD by construction.  Requires bandwidth < number of columns.
Mat long_run_variance(const Mat& y_window, long bandwidth);

// Full pass: moment fit on the anchors supporting a one-step lag, window
// means, factor extraction, coarse-grid drift fit, windowed long-run variance
// (averaged over anchors), and the residual diagnostic table.  The anchor grid
// must be evenly spaced; lrv_bandwidth < 0 selects 2 * cbrt(H_T).
EstimationReport estimate_pipeline(const Mat& y, const std::vector<double>& c_grid, long H_T,
                                   double threshold = 0.05, long lrv_bandwidth = -1);

}  // namespace ulr
