#pragma once

#include <array>
#include <vector>

#include "ulr/linalg.hpp"
#include "ulr/model.hpp"

namespace ulr {

struct GaussianLaw {
  Vec mean;
  Mat cov;
};

// Forecast regimes: a fixed number of steps ahead (the slow level frozen), or
// a fixed fraction of the sample span ahead (the slow level moves, the fast
// component reaches its ergodic law).
enum class HorizonMode { short_run, long_run };

// Simulated quantiles of the coarse-grid AR(1) estimate as a function of the
// true coefficient; inverting these curves gives finite-sample confidence
// sets for the slow decay rate.  Belts produced by build_belt also keep the
// sorted per-cell samples, making any level in (0,1) queryable; a belt
// assembled from curves alone answers only the tabulated level range.
struct ConfidenceBelt {
  long K = 0;
  std::vector<double> rho_grid;
  std::vector<double> levels;
  Mat quantile_curves;  // levels.size() x rho_grid.size()
  Mat samples;          // reps x rho_grid.size(), each column sorted ascending
  long reps = 0;
  unsigned long seed = 0;
};

struct BeltInversion {
  double rho_lo = 0.0;
  double rho_hi = 0.0;
  double theta_lo = 0.0;  // from rho_hi
  double theta_hi = 0.0;  // from rho_lo
  bool clipped = false;   // estimate left the tabulated band, or the set was empty
};

struct PredictionInterval {
  double horizon_ratio = 0.0;
  double level = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double alpha1_star = 0.0;
  double beta_star = 0.0;
  // Plug-in quantile, parameter-shift term, level-shift term; the three sum
  // to the upper bound exactly.
  std::array<double, 3> decomposition{{0.0, 0.0, 0.0}};
};

// Upper alpha-quantile of the horizon-gamma predictive law of a univariate
// two-scale model: exp(-theta gamma) y_l_T plus the Gaussian quantile of the
// fast noise convolved with the slow transition noise.
double theoretical_quantile(double theta, double alpha, double gamma, double eta, double s,
                            double y_l_T);

// Vanishing-drift limit of theoretical_quantile: the slow component behaves
// as a Brownian motion over the horizon.
double theoretical_quantile_zero_drift(double alpha, double gamma, double eta, double s,
                                       double y_l_T);

// Conditional forecast law.  short_run: gamma is an integer step count, the
// slow level stays frozen.  long_run: gamma is a fraction of the sample span,
// the slow level relaxes toward its stationary law and the fast component
// contributes its ergodic variance.
GaussianLaw predictive_distribution(const ModelParams& params, const Vec& y_s_T,
                                    const Vec& y_l_1, HorizonMode mode, double gamma);

// Tabulates empirical quantiles of the coarse-grid AR(1) estimate over a grid
// of true coefficients.  Each cell simulates `reps` standardized chains of
// length K+1 and fits them with the conditional likelihood.
ConfidenceBelt build_belt(long K, const std::vector<double>& rho_grid,
                          const std::vector<double>& levels, long reps, unsigned long seed);

// Confidence set {rho : q_{alpha1/2}(rho) <= rho_hat <= q_{1-alpha1/2}(rho)}
// as its smallest enclosing interval, with piecewise-linear interpolation
// along the grid and linear interpolation between tabulated levels.  An
// estimate outside every curve clips to the nearest grid edge with a flag; an
// otherwise-empty set falls back to the full grid span with a flag.
BeltInversion invert_belt(const ConfidenceBelt& belt, double rho_hat, double alpha1);

// Worst-case quantile at level 1 - (alpha - alpha1) over drift values in
// [theta_lo, theta_hi], scanned on a 256-cell grid including both endpoints.
// beta_star, when given, receives the maximizing drift.
double bonferroni_bound(double alpha, double alpha1, double theta_lo, double theta_hi,
                        double eta, double s, double y_l_T, double gamma,
                        double* beta_star = nullptr);

// Level-split optimization: minimizes bonferroni_bound over the share alpha1
// spent on the drift confidence set (64-point grid, golden-section polish).
// One-sided upper bound by default; two_sided mirrors the construction at
// alpha/2 for the lower end.
PredictionInterval minmax_interval(double alpha, const ConfidenceBelt& belt, double rho_hat,
                                   double eta, double s, double y_l_T, double gamma,
                                   bool two_sided = false);

// Quantile at the point estimates, ignoring estimation risk.
double plug_in_interval(double alpha, double theta_hat, double eta, double s, double y_l_T,
                        double gamma);

}  // namespace ulr
