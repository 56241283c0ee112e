#include "ulr/predict.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "ulr/estimate.hpp"
#include "ulr/rng.hpp"

namespace ulr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Quantile of a sorted sample by linear interpolation of order statistics
// (the common "type 7" definition: h = p*(n-1)).
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double h = p * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

// Quantile curve at an arbitrary level.  With per-cell samples available the
// order statistics answer any level exactly; otherwise interpolate linearly
// between the tabulated rows.  Quantiles are non-decreasing in the level at
// every grid point, so either form inherits that ordering.
Vec curve_at_level(const ConfidenceBelt& belt, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("quantile level must be in (0,1)");
  if (belt.samples.size() > 0) {
    const Eigen::Index n = belt.samples.rows();
    Vec out(belt.samples.cols());
    const double h = level * static_cast<double>(n - 1);
    const auto lo = static_cast<Eigen::Index>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    for (Eigen::Index g = 0; g < belt.samples.cols(); ++g) {
      out[g] = (lo + 1 >= n) ? belt.samples(n - 1, g)
                             : belt.samples(lo, g) +
                                   frac * (belt.samples(lo + 1, g) - belt.samples(lo, g));
    }
    return out;
  }
  const auto& lv = belt.levels;
  if (lv.empty()) throw std::invalid_argument("belt has no tabulated levels");
  if (level < lv.front() - 1e-12 || level > lv.back() + 1e-12)
    throw std::invalid_argument("requested level outside the tabulated range");
  for (std::size_t j = 0; j < lv.size(); ++j)
    if (std::abs(level - lv[j]) <= 1e-12) return belt.quantile_curves.row(j).transpose();
  std::size_t j = 0;
  while (j + 1 < lv.size() && lv[j + 1] < level) ++j;
  const double w = (level - lv[j]) / (lv[j + 1] - lv[j]);
  return ((1.0 - w) * belt.quantile_curves.row(j) + w * belt.quantile_curves.row(j + 1))
      .transpose();
}

}  // namespace

double theoretical_quantile(double theta, double alpha, double gamma, double eta, double s,
                            double y_l_T) {
  if (!(theta > 0.0))
    throw std::domain_error("drift must be positive; use the zero-drift limit instead");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("tail level must be in (0,1)");
  if (!(gamma > 0.0)) throw std::invalid_argument("horizon ratio must be positive");
  if (!(eta >= 0.0 && s >= 0.0))
    throw std::invalid_argument("scale parameters must be nonnegative");
  const double slow_var = s * s / (2.0 * theta) * (-std::expm1(-2.0 * theta * gamma));
  return std::exp(-theta * gamma) * y_l_T +
         normal_quantile(1.0 - alpha) * std::sqrt(eta * eta + slow_var);
}

double theoretical_quantile_zero_drift(double alpha, double gamma, double eta, double s,
                                       double y_l_T) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("tail level must be in (0,1)");
  if (!(gamma > 0.0)) throw std::invalid_argument("horizon ratio must be positive");
  if (!(eta >= 0.0 && s >= 0.0))
    throw std::invalid_argument("scale parameters must be nonnegative");
  return y_l_T + normal_quantile(1.0 - alpha) * std::sqrt(eta * eta + s * s * gamma);
}

GaussianLaw predictive_distribution(const ModelParams& params, const Vec& y_s_T,
                                    const Vec& y_l_1, HorizonMode mode, double gamma) {
  validate(params);
  const auto n = params.sr.phi.rows();
  if (y_s_T.size() != n) throw std::invalid_argument("fast state has wrong dimension");
  if (y_l_1.size() != params.ulr.a_mat.cols())
    throw std::invalid_argument("slow state has wrong dimension");

  GaussianLaw law;
  if (mode == HorizonMode::short_run) {
    const long h = std::lround(gamma);
    if (h < 1 || std::abs(gamma - static_cast<double>(h)) > 1e-9)
      throw std::invalid_argument("short-run horizon must be a positive integer step count");
    const Mat omega = params.sr.omega_half * params.sr.omega_half.transpose();
    Mat power = Mat::Identity(n, n);
    Mat cov = Mat::Zero(n, n);
    for (long j = 0; j < h; ++j) {
      cov += power * omega * power.transpose();
      power = (params.sr.phi * power).eval();
    }
    law.mean = power * y_s_T + params.ulr.a_mat * y_l_1;
    law.cov = cov;
  } else {
    if (!(gamma > 0.0)) throw std::invalid_argument("horizon ratio must be positive");
    Mat rho_g, sigma_g;
    ou_transition(params.ulr, gamma, &rho_g, &sigma_g);
    law.mean = params.ulr.a_mat * (rho_g * y_l_1);
    law.cov = params.ulr.a_mat * sigma_g * params.ulr.a_mat.transpose() +
              stationary_cov_sr(params.sr);
  }
  return law;
}

ConfidenceBelt build_belt(long K, const std::vector<double>& rho_grid,
                          const std::vector<double>& levels, long reps, unsigned long seed) {
  if (K < 2) throw std::invalid_argument("chain length must be at least 2");
  if (reps < 1000) throw std::invalid_argument("at least 1000 replications per grid point");
  if (rho_grid.empty()) throw std::invalid_argument("empty coefficient grid");
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] > 0.0 && rho_grid[i] < 1.0))
      throw std::invalid_argument("grid coefficients must lie in (0,1)");
    if (i > 0 && !(rho_grid[i] > rho_grid[i - 1]))
      throw std::invalid_argument("grid must be strictly increasing");
  }
  if (levels.empty()) throw std::invalid_argument("empty level list");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0 && levels[i] < 1.0))
      throw std::invalid_argument("levels must lie in (0,1)");
    if (i > 0 && !(levels[i] > levels[i - 1]))
      throw std::invalid_argument("levels must be strictly increasing");
  }

  ConfidenceBelt belt;
  belt.K = K;
  belt.rho_grid = rho_grid;
  belt.levels = levels;
  belt.reps = reps;
  belt.seed = seed;
  belt.quantile_curves.resize(static_cast<Eigen::Index>(levels.size()),
                              static_cast<Eigen::Index>(rho_grid.size()));
  belt.samples.resize(reps, static_cast<Eigen::Index>(rho_grid.size()));

  std::vector<double> rho_hats(static_cast<std::size_t>(reps));
  Vec series(K + 1);
  for (std::size_t g = 0; g < rho_grid.size(); ++g) {
    const double rho = rho_grid[g];
    const double innov_sd = std::sqrt(1.0 - rho * rho);
    for (long r = 0; r < reps; ++r) {
      // One stream per (grid point, replication) cell; outputs do not depend
      // on evaluation order.
      RngStream rng(seed, static_cast<std::uint64_t>(g) * static_cast<std::uint64_t>(reps) +
                              static_cast<std::uint64_t>(r));
      series[0] = rng.normal();
      for (long k = 1; k <= K; ++k) series[k] = rho * series[k - 1] + innov_sd * rng.normal();
      rho_hats[static_cast<std::size_t>(r)] = ar1_mle(series).rho_hat;
    }
    std::sort(rho_hats.begin(), rho_hats.end());
    for (long r = 0; r < reps; ++r)
      belt.samples(r, static_cast<Eigen::Index>(g)) = rho_hats[static_cast<std::size_t>(r)];
    for (std::size_t j = 0; j < levels.size(); ++j)
      belt.quantile_curves(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(g)) =
          quantile_sorted(rho_hats, levels[j]);
  }
  return belt;
}

BeltInversion invert_belt(const ConfidenceBelt& belt, double rho_hat, double alpha1) {
  if (!(alpha1 > 0.0 && alpha1 < 1.0))
    throw std::invalid_argument("level share must lie in (0,1)");
  const Vec q_lo = curve_at_level(belt, alpha1 / 2.0);
  const Vec q_hi = curve_at_level(belt, 1.0 - alpha1 / 2.0);
  const auto& g = belt.rho_grid;
  const std::size_t m = g.size();

  BeltInversion out;
  if (rho_hat > q_hi.maxCoeff()) {
    out.rho_lo = out.rho_hi = g.back();
    out.clipped = true;
  } else if (rho_hat < q_lo.minCoeff()) {
    out.rho_lo = out.rho_hi = g.front();
    out.clipped = true;
  } else {
    double lo = kInf, hi = -kInf;
    auto absorb = [&](double x) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    };
    for (std::size_t i = 0; i < m; ++i)
      if (q_lo[static_cast<Eigen::Index>(i)] <= rho_hat &&
          rho_hat <= q_hi[static_cast<Eigen::Index>(i)])
        absorb(g[i]);
    // On each segment the two curves are linear, so the acceptance set is a
    // closed t-interval with endpoints in closed form.
    for (std::size_t i = 0; i + 1 < m; ++i) {
      double t0 = 0.0, t1 = 1.0;
      bool feasible = true;
      auto bound_below = [&](double c0, double c1) {  // need c(t) <= rho_hat
        if (c0 == c1) {
          if (c0 > rho_hat) feasible = false;
          return;
        }
        const double t = (rho_hat - c0) / (c1 - c0);
        if (c1 > c0)
          t1 = std::min(t1, t);
        else
          t0 = std::max(t0, t);
      };
      auto bound_above = [&](double c0, double c1) {  // need c(t) >= rho_hat
        if (c0 == c1) {
          if (c0 < rho_hat) feasible = false;
          return;
        }
        const double t = (rho_hat - c0) / (c1 - c0);
        if (c1 > c0)
          t0 = std::max(t0, t);
        else
          t1 = std::min(t1, t);
      };
      bound_below(q_lo[static_cast<Eigen::Index>(i)], q_lo[static_cast<Eigen::Index>(i + 1)]);
      bound_above(q_hi[static_cast<Eigen::Index>(i)], q_hi[static_cast<Eigen::Index>(i + 1)]);
      if (feasible && t0 <= t1) {
        absorb(g[i] + t0 * (g[i + 1] - g[i]));
        absorb(g[i] + t1 * (g[i + 1] - g[i]));
      }
    }
    if (hi < lo) {
      out.rho_lo = g.front();
      out.rho_hi = g.back();
      out.clipped = true;
    } else {
      out.rho_lo = lo;
      out.rho_hi = hi;
    }
  }
  out.theta_lo = -static_cast<double>(belt.K) * std::log(out.rho_hi);
  out.theta_hi = -static_cast<double>(belt.K) * std::log(out.rho_lo);
  return out;
}

double bonferroni_bound(double alpha, double alpha1, double theta_lo, double theta_hi,
                        double eta, double s, double y_l_T, double gamma, double* beta_star) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("tail level must be in (0,1)");
  if (!(alpha1 > 0.0 && alpha1 < alpha))
    throw std::invalid_argument("level share must lie strictly between 0 and the tail level");
  if (!(theta_lo <= theta_hi)) throw std::invalid_argument("empty drift interval");
  if (!(theta_lo > 0.0)) throw std::domain_error("drift interval must be positive");

  const double tail = alpha - alpha1;
  double best = -kInf, best_theta = theta_lo;
  const int pts = 257;  // both endpoints plus 256 interior points
  for (int i = 0; i <= pts; ++i) {
    const double theta =
        theta_lo + (theta_hi - theta_lo) * static_cast<double>(i) / static_cast<double>(pts);
    const double v = theoretical_quantile(theta, tail, gamma, eta, s, y_l_T);
    if (v > best) {
      best = v;
      best_theta = theta;
    }
  }
  if (beta_star != nullptr) *beta_star = best_theta;
  return best;
}

PredictionInterval minmax_interval(double alpha, const ConfidenceBelt& belt, double rho_hat,
                                   double eta, double s, double y_l_T, double gamma,
                                   bool two_sided) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("tail level must be in (0,1)");
  if (!(std::abs(rho_hat) > 0.0 && std::abs(rho_hat) < 1.0))
    throw std::invalid_argument("point estimate must have magnitude in (0,1)");

  if (two_sided) {
    PredictionInterval out = minmax_interval(alpha / 2.0, belt, rho_hat, eta, s, y_l_T, gamma);
    const PredictionInterval mirrored =
        minmax_interval(alpha / 2.0, belt, rho_hat, eta, s, -y_l_T, gamma);
    out.lower = -mirrored.upper;
    out.level = 1.0 - alpha;
    return out;
  }

  // With per-cell samples any split share in (0, alpha) is queryable; a belt
  // reduced to tabulated curves constrains both requested levels alpha1/2 and
  // 1 - alpha1/2 to the tabulated range.
  double a1_lo, a1_hi;
  if (belt.samples.size() > 0) {
    a1_lo = alpha / 256.0;
    a1_hi = alpha * (1.0 - 1.0 / 256.0);
  } else {
    if (belt.levels.empty()) throw std::invalid_argument("belt has no tabulated levels");
    a1_lo = 2.0 * std::max(belt.levels.front(), 1.0 - belt.levels.back());
    a1_hi = std::min({alpha * (1.0 - 1.0 / 256.0), 2.0 * belt.levels.back(),
                      2.0 * (1.0 - belt.levels.front())});
  }
  if (!(a1_lo > 0.0 && a1_lo < a1_hi))
    throw std::invalid_argument("belt levels leave no feasible range for the level split");

  auto objective = [&](double a1) {
    const BeltInversion inv = invert_belt(belt, rho_hat, a1);
    return bonferroni_bound(alpha, a1, inv.theta_lo, inv.theta_hi, eta, s, y_l_T, gamma);
  };

  // Coarse scan, then golden-section polish around the best cell.
  const int grid_pts = 64;
  double best_a1 = a1_lo, best_val = kInf;
  double step = (a1_hi - a1_lo) / static_cast<double>(grid_pts - 1);
  for (int j = 0; j < grid_pts; ++j) {
    const double a1 = a1_lo + step * static_cast<double>(j);
    const double v = objective(a1);
    if (v < best_val) {
      best_val = v;
      best_a1 = a1;
    }
  }
  {
    double a = std::max(a1_lo, best_a1 - step);
    double b = std::min(a1_hi, best_a1 + step);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    for (int it = 0; it < 60 && (b - a) > 1e-13; ++it) {
      if (f1 <= f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - invphi * (b - a);
        f1 = objective(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + invphi * (b - a);
        f2 = objective(x2);
      }
    }
    const double mid = 0.5 * (a + b);
    const double fm = objective(mid);
    if (fm < best_val) {
      best_val = fm;
      best_a1 = mid;
    }
  }

  const BeltInversion inv = invert_belt(belt, rho_hat, best_a1);
  double beta_star = inv.theta_lo;
  const double upper =
      bonferroni_bound(alpha, best_a1, inv.theta_lo, inv.theta_hi, eta, s, y_l_T, gamma,
                       &beta_star);

  const double theta_hat = -static_cast<double>(belt.K) * std::log(std::abs(rho_hat));
  const double plug = theoretical_quantile(theta_hat, alpha, gamma, eta, s, y_l_T);
  const double shift = theoretical_quantile(beta_star, alpha, gamma, eta, s, y_l_T);

  PredictionInterval out;
  out.horizon_ratio = gamma;
  out.level = 1.0 - alpha;
  out.lower = -kInf;
  out.upper = upper;
  out.alpha1_star = best_a1;
  out.beta_star = beta_star;
  out.decomposition = {plug, shift - plug, upper - shift};
  return out;
}

double plug_in_interval(double alpha, double theta_hat, double eta, double s, double y_l_T,
                        double gamma) {
  return theoretical_quantile(theta_hat, alpha, gamma, eta, s, y_l_T);
}

}  // namespace ulr
