#include "ulr/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "ulr/rng.hpp"

namespace ulr {

namespace {

Vec draw_normals(RngStream& rng, int n) {
  Vec z(n);
  for (int i = 0; i < n; ++i) z(i) = rng.normal();
  return z;
}

bool uses_rate(LTUTag tag) {
  return tag == LTUTag::ltu_zero_init || tag == LTUTag::ltu_stationary ||
         tag == LTUTag::ltu_scaled || tag == LTUTag::ulr || tag == LTUTag::time_deformed;
}

}  // namespace

void validate(const LTUVariant& variant) {
  if (variant.sigma < 0.0) throw std::invalid_argument("sigma must be nonnegative");
  if (uses_rate(variant.tag) && !(variant.c > 0.0)) {
    throw std::invalid_argument("mean-reversion rate c must be positive");
  }
  if (variant.tag == LTUTag::time_deformed && !(variant.d > 0.0 && variant.d <= 1.0)) {
    throw std::invalid_argument("deformation exponent d must lie in (0, 1]");
  }
}

ArrayPath simulate_array(const ModelParams& params, long T, uint64_t seed) {
  validate(params);
  if (T < 2) throw std::invalid_argument("T must be at least 2");
  const int n = params.sr.n;
  const int L = params.ulr.L;

  ArrayPath path;
  path.t_max = T;
  path.seed = seed;
  path.y_s.resize(n, T);
  path.y_l_grid.resize(L, T);

  Mat sr_init_root = psd_sqrt(stationary_cov_sr(params.sr));
  Mat ulr_init_root = psd_sqrt(stationary_cov_ulr(params.ulr));
  DiscretizedULR d = discretize_ulr(params.ulr, T);
  Mat step_root = psd_sqrt(d.sigma_T);

  RngStream fast_rng(seed, 0);
  RngStream slow_rng(seed, 1);

  path.y_s.col(0) = sr_init_root * draw_normals(fast_rng, n);
  path.y_l_grid.col(0) = ulr_init_root * draw_normals(slow_rng, L);
  for (long t = 1; t < T; ++t) {
    path.y_s.col(t) =
        params.sr.phi * path.y_s.col(t - 1) + params.sr.omega_half * draw_normals(fast_rng, n);
    path.y_l_grid.col(t) =
        d.rho_mat * path.y_l_grid.col(t - 1) + step_root * draw_normals(slow_rng, L);
  }
  path.y = path.y_s + params.ulr.a_mat * path.y_l_grid;
  return path;
}

Mat simulate_ou(const ULRParams& ulr, const std::vector<double>& grid, uint64_t seed) {
  validate(ulr);
  const int L = ulr.L;
  Mat out(L, static_cast<Eigen::Index>(grid.size()));
  if (grid.empty()) return out;
  if (grid.front() < 0.0) throw std::invalid_argument("grid times must be nonnegative");
  for (size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("grid must be strictly increasing");
    }
  }
  RngStream rng(seed, 1);
  out.col(0) = psd_sqrt(stationary_cov_ulr(ulr)) * draw_normals(rng, L);
  for (size_t i = 1; i < grid.size(); ++i) {
    Mat rho, sigma;
    ou_transition(ulr, grid[i] - grid[i - 1], &rho, &sigma);
    out.col(static_cast<Eigen::Index>(i)) =
        rho * out.col(static_cast<Eigen::Index>(i - 1)) + psd_sqrt(sigma) * draw_normals(rng, L);
  }
  return out;
}

std::vector<double> simulate_ltu(const LTUVariant& variant, long T, uint64_t seed,
                                 uint64_t stream) {
  validate(variant);
  if (T < 1) throw std::invalid_argument("T must be at least 1");
  RngStream rng(seed, stream);

  double scale = static_cast<double>(T);
  if (variant.tag == LTUTag::time_deformed) scale = std::pow(static_cast<double>(T), variant.d);

  double rho = 1.0;
  double innov = variant.sigma;
  double y0 = 0.0;
  switch (variant.tag) {
    case LTUTag::random_walk:
      break;
    case LTUTag::singular:
      innov = 0.0;
      y0 = variant.sigma * rng.normal();
      break;
    case LTUTag::ltu_zero_init:
      rho = std::exp(-variant.c / scale);
      break;
    case LTUTag::ltu_stationary: {
      rho = std::exp(-variant.c / scale);
      double var0 = variant.sigma * variant.sigma / -std::expm1(-2.0 * variant.c / scale);
      y0 = std::sqrt(var0) * rng.normal();
      break;
    }
    case LTUTag::ltu_scaled:
      rho = std::exp(-variant.c / scale);
      innov = variant.sigma / scale;
      break;
    case LTUTag::rw_scaled:
      innov = variant.sigma / scale;
      break;
    case LTUTag::ulr:
    case LTUTag::time_deformed:
      rho = std::exp(-variant.c / scale);
      innov = variant.sigma * std::sqrt(-std::expm1(-2.0 * variant.c / scale));
      y0 = variant.sigma * rng.normal();
      break;
  }

  std::vector<double> y(static_cast<size_t>(T));
  double prev = y0;
  for (long t = 0; t < T; ++t) {
    prev = rho * prev + innov * rng.normal();
    y[static_cast<size_t>(t)] = prev;
  }
  return y;
}

TailEstimate tail_prob(const LTUVariant& variant, long T, double a_level, long reps,
                       uint64_t seed) {
  validate(variant);
  if (reps < 100) throw std::invalid_argument("need at least 100 replications");
  if (T < 1) throw std::invalid_argument("T must be at least 1");
  std::vector<long> exceed(static_cast<size_t>(T), 0);
  for (long rep = 0; rep < reps; ++rep) {
    std::vector<double> y = simulate_ltu(variant, T, seed, static_cast<uint64_t>(rep));
    for (long t = 0; t < T; ++t) {
      if (std::abs(y[static_cast<size_t>(t)]) > a_level) ++exceed[static_cast<size_t>(t)];
    }
  }
  TailEstimate est;
  for (long t = 0; t < T; ++t) {
    double p = static_cast<double>(exceed[static_cast<size_t>(t)]) / static_cast<double>(reps);
    if (p > est.p_max) {
      est.p_max = p;
      est.argmax_t = t + 1;
    }
  }
  est.std_err = std::sqrt(est.p_max * (1.0 - est.p_max) / static_cast<double>(reps));
  return est;
}

}  // namespace ulr
