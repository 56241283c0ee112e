#pragma once

#include <cstdint>
#include <vector>

#include "ulr/model.hpp"

namespace ulr {

// One simulated trajectory of the two-component array. Column t (0-based)
// holds the value at integer time t+1, so the slow grid point is (t+1)/T.
struct ArrayPath {
  long t_max = 0;     // T
  uint64_t seed = 0;
  Mat y;        // n x T observed, y = y_s + a_mat * y_l pointwise
  Mat y_s;      // n x T fast component
  Mat y_l_grid; // L x T slow component sampled on the integer grid
};

enum class LTUTag {
  random_walk,    // y(t) = y(t-1) + sigma*eps, zero start; explosive variance
  singular,       // y(t) = y(0) ~ N(0, sigma^2); frozen draw
  ltu_zero_init,  // y(t) = e^{-c/T} y(t-1) + sigma*eps, zero start
  ltu_stationary, // same recursion, stationary start with variance sigma^2/(1-e^{-2c/T})
  ltu_scaled,     // e^{-c/T} feedback, innovation sigma/T, zero start
  rw_scaled,      // unit root, innovation sigma/T, zero start
  ulr,            // e^{-c/T} feedback, innovation sigma*sqrt(1-e^{-2c/T}), N(0,sigma^2) start
  time_deformed,  // the ulr recursion with T replaced by T^d
};

struct LTUVariant {
  LTUTag tag = LTUTag::ulr;
  double c = 1.0;      // mean-reversion rate, used by all but random_walk/singular/rw_scaled
  double sigma = 1.0;  // noise scale, zero allowed (degenerate)
  double d = 1.0;      // time-deformation exponent in (0, 1], time_deformed only
};

struct TailEstimate {
  double p_max = 0.0;    // max over t <= T of the exceedance frequency
  double std_err = 0.0;  // binomial standard error at the maximizing date
  long argmax_t = 0;     // 1-based date attaining the maximum
};

void validate(const LTUVariant& variant);

// Seeded trajectory; identical (params, T, seed) gives identical output.
// Fast and slow innovations come from separate generator streams.
ArrayPath simulate_array(const ModelParams& params, long T, uint64_t seed);

// Exact transition sampling of the slow process on an arbitrary increasing
// grid of normalized times; the first point is a stationary draw.
Mat simulate_ou(const ULRParams& ulr, const std::vector<double>& grid, uint64_t seed);

// One path of a near-unit-root benchmark process, values y(1..T).
// y(0) is the variant's initial condition and is not included.
std::vector<double> simulate_ltu(const LTUVariant& variant, long T, uint64_t seed,
                                 uint64_t stream = 0);

// Monte-Carlo estimate of max_{t <= T} P(|y(t)| > a_level) over fresh paths.
TailEstimate tail_prob(const LTUVariant& variant, long T, double a_level, long reps,
                       uint64_t seed);

}  // namespace ulr
