#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ulr/model.hpp"
#include "ulr/rng.hpp"
#include "ulr/simulate.hpp"

using ulr::Mat;
using ulr::Vec;

namespace {

ulr::ModelParams two_scale_example() {
  ulr::ModelParams p;
  p.sr.n = 2;
  p.sr.phi = Mat::Zero(2, 2);
  p.sr.phi(0, 0) = 0.3;
  p.sr.phi(1, 1) = 0.7;
  p.sr.omega_half = Mat(2, 2);
  p.sr.omega_half << 1.0, 1.0, 0.0, 2.0;
  p.ulr.L = 1;
  p.ulr.theta = Mat::Constant(1, 1, std::log(2.5) / 10.0);
  p.ulr.s_mat = Mat::Constant(1, 1, 1.0);
  p.ulr.a_mat = Mat::Constant(2, 1, 1.0);
  return p;
}

// Lag-1 autocorrelation of a known-zero-mean scalar series.
double lag1_corr(const Eigen::RowVectorXd& y) {
  double num = 0.0;
  double den = 0.0;
  for (Eigen::Index t = 1; t < y.size(); ++t) num += y(t) * y(t - 1);
  for (Eigen::Index t = 0; t < y.size(); ++t) den += y(t) * y(t);
  return num / den;
}

}  // namespace

TEST_CASE("array paths decompose exactly and reproduce bitwise") {
  auto p = two_scale_example();
  auto path = ulr::simulate_array(p, 500, 42);
  CHECK(path.t_max == 500);
  CHECK(path.y.cols() == 500);
  CHECK(path.y_s.cols() == 500);
  CHECK(path.y_l_grid.cols() == 500);
  CHECK(path.y.rows() == 2);
  CHECK(path.y_l_grid.rows() == 1);
  Mat recomposed = path.y_s + p.ulr.a_mat * path.y_l_grid;
  CHECK((path.y - recomposed).cwiseAbs().maxCoeff() < 1e-12);

  auto again = ulr::simulate_array(p, 500, 42);
  CHECK((path.y - again.y).cwiseAbs().maxCoeff() == 0.0);
  auto other = ulr::simulate_array(p, 500, 43);
  CHECK((path.y - other.y).cwiseAbs().maxCoeff() > 0.0);

  CHECK_THROWS_AS(ulr::simulate_array(p, 1, 42), std::invalid_argument);
}

TEST_CASE("fast and slow innovation streams are uncorrelated") {
  const int n = 10000;
  ulr::RngStream fast(2718, 0);
  ulr::RngStream slow(2718, 1);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = fast.normal();
    double y = slow.normal();
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  double r = sxy / std::sqrt(sxx * syy);
  CHECK(std::abs(r) < 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("vanishing noise collapses the path onto the frozen slow draw") {
  auto p = two_scale_example();
  p.sr.omega_half = Mat::Identity(2, 2) * 1e-13;
  p.ulr.s_mat = Mat::Constant(1, 1, 1e-13);
  auto path = ulr::simulate_array(p, 300, 5);
  Vec first = p.ulr.a_mat * path.y_l_grid.col(0);
  for (long t = 0; t < 300; ++t) {
    CHECK((path.y.col(t) - first).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("long-path second moments match the stationary targets") {
  auto p = two_scale_example();
  Mat gamma0 = ulr::stationary_cov_sr(p.sr);
  double slow_var = ulr::stationary_cov_ulr(p.ulr)(0, 0);
  Vec target(2);
  target << gamma0(0, 0) + slow_var, gamma0(1, 1) + slow_var;

  const int reps = 300;
  const long T = 7200;
  Vec sum = Vec::Zero(2);
  Vec sum2 = Vec::Zero(2);
  for (int rep = 0; rep < reps; ++rep) {
    auto path = ulr::simulate_array(p, T, 1000 + static_cast<uint64_t>(rep));
    // Uncentered second moment: the process has known zero mean and the
    // slow component makes the within-path mean a poor centering.
    Vec v = path.y.array().square().matrix().rowwise().mean();
    sum += v;
    sum2 += v.cwiseProduct(v);
  }
  for (int i = 0; i < 2; ++i) {
    double mean = sum(i) / reps;
    double se = std::sqrt((sum2(i) / reps - mean * mean) / reps);
    CHECK(std::abs(mean - target(i)) < 3.0 * se);
  }
}

TEST_CASE("with negligible fast noise the path is a discretized mean-reverting chain") {
  double theta = 2.0;
  auto p = ulr::univariate_params(1e-13, 0.0, theta, 1.0);
  const long T = 500;
  auto path = ulr::simulate_array(p, T, 77);
  double rho_true = std::exp(-theta / static_cast<double>(T));
  double r = lag1_corr(path.y.row(0));
  // One path; asymptotic standard error of the lag-1 estimate.
  double se = std::sqrt((1.0 - rho_true * rho_true) / static_cast<double>(T));
  CHECK(std::abs(r - rho_true) < 3.0 * se);
}

TEST_CASE("slow-process sampling on arbitrary grids") {
  ulr::ULRParams u;
  u.L = 1;
  u.theta = Mat::Constant(1, 1, std::log(2.5) / 10.0);
  u.s_mat = Mat::Constant(1, 1, 1.0);
  u.a_mat = Mat::Constant(1, 1, 1.0);

  SUBCASE("transition variance closed form") {
    Mat rho, sigma;
    ulr::ou_transition(u, 0.1, &rho, &sigma);
    double theta = u.theta(0, 0);
    CHECK(rho(0, 0) == doctest::Approx(std::exp(-0.1 * theta)).epsilon(1e-13));
    CHECK(sigma(0, 0) == doctest::Approx(0.099086).epsilon(1e-4));
    CHECK(sigma(0, 0) ==
          doctest::Approx(-std::expm1(-0.2 * theta) / (2.0 * theta)).epsilon(1e-12));
  }

  SUBCASE("single grid point is a stationary draw") {
    double var_target = ulr::stationary_cov_ulr(u)(0, 0);
    const int reps = 4000;
    double s2 = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      Mat x = ulr::simulate_ou(u, {0.0}, 500 + static_cast<uint64_t>(rep));
      REQUIRE(x.cols() == 1);
      s2 += x(0, 0) * x(0, 0);
    }
    double var_hat = s2 / reps;
    double se = var_target * std::sqrt(2.0 / reps);
    CHECK(std::abs(var_hat - var_target) < 4.0 * se);
  }

  SUBCASE("fast mean reversion decorrelates consecutive grid points") {
    ulr::ULRParams fastu = u;
    fastu.theta = Mat::Constant(1, 1, 1000.0);
    std::vector<double> grid;
    for (int i = 0; i <= 5000; ++i) grid.push_back(i * 0.01);
    Mat x = ulr::simulate_ou(fastu, grid, 9);
    Eigen::RowVectorXd row = x.row(0);
    CHECK(std::abs(lag1_corr(row)) < 0.05);
    double var_hat = row.array().square().mean();
    CHECK(var_hat == doctest::Approx(1.0 / 2000.0).epsilon(0.15));
  }

  SUBCASE("grid validation") {
    CHECK_THROWS_AS(ulr::simulate_ou(u, {0.0, 0.5, 0.5}, 1), std::invalid_argument);
    CHECK_THROWS_AS(ulr::simulate_ou(u, {0.3, 0.2}, 1), std::invalid_argument);
    CHECK_THROWS_AS(ulr::simulate_ou(u, {-0.1, 0.2}, 1), std::invalid_argument);
  }
}

TEST_CASE("near-unit-root benchmark recursions") {
  SUBCASE("frozen draw stays constant") {
    ulr::LTUVariant v;
    v.tag = ulr::LTUTag::singular;
    v.sigma = 2.0;
    auto y = ulr::simulate_ltu(v, 50, 3);
    for (double x : y) CHECK(x == y[0]);
    CHECK(y[0] != 0.0);
  }

  SUBCASE("random walk variance grows linearly") {
    ulr::LTUVariant v;
    v.tag = ulr::LTUTag::random_walk;
    const int reps = 4000;
    const long T = 100;
    double s2 = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      auto y = ulr::simulate_ltu(v, T, 11, static_cast<uint64_t>(rep));
      s2 += y.back() * y.back();
    }
    double var_hat = s2 / reps;
    double se = static_cast<double>(T) * std::sqrt(2.0 / reps);
    CHECK(std::abs(var_hat - static_cast<double>(T)) < 4.0 * se);
  }

  SUBCASE("scaled unit root has variance sigma^2 gamma / T at date gamma T") {
    ulr::LTUVariant v;
    v.tag = ulr::LTUTag::rw_scaled;
    v.sigma = 1.5;
    const long T = 200;
    const double gamma = 0.5;
    const int reps = 4000;
    double s2 = 0.0;
    long t_idx = static_cast<long>(gamma * T) - 1;
    for (int rep = 0; rep < reps; ++rep) {
      auto y = ulr::simulate_ltu(v, T, 12, static_cast<uint64_t>(rep));
      s2 += y[t_idx] * y[t_idx];
    }
    double var_hat = s2 / reps;
    double want = v.sigma * v.sigma * gamma / static_cast<double>(T);
    CHECK(var_hat == doctest::Approx(want).epsilon(0.1));
  }

  SUBCASE("scaled mean-reverting variant vanishes as T grows") {
    ulr::LTUVariant v;
    v.tag = ulr::LTUTag::ltu_scaled;
    v.c = 1.0;
    const double gamma = 0.5;
    const int reps = 4000;
    double prev_var = 1e300;
    for (long T : {200L, 800L}) {
      double s2 = 0.0;
      long t_idx = static_cast<long>(gamma * T) - 1;
      for (int rep = 0; rep < reps; ++rep) {
        auto y = ulr::simulate_ltu(v, T, 13, static_cast<uint64_t>(rep));
        s2 += y[t_idx] * y[t_idx];
      }
      double var_hat = s2 / reps;
      double want = -std::expm1(-2.0 * v.c * gamma) / (2.0 * v.c * static_cast<double>(T));
      CHECK(var_hat == doctest::Approx(want).epsilon(0.15));
      CHECK(var_hat < prev_var);
      prev_var = var_hat;
    }
  }

  SUBCASE("stationary bounded variant keeps unit variance at every scale") {
    ulr::LTUVariant v;
    v.tag = ulr::LTUTag::ulr;
    v.c = 1.0;
    const int reps = 500;
    for (long T : {100L, 1000L}) {
      double acc = 0.0;
      for (int rep = 0; rep < reps; ++rep) {
        auto y = ulr::simulate_ltu(v, T, 14, static_cast<uint64_t>(rep));
        double m = 0.0;
        for (double x : y) m += x * x;
        acc += m / static_cast<double>(T);
      }
      CHECK(acc / reps == doctest::Approx(1.0).epsilon(0.15));
    }
  }

  SUBCASE("time deformation slows the clock but keeps the marginal variance") {
    ulr::LTUVariant v;
    v.tag = ulr::LTUTag::time_deformed;
    v.c = 1.0;
    v.d = 0.5;
    const int reps = 500;
    double acc = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
      auto y = ulr::simulate_ltu(v, 400, 15, static_cast<uint64_t>(rep));
      double m = 0.0;
      for (double x : y) m += x * x;
      acc += m / 400.0;
    }
    CHECK(acc / reps == doctest::Approx(1.0).epsilon(0.15));
  }

  SUBCASE("parameter validation") {
    ulr::LTUVariant v;
    v.tag = ulr::LTUTag::ulr;
    v.c = 0.0;
    CHECK_THROWS_AS(ulr::simulate_ltu(v, 10, 1), std::invalid_argument);
    v.c = 1.0;
    v.sigma = -1.0;
    CHECK_THROWS_AS(ulr::simulate_ltu(v, 10, 1), std::invalid_argument);
    v.sigma = 1.0;
    v.tag = ulr::LTUTag::time_deformed;
    v.d = 1.5;
    CHECK_THROWS_AS(ulr::simulate_ltu(v, 10, 1), std::invalid_argument);
    v.d = 0.5;
    CHECK_THROWS_AS(ulr::simulate_ltu(v, 0, 1), std::invalid_argument);
  }
}

TEST_CASE("tail exceedance diagnostics") {
  SUBCASE("bounded variant stays inside a four-sigma band") {
    ulr::LTUVariant v;
    v.tag = ulr::LTUTag::ulr;
    v.c = 1.0;
    for (long T : {50L, 200L}) {
      auto est = ulr::tail_prob(v, T, 4.0, 5000, 21);
      CHECK(est.p_max < 0.001);
    }
  }

  SUBCASE("divergent stationary variant escalates with T") {
    ulr::LTUVariant v;
    v.tag = ulr::LTUTag::ltu_stationary;
    v.c = 1.0;
    auto small = ulr::tail_prob(v, 100, 4.0, 1000, 22);
    auto large = ulr::tail_prob(v, 400, 4.0, 1000, 22);
    CHECK(small.p_max > 0.3);
    CHECK(large.p_max > small.p_max);
  }

  SUBCASE("degenerate noise never exceeds") {
    ulr::LTUVariant v;
    v.tag = ulr::LTUTag::random_walk;
    v.sigma = 0.0;
    auto est = ulr::tail_prob(v, 100, 0.5, 200, 23);
    CHECK(est.p_max == 0.0);
    CHECK(est.std_err == 0.0);
  }

  SUBCASE("standard error and argmax are reported") {
    ulr::LTUVariant v;
    v.tag = ulr::LTUTag::ltu_zero_init;
    v.c = 1.0;
    auto est = ulr::tail_prob(v, 200, 2.0, 1000, 24);
    CHECK(est.p_max > 0.0);
    CHECK(est.std_err == doctest::Approx(std::sqrt(est.p_max * (1.0 - est.p_max) / 1000.0)));
    CHECK(est.argmax_t >= 1);
    CHECK(est.argmax_t <= 200);
    // Zero-init variance rises with t, so the argmax should sit late in the sample.
    CHECK(est.argmax_t > 100);
  }

  CHECK_THROWS_AS(ulr::tail_prob(ulr::LTUVariant{}, 100, 1.0, 50, 1), std::invalid_argument);
}
