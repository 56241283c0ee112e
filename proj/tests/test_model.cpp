#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ulr/model.hpp"

using ulr::Mat;

namespace {

ulr::ModelParams bivariate_example() {
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

}  // namespace

TEST_CASE("validation accepts the bivariate example and scalar factory") {
  CHECK_NOTHROW(ulr::validate(bivariate_example()));
  CHECK_NOTHROW(ulr::univariate_params(1.0, 0.5, 0.5, 1.0));
}

TEST_CASE("validation rejects broken parameters") {
  auto p = bivariate_example();

  SUBCASE("explosive autoregression") {
    p.sr.phi(1, 1) = 1.01;
    CHECK_THROWS_AS(ulr::validate(p), std::invalid_argument);
  }
  SUBCASE("unit root autoregression") {
    p.sr.phi(1, 1) = 1.0;
    CHECK_THROWS_AS(ulr::validate(p), std::invalid_argument);
  }
  SUBCASE("singular innovation covariance") {
    p.sr.omega_half.col(1).setZero();
    p.sr.omega_half.row(1).setZero();
    CHECK_THROWS_AS(ulr::validate(p), std::invalid_argument);
  }
  SUBCASE("non mean-reverting drift") {
    p.ulr.theta(0, 0) = -0.1;
    CHECK_THROWS_AS(ulr::validate(p), std::invalid_argument);
  }
  SUBCASE("zero drift") {
    p.ulr.theta(0, 0) = 0.0;
    CHECK_THROWS_AS(ulr::validate(p), std::invalid_argument);
  }
  SUBCASE("zero loading column") {
    p.ulr.a_mat.setZero();
    CHECK_THROWS_AS(ulr::validate(p), std::invalid_argument);
  }
  SUBCASE("more factors than observables") {
    p.ulr.L = 3;
    p.ulr.theta = Mat::Identity(3, 3);
    p.ulr.s_mat = Mat::Identity(3, 3);
    p.ulr.a_mat = Mat::Ones(2, 3);
    CHECK_THROWS_AS(ulr::validate(p), std::invalid_argument);
  }
  SUBCASE("loading row count mismatch") {
    p.ulr.a_mat = Mat::Ones(3, 1);
    CHECK_THROWS_AS(ulr::validate(p), std::invalid_argument);
  }
}

TEST_CASE("scalar accessors require a univariate model") {
  auto p = bivariate_example();
  CHECK_THROWS_AS(p.phi_u(), std::invalid_argument);
  auto u = ulr::univariate_params(2.0, 0.5, 0.7, 1.5);
  CHECK(u.eta() == doctest::Approx(2.0));
  CHECK(u.phi_u() == doctest::Approx(0.5));
  CHECK(u.theta_u() == doctest::Approx(0.7));
  CHECK(u.s_u() == doctest::Approx(1.5));
}

TEST_CASE("exact discretization of the slow block") {
  ulr::ULRParams ulrp;
  ulrp.L = 1;
  ulrp.s_mat = Mat::Constant(1, 1, 1.0);
  ulrp.a_mat = Mat::Constant(1, 1, 1.0);

  SUBCASE("slow mean reversion at a long time scale") {
    double theta = std::log(2.5) / 10.0;
    ulrp.theta = Mat::Constant(1, 1, theta);
    auto d = ulr::discretize_ulr(ulrp, 7200);
    CHECK(d.rho_mat(0, 0) == doctest::Approx(std::exp(-theta / 7200.0)).epsilon(1e-14));
    CHECK(d.rho_mat(0, 0) == doctest::Approx(0.99998727).epsilon(1e-8));
    double closed = -std::expm1(-2.0 * theta / 7200.0) / (2.0 * theta);
    CHECK(d.sigma_T(0, 0) == doctest::Approx(closed).epsilon(1e-12));
    CHECK(d.sigma_T(0, 0) == doctest::Approx(1.3889e-4).epsilon(1e-4));
  }

  SUBCASE("unit time scale") {
    ulrp.theta = Mat::Constant(1, 1, 1.0);
    auto d = ulr::discretize_ulr(ulrp, 1);
    CHECK(d.rho_mat(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(d.sigma_T(0, 0) == doctest::Approx(0.43233235838169365).epsilon(1e-12));
  }

  SUBCASE("innovation variance equals stationary variance times one minus rho squared") {
    for (double theta : {0.05, 0.5, 1.0, 2.0}) {
      ulrp.theta = Mat::Constant(1, 1, theta);
      for (long T : {1L, 10L, 1000L}) {
        auto d = ulr::discretize_ulr(ulrp, T);
        double rho = d.rho_mat(0, 0);
        double want = ulr::stationary_cov_ulr(ulrp)(0, 0) * (1.0 - rho * rho);
        CHECK(std::abs(d.sigma_T(0, 0) - want) < 1e-12);
      }
    }
  }

  SUBCASE("rejects a nonpositive time scale") {
    ulrp.theta = Mat::Constant(1, 1, 1.0);
    CHECK_THROWS_AS(ulr::discretize_ulr(ulrp, 0), std::invalid_argument);
  }
}

TEST_CASE("discretization tightens as the time scale grows") {
  ulr::ULRParams ulrp;
  ulrp.L = 2;
  ulrp.theta = Mat(2, 2);
  ulrp.theta << 1.0, 0.3, 0.0, 0.8;
  ulrp.s_mat = Mat(2, 2);
  ulrp.s_mat << 1.0, 0.0, 0.2, 0.9;
  ulrp.a_mat = Mat::Identity(2, 2);
  auto d1 = ulr::discretize_ulr(ulrp, 100);
  auto d2 = ulr::discretize_ulr(ulrp, 1000);
  Mat eye = Mat::Identity(2, 2);
  CHECK((d2.rho_mat - eye).norm() < (d1.rho_mat - eye).norm());
  CHECK(d2.sigma_T.norm() < d1.sigma_T.norm());
  CHECK((d1.sigma_T - d1.sigma_T.transpose()).norm() < 1e-15);
  Eigen::SelfAdjointEigenSolver<Mat> es(d1.sigma_T);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("stationary covariance of the slow block") {
  ulr::ULRParams ulrp;
  ulrp.L = 1;
  ulrp.a_mat = Mat::Constant(1, 1, 1.0);
  ulrp.s_mat = Mat::Constant(1, 1, 1.0);

  ulrp.theta = Mat::Constant(1, 1, 0.5);
  CHECK(ulr::stationary_cov_ulr(ulrp)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  ulrp.theta = Mat::Constant(1, 1, std::log(2.5) / 10.0);
  CHECK(ulr::stationary_cov_ulr(ulrp)(0, 0) == doctest::Approx(5.45679).epsilon(1e-5));

  // Diagonal drift: componentwise closed form (S S^T)_ij / (theta_i + theta_j).
  ulr::ULRParams two;
  two.L = 2;
  two.theta = Mat(2, 2);
  two.theta << 0.6, 0.0, 0.0, 1.1;
  two.s_mat = Mat(2, 2);
  two.s_mat << 1.0, 0.0, 0.4, 0.8;
  two.a_mat = Mat::Identity(2, 2);
  Mat sigma = ulr::stationary_cov_ulr(two);
  CHECK(sigma(0, 0) == doctest::Approx(1.0 / 1.2).epsilon(1e-12));
  CHECK(sigma(0, 1) == doctest::Approx(0.4 / 1.7).epsilon(1e-12));
  CHECK(sigma(1, 0) == doctest::Approx(0.4 / 1.7).epsilon(1e-12));
  CHECK(sigma(1, 1) == doctest::Approx(0.8 / 2.2).epsilon(1e-12));
}

TEST_CASE("stationary covariance of the fast block") {
  auto p = bivariate_example();
  Mat omega = p.sr.omega_half * p.sr.omega_half.transpose();

  SUBCASE("white noise") {
    ulr::SRParams w = p.sr;
    w.phi = Mat::Zero(2, 2);
    CHECK((ulr::stationary_cov_sr(w) - omega).norm() < 1e-10);
  }

  SUBCASE("diagonal transition closed form") {
    Mat g = ulr::stationary_cov_sr(p.sr);
    CHECK(g(0, 0) == doctest::Approx(2.1978022).epsilon(1e-7));
    CHECK(g(0, 1) == doctest::Approx(2.5316456).epsilon(1e-7));
    CHECK(g(1, 1) == doctest::Approx(7.8431373).epsilon(1e-7));
    CHECK((g - p.sr.phi * g * p.sr.phi.transpose() - omega).norm() < 1e-10);
  }

  SUBCASE("scalar closed form") {
    auto u = ulr::univariate_params(1.0, 0.5, 0.5, 1.0);
    CHECK(ulr::stationary_cov_sr(u.sr)(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("scalar autocovariance variants") {
  auto p = ulr::univariate_params(1.0, 0.5, 0.5, 1.0);
  const long T = 1000000;

  CHECK(ulr::theo_acov_univ(p, T, 0, ulr::AcovVariant::saturating) ==
        doctest::Approx(1.0).epsilon(1e-14));
  CHECK(ulr::theo_acov_univ(p, T, 0, ulr::AcovVariant::stationary_ou) ==
        doctest::Approx(2.0).epsilon(1e-14));

  SUBCASE("saturating variant reaches the long-lag limit along h = cT") {
    for (double c : {0.5, 1.0, 2.0}) {
      long h = static_cast<long>(c * T);
      double got = ulr::theo_acov_univ(p, T, h, ulr::AcovVariant::saturating);
      double want = ulr::asymptotic_limit(p, c, ulr::LimitKind::acov_long_lag);
      CHECK(std::abs(got - want) < 1e-12);
    }
  }

  SUBCASE("stationary variant decays monotonically for nonnegative feedback") {
    auto q = ulr::univariate_params(1.0, 0.25, 0.5, 1.0);
    double prev = ulr::theo_acov_univ(q, 100, 0, ulr::AcovVariant::stationary_ou);
    for (long h = 1; h <= 2000; ++h) {
      double cur = ulr::theo_acov_univ(q, 100, h, ulr::AcovVariant::stationary_ou);
      CHECK(cur <= prev + 1e-15);
      prev = cur;
    }
    CHECK(prev < 0.05);
  }

  CHECK_THROWS_AS(ulr::theo_acov_univ(bivariate_example(), 100, 0, ulr::AcovVariant::saturating),
                  std::invalid_argument);
  CHECK_THROWS_AS(ulr::theo_acov_univ(p, 100, -1, ulr::AcovVariant::saturating),
                  std::invalid_argument);
}

TEST_CASE("scalar spectrum variants") {
  const double pi = 3.14159265358979323846;

  SUBCASE("white noise limit") {
    auto p = ulr::univariate_params(1.0, 0.0, 0.5, 1e-8);
    for (double w : {0.0, 0.3, 1.0, pi}) {
      CHECK(ulr::theo_spectrum_univ(p, 100, w, ulr::SpectrumVariant::raw) ==
            doctest::Approx(1.0 / (2.0 * pi)).epsilon(1e-9));
    }
  }

  SUBCASE("near-zero drifting frequency matches the stated limit when s^2 = 2 pi theta") {
    double theta = 0.5;
    auto p = ulr::univariate_params(1.0, 0.5, theta, std::sqrt(2.0 * pi * theta));
    for (double lambda : {0.5, 2.0, 10.0}) {
      const long T = 100000000;
      double w = std::sqrt(lambda / static_cast<double>(T));
      double got = ulr::theo_spectrum_univ(p, T, w, ulr::SpectrumVariant::raw);
      double want = ulr::asymptotic_limit(p, lambda, ulr::LimitKind::spectrum_near_zero);
      CHECK(got == doctest::Approx(want).epsilon(1e-4));
    }
  }

  SUBCASE("normalized variant integrates to the lag-zero variance") {
    auto p = ulr::univariate_params(0.9, 0.4, 0.5, 1.3);
    const long T = 50;
    // Simpson rule over [-pi, pi]; the slow peak at zero has width theta/T
    // and is well resolved at this node count.
    const int segments = 1 << 18;
    double h = 2.0 * pi / segments;
    double acc = 0.0;
    for (int i = 0; i <= segments; ++i) {
      double w = -pi + i * h;
      double f = ulr::theo_spectrum_univ(p, T, w, ulr::SpectrumVariant::normalized);
      double coef = (i == 0 || i == segments) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      acc += coef * f;
    }
    double integral = acc * h / 3.0;
    double want = 0.81 / (1.0 - 0.16) + 1.3 * 1.3 / (2.0 * 0.5);
    CHECK(integral == doctest::Approx(want).epsilon(1e-6));
  }

  SUBCASE("raw variant carries twice the slow mass of the normalized variant") {
    auto p = ulr::univariate_params(0.9, 0.4, 0.5, 1.3);
    double raw = ulr::theo_spectrum_univ(p, 50, 0.01, ulr::SpectrumVariant::raw);
    double norm = ulr::theo_spectrum_univ(p, 50, 0.01, ulr::SpectrumVariant::normalized);
    double sr_term = ulr::theo_spectrum_univ(ulr::univariate_params(0.9, 0.4, 0.5, 1e-9), 50, 0.01,
                                             ulr::SpectrumVariant::raw);
    CHECK(raw - sr_term == doctest::Approx(2.0 * (norm - sr_term)).epsilon(1e-9));
  }
}

TEST_CASE("asymptotic limits") {
  auto p = ulr::univariate_params(1.0, 0.5, 0.5, 1.0);
  CHECK(ulr::asymptotic_limit(p, 1e-9, ulr::LimitKind::acov_long_lag) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
  CHECK(ulr::asymptotic_limit(p, 1.0, ulr::LimitKind::acov_long_lag) ==
        doctest::Approx(0.6321205588285577).epsilon(1e-12));
  const double pi = 3.14159265358979323846;
  CHECK(ulr::asymptotic_limit(p, 1e12, ulr::LimitKind::spectrum_near_zero) ==
        doctest::Approx(1.0 / (2.0 * pi * 0.25)).epsilon(1e-9));
  CHECK_THROWS_AS(ulr::asymptotic_limit(p, 0.0, ulr::LimitKind::acov_long_lag),
                  std::invalid_argument);
  CHECK_THROWS_AS(ulr::asymptotic_limit(p, -1.0, ulr::LimitKind::spectrum_near_zero),
                  std::invalid_argument);
}

TEST_CASE("parameter files round trip") {
  auto p = bivariate_example();
  std::string text = ulr::serialize_params(p);
  auto q = ulr::parse_params(text);
  CHECK(q.sr.n == 2);
  CHECK(q.ulr.L == 1);
  CHECK((q.sr.phi - p.sr.phi).norm() == 0.0);
  CHECK((q.sr.omega_half - p.sr.omega_half).norm() == 0.0);
  CHECK((q.ulr.theta - p.ulr.theta).norm() == 0.0);
  CHECK((q.ulr.s_mat - p.ulr.s_mat).norm() == 0.0);
  CHECK((q.ulr.a_mat - p.ulr.a_mat).norm() == 0.0);
}

TEST_CASE("parameter files accept comments and reject malformed input") {
  std::string good =
      "# two-component scalar model\n"
      "n = 1\n"
      "L = 1\n"
      "phi = 0.5\n"
      "omega_half = 1\n"
      "a = 1\n"
      "theta = 0.5\n"
      "s = 1\n";
  CHECK_NOTHROW(ulr::parse_params(good));

  CHECK_THROWS_WITH_AS(ulr::parse_params(good + "junk = 1\n"),
                       doctest::Contains("unknown key 'junk'"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(ulr::parse_params(good + "phi = 0.2\n"), doctest::Contains("duplicate"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(ulr::parse_params("n = 1\nL = 1\nphi = abc\n"),
                       doctest::Contains("non-numeric"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      ulr::parse_params("n = 2\nL = 1\nphi = 0.5\nomega_half = 1 0 0 1\na = 1 1\ntheta = 0.5\ns = 1\n"),
      doctest::Contains("expects 4 entries"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(ulr::parse_params("n = 1\n"), doctest::Contains("missing key"),
                       std::invalid_argument);
  CHECK_THROWS_AS(ulr::parse_params("n = 0\nL = 1\nphi = 0.5\nomega_half = 1\na = 1\ntheta = 0.5\ns = 1\n"),
                  std::invalid_argument);
  // Parsing validates, so a non-stationary file is rejected even if well formed.
  std::string unstable =
      "n = 1\nL = 1\nphi = 1.5\nomega_half = 1\na = 1\ntheta = 0.5\ns = 1\n";
  CHECK_THROWS_AS(ulr::parse_params(unstable), std::invalid_argument);
}
