#pragma once

#include <string>

#include "ulr/linalg.hpp"

namespace ulr {

// Short-run VAR(1) block: y_s(t) = phi*y_s(t-1) + omega_half*eps(t).
struct SRParams {
  Mat phi;         // n x n, spectral radius < 1
  Mat omega_half;  // n x n, lower-triangular by convention; omega = omega_half*omega_half^T is SPD
  int n = 0;
};

// Continuous-time mean-reverting block on normalized time tau = t/T:
// dy_l = -theta*y_l dtau + s_mat dW, loading into observables through a_mat.
struct ULRParams {
  Mat theta;  // L x L, all eigenvalues with positive real part
  Mat s_mat;  // L x L diffusion, positive definite
  Mat a_mat;  // n x L loadings, full column rank (orthonormality is an
              // identification convention used by the estimator, not enforced here)
  int L = 0;
};

struct ModelParams {
  SRParams sr;
  ULRParams ulr;

  // Scalar views, defined only when n = L = 1.
  double phi_u() const;
  double eta() const;
  double theta_u() const;
  double s_u() const;
};

// Exact one-step discretization of the slow block at time scale T.
struct DiscretizedULR {
  Mat rho_mat;  // exp(-theta/T)
  Mat sigma_T;  // innovation covariance, symmetric PSD
  long T = 0;
};

enum class AcovVariant {
  saturating,     // eta^2 phi^h + s^2/(2 theta) (1 - exp(-2 h theta / T)); grows in h from eta^2
  stationary_ou,  // eta^2 phi^h + s^2/(2 theta) exp(-h theta / T); decays to 0
};

enum class SpectrumVariant {
  raw,         // slow-component mass integrates to s^2/theta over (-pi, pi]
  normalized,  // slow term halved; integral matches the lag-0 variance s^2/(2 theta)
};

enum class LimitKind {
  acov_long_lag,       // autocovariance along h = cT as T grows
  spectrum_near_zero,  // spectrum along w = sqrt(lambda/T) as T grows
};

// Throw std::invalid_argument describing the first violated constraint.
void validate(const SRParams& sr);
void validate(const ULRParams& ulr);
void validate(const ModelParams& params);

// Convenience for the n = L = 1 case with unit loading.
ModelParams univariate_params(double eta, double phi, double theta, double s);

// Exact transition over an arbitrary time increment delta > 0:
// rho = exp(-theta*delta); (theta (+) theta) vec(sigma) = (I - exp(-(theta (+) theta)*delta)) vec(S S^T).
// Throws std::domain_error if the Kronecker sum is singular.
void ou_transition(const ULRParams& ulr, double delta, Mat* rho, Mat* sigma);

// The transition above at delta = 1/T.
DiscretizedULR discretize_ulr(const ULRParams& ulr, long T);

// Solves (theta (+) theta) vec(Sigma) = vec(S S^T); scalar case s^2/(2 theta).
Mat stationary_cov_ulr(const ULRParams& ulr);

// Gamma_s(0) solving Gamma = phi Gamma phi^T + omega.
Mat stationary_cov_sr(const SRParams& sr);

// Lag-h autocovariance of the scalar two-component process at scale T.
// Both closed forms are exposed because they disagree; callers choose explicitly.
double theo_acov_univ(const ModelParams& params, long T, long h, AcovVariant variant);

// Spectral density at frequency w in (-pi, pi] for the scalar process at scale T.
double theo_spectrum_univ(const ModelParams& params, long T, double w, SpectrumVariant variant);

// Closed-form limits of the two quantities above along drifting sequences.
double asymptotic_limit(const ModelParams& params, double c_or_lambda, LimitKind kind);

// Plain-text key-value round trip. Keys: n, L, phi, omega_half, a, theta, s
// (matrices row-major, whitespace separated). Lines starting with '#' are comments.
std::string serialize_params(const ModelParams& params);
ModelParams parse_params(const std::string& text);
ModelParams load_params(const std::string& path);
void save_params(const ModelParams& params, const std::string& path);

}  // namespace ulr
