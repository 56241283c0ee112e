#pragma once

#include <Eigen/Dense>

namespace ulr {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Matrix exponential by scaling and squaring with the order-13 diagonal
// rational approximant. The drift matrices here are tiny (L <= 4), so a
// fixed-order scheme without an eigensolver is both robust and cheap.
Mat mat_exp(const Mat& m);

// Dense Kronecker product a (x) b.
Mat kron(const Mat& a, const Mat& b);

// Kronecker sum of a square matrix with itself: I (x) m + m (x) I.
// Governs the vectorized stationary covariance equation of the OU block.
Mat kron_sum(const Mat& m);

// Solves G = phi G phi' + omega by fixed-point iteration (tolerance 1e-12,
// cap 1e6 sweeps). Requires spectral radius of phi strictly below 1 and
// certifies the final residual below 1e-10.
Mat solve_discrete_lyapunov(const Mat& phi, const Mat& omega);

// Non-negative integer matrix power by repeated squaring.
Mat matrix_power(const Mat& m, long long h);

// Principal matrix logarithm via eigendecomposition. Throws when an
// eigenvalue lies on the closed negative real axis, where the principal
// branch is not defined.
Mat principal_log(const Mat& m);

double spectral_radius(const Mat& m);

// Symmetric square root of a positive semidefinite matrix. Eigenvalues in
// [-1e-12*scale, 0) are clamped to zero; anything lower throws.
Mat psd_sqrt(const Mat& m);

}  // namespace ulr
