#include "ulr/linalg.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace ulr {

namespace {

void require_square(const Mat& m, const char* who) {
  if (m.rows() != m.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
  if (!m.allFinite())
    throw std::invalid_argument(std::string(who) + ": non-finite entries");
}

}  // namespace

Mat mat_exp(const Mat& m) {
  require_square(m, "mat_exp");
  const auto n = m.rows();
  const Mat id = Mat::Identity(n, n);

  // Order-13 diagonal approximant, accurate to round-off for inputs with
  // 1-norm below theta13; larger inputs are scaled down by a power of two.
  static const double b[] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const double theta13 = 5.371920351148152;

  const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
  }
  const Mat a = m / std::pow(2.0, squarings);

  const Mat a2 = a * a;
  const Mat a4 = a2 * a2;
  const Mat a6 = a2 * a4;
  const Mat u =
      a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
           b[5] * a4 + b[3] * a2 + b[1] * id);
  const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                b[4] * a4 + b[2] * a2 + b[0] * id;

  Mat r = (v - u).fullPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat kron_sum(const Mat& m) {
  require_square(m, "kron_sum");
  const Mat id = Mat::Identity(m.rows(), m.cols());
  return kron(id, m) + kron(m, id);
}

Mat solve_discrete_lyapunov(const Mat& phi, const Mat& omega) {
  require_square(phi, "solve_discrete_lyapunov");
  if (omega.rows() != phi.rows() || omega.cols() != phi.cols())
    throw std::invalid_argument("solve_discrete_lyapunov: dimension mismatch");
  if (spectral_radius(phi) >= 1.0)
    throw std::domain_error(
        "solve_discrete_lyapunov: spectral radius of phi must be < 1");

  const double tol = 1e-12;
  const long long cap = 1000000;
  const double scale = std::max(1.0, omega.norm());
  Mat g = omega;
  for (long long it = 0; it < cap; ++it) {
    Mat next = phi * g * phi.transpose() + omega;
    const double delta = (next - g).norm();
    g = std::move(next);
    if (delta < tol * scale) break;
  }
  const double residual = (g - phi * g * phi.transpose() - omega).norm();
  if (residual > 1e-10 * scale)
    throw std::runtime_error(
        "solve_discrete_lyapunov: residual certificate failed");
  // Symmetrize away accumulated round-off.
  return 0.5 * (g + g.transpose());
}

Mat matrix_power(const Mat& m, long long h) {
  require_square(m, "matrix_power");
  if (h < 0) throw std::invalid_argument("matrix_power: negative exponent");
  Mat result = Mat::Identity(m.rows(), m.cols());
  Mat base = m;
  while (h > 0) {
    if (h & 1) result = result * base;
    h >>= 1;
    if (h > 0) base = base * base;
  }
  return result;
}

Mat principal_log(const Mat& m) {
  require_square(m, "principal_log");
  Eigen::ComplexEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("principal_log: eigendecomposition failed");
  Eigen::VectorXcd lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i).real() <= 0.0 &&
        std::abs(lam(i).imag()) <= 1e-12 * (1.0 + std::abs(lam(i))))
      throw std::domain_error(
          "principal_log: eigenvalue on the closed negative real axis");
  }
  Eigen::MatrixXcd v = es.eigenvectors();
  Eigen::MatrixXcd d = lam.array().log().matrix().asDiagonal();
  Eigen::MatrixXcd lg = v * d * v.inverse();
  return lg.real();
}

double spectral_radius(const Mat& m) {
  require_square(m, "spectral_radius");
  Eigen::EigenSolver<Mat> es(m, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Mat psd_sqrt(const Mat& m) {
  require_square(m, "psd_sqrt");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  Vec lam = es.eigenvalues();
  double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < -1e-12 * scale)
      throw std::domain_error("psd_sqrt: matrix is not positive semidefinite");
    lam(i) = std::sqrt(std::max(lam(i), 0.0));
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace ulr
