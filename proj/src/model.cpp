#include "ulr/model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ulr {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_univariate(const ModelParams& params) {
  if (params.sr.n != 1 || params.ulr.L != 1) {
    throw std::invalid_argument("scalar accessor requires n = 1 and L = 1");
  }
}

// Smallest eigenvalue of a symmetric matrix, used for definiteness checks.
double min_sym_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
  return es.eigenvalues().minCoeff();
}

Vec vec_of(const Mat& m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

Mat unvec(const Vec& v, int rows, int cols) {
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

}  // namespace

double ModelParams::phi_u() const {
  require_univariate(*this);
  return sr.phi(0, 0);
}

double ModelParams::eta() const {
  require_univariate(*this);
  return sr.omega_half(0, 0);
}

double ModelParams::theta_u() const {
  require_univariate(*this);
  return ulr.theta(0, 0);
}

double ModelParams::s_u() const {
  require_univariate(*this);
  return ulr.s_mat(0, 0);
}

void validate(const SRParams& sr) {
  if (sr.n < 1) throw std::invalid_argument("n must be a positive integer");
  if (sr.phi.rows() != sr.n || sr.phi.cols() != sr.n) {
    throw std::invalid_argument("phi must be n x n");
  }
  if (sr.omega_half.rows() != sr.n || sr.omega_half.cols() != sr.n) {
    throw std::invalid_argument("omega_half must be n x n");
  }
  if (!sr.phi.allFinite() || !sr.omega_half.allFinite()) {
    throw std::invalid_argument("short-run parameters must be finite");
  }
  if (spectral_radius(sr.phi) >= 1.0) {
    throw std::invalid_argument("phi must have spectral radius strictly below 1");
  }
  Mat omega = sr.omega_half * sr.omega_half.transpose();
  if (min_sym_eig(omega) <= 0.0) {
    throw std::invalid_argument("omega_half must define a positive definite covariance");
  }
}

void validate(const ULRParams& ulr) {
  if (ulr.L < 1) throw std::invalid_argument("L must be a positive integer");
  if (ulr.theta.rows() != ulr.L || ulr.theta.cols() != ulr.L) {
    throw std::invalid_argument("theta must be L x L");
  }
  if (ulr.s_mat.rows() != ulr.L || ulr.s_mat.cols() != ulr.L) {
    throw std::invalid_argument("s_mat must be L x L");
  }
  if (ulr.a_mat.cols() != ulr.L) {
    throw std::invalid_argument("a must have L columns");
  }
  if (ulr.a_mat.rows() < ulr.L) {
    throw std::invalid_argument("L must not exceed the observable dimension");
  }
  if (!ulr.theta.allFinite() || !ulr.s_mat.allFinite() || !ulr.a_mat.allFinite()) {
    throw std::invalid_argument("slow-component parameters must be finite");
  }
  // Mean reversion: every eigenvalue of theta has positive real part,
  // equivalently exp(-theta) has spectral radius below 1.
  Eigen::ComplexEigenSolver<Mat> es(ulr.theta);
  for (int i = 0; i < ulr.L; ++i) {
    if (es.eigenvalues()(i).real() <= 0.0) {
      throw std::invalid_argument("theta must have eigenvalues with positive real part");
    }
  }
  Mat ss = ulr.s_mat * ulr.s_mat.transpose();
  if (min_sym_eig(ss) <= 0.0) {
    throw std::invalid_argument("s_mat must be nonsingular");
  }
  if (ulr.L == 1 && ulr.s_mat(0, 0) <= 0.0) {
    throw std::invalid_argument("scalar diffusion s must be positive");
  }
  Eigen::JacobiSVD<Mat> svd(ulr.a_mat);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(ulr.L - 1);
  if (smin <= 1e-12 * std::max(1.0, smax)) {
    throw std::invalid_argument("a must have full column rank");
  }
}

void validate(const ModelParams& params) {
  validate(params.sr);
  validate(params.ulr);
  if (params.ulr.a_mat.rows() != params.sr.n) {
    throw std::invalid_argument("a must have n rows");
  }
}

ModelParams univariate_params(double eta, double phi, double theta, double s) {
  ModelParams p;
  p.sr.n = 1;
  p.sr.phi = Mat::Constant(1, 1, phi);
  p.sr.omega_half = Mat::Constant(1, 1, eta);
  p.ulr.L = 1;
  p.ulr.theta = Mat::Constant(1, 1, theta);
  p.ulr.s_mat = Mat::Constant(1, 1, s);
  p.ulr.a_mat = Mat::Constant(1, 1, 1.0);
  validate(p);
  return p;
}

void ou_transition(const ULRParams& ulr, double delta, Mat* rho, Mat* sigma) {
  if (!(delta > 0.0)) throw std::invalid_argument("time increment must be positive");
  const int L = ulr.L;
  *rho = mat_exp(-ulr.theta * delta);
  Mat ks = kron_sum(ulr.theta);
  Eigen::FullPivLU<Mat> lu(ks);
  if (!lu.isInvertible()) {
    throw std::domain_error("degenerate drift: kronecker sum is singular");
  }
  Mat decay = Mat::Identity(L * L, L * L) - mat_exp(-ks * delta);
  Vec rhs = decay * vec_of(ulr.s_mat * ulr.s_mat.transpose());
  Mat sig = unvec(lu.solve(rhs), L, L);
  *sigma = 0.5 * (sig + sig.transpose());
}

DiscretizedULR discretize_ulr(const ULRParams& ulr, long T) {
  if (T < 1) throw std::invalid_argument("T must be at least 1");
  DiscretizedULR d;
  d.T = T;
  ou_transition(ulr, 1.0 / static_cast<double>(T), &d.rho_mat, &d.sigma_T);
  return d;
}

Mat stationary_cov_ulr(const ULRParams& ulr) {
  const int L = ulr.L;
  Mat ks = kron_sum(ulr.theta);
  Eigen::FullPivLU<Mat> lu(ks);
  if (!lu.isInvertible()) {
    throw std::domain_error("degenerate drift: kronecker sum is singular");
  }
  Mat sigma = unvec(lu.solve(vec_of(ulr.s_mat * ulr.s_mat.transpose())), L, L);
  return 0.5 * (sigma + sigma.transpose());
}

Mat stationary_cov_sr(const SRParams& sr) {
  return solve_discrete_lyapunov(sr.phi, sr.omega_half * sr.omega_half.transpose());
}

double theo_acov_univ(const ModelParams& params, long T, long h, AcovVariant variant) {
  if (h < 0) throw std::invalid_argument("lag h must be nonnegative");
  if (T < 1) throw std::invalid_argument("T must be at least 1");
  const double phi = params.phi_u();
  const double eta = params.eta();
  const double theta = params.theta_u();
  const double s = params.s_u();
  const double sr_term = eta * eta * std::pow(phi, static_cast<double>(h));
  const double var_l = s * s / (2.0 * theta);
  const double x = static_cast<double>(h) * theta / static_cast<double>(T);
  if (variant == AcovVariant::saturating) {
    return sr_term + var_l * (-std::expm1(-2.0 * x));
  }
  return sr_term + var_l * std::exp(-x);
}

double theo_spectrum_univ(const ModelParams& params, long T, double w, SpectrumVariant variant) {
  if (T < 1) throw std::invalid_argument("T must be at least 1");
  const double phi = params.phi_u();
  const double eta = params.eta();
  const double theta = params.theta_u();
  const double s = params.s_u();
  const double sw = std::sin(0.5 * w);
  // 1 + a^2 - 2 a cos w rewritten as (1-a)^2 + 4 a sin^2(w/2) to keep
  // precision near w = 0 where the slow peak lives.
  const double sr_den = (1.0 - phi) * (1.0 - phi) + 4.0 * phi * sw * sw;
  const double sr_term = eta * eta / (2.0 * kPi) / sr_den;
  const double rho = std::exp(-theta / static_cast<double>(T));
  const double one_minus_rho2 = -std::expm1(-2.0 * theta / static_cast<double>(T));
  const double ulr_den = (1.0 - rho) * (1.0 - rho) + 4.0 * rho * sw * sw;
  double ulr_term = s * s / (2.0 * kPi * theta) * one_minus_rho2 / ulr_den;
  if (variant == SpectrumVariant::normalized) ulr_term *= 0.5;
  return sr_term + ulr_term;
}

double asymptotic_limit(const ModelParams& params, double c_or_lambda, LimitKind kind) {
  if (!(c_or_lambda > 0.0)) {
    throw std::invalid_argument("limit parameter must be positive");
  }
  const double phi = params.phi_u();
  const double eta = params.eta();
  const double theta = params.theta_u();
  const double s = params.s_u();
  if (kind == LimitKind::acov_long_lag) {
    return s * s / (2.0 * theta) * (-std::expm1(-2.0 * c_or_lambda * theta));
  }
  return eta * eta / (2.0 * kPi * (1.0 - phi) * (1.0 - phi)) + 2.0 * theta / c_or_lambda;
}

namespace {

void write_mat(std::ostringstream& out, const char* key, const Mat& m) {
  out << key << " =";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ' ' << m(i, j);
  }
  out << '\n';
}

Mat mat_from(const std::map<std::string, std::vector<double>>& kv, const std::string& key,
             int rows, int cols) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::invalid_argument("missing key '" + key + "'");
  const auto& v = it->second;
  if (static_cast<int>(v.size()) != rows * cols) {
    throw std::invalid_argument("key '" + key + "' expects " + std::to_string(rows * cols) +
                                " entries, got " + std::to_string(v.size()));
  }
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = v[static_cast<size_t>(i) * cols + j];
  }
  return m;
}

int int_from(const std::map<std::string, std::vector<double>>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw std::invalid_argument("missing key '" + key + "'");
  if (it->second.size() != 1) throw std::invalid_argument("key '" + key + "' expects one value");
  double v = it->second[0];
  if (v < 1.0 || v != std::floor(v)) {
    throw std::invalid_argument("key '" + key + "' must be a positive integer");
  }
  return static_cast<int>(v);
}

}  // namespace

std::string serialize_params(const ModelParams& params) {
  std::ostringstream out;
  out.precision(17);
  out << "n = " << params.sr.n << '\n';
  out << "L = " << params.ulr.L << '\n';
  write_mat(out, "phi", params.sr.phi);
  write_mat(out, "omega_half", params.sr.omega_half);
  write_mat(out, "a", params.ulr.a_mat);
  write_mat(out, "theta", params.ulr.theta);
  write_mat(out, "s", params.ulr.s_mat);
  return out.str();
}

ModelParams parse_params(const std::string& text) {
  static const std::vector<std::string> known = {"n", "L", "phi", "omega_half", "a", "theta", "s"};
  std::map<std::string, std::vector<double>> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 'key = values'");
    }
    std::string key = line.substr(first, eq - first);
    key.erase(key.find_last_not_of(" \t") + 1);
    bool recognized = false;
    for (const auto& k : known) recognized = recognized || (k == key);
    if (!recognized) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (kv.count(key)) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    std::istringstream vals(line.substr(eq + 1));
    std::vector<double> v;
    std::string tok;
    while (vals >> tok) {
      size_t used = 0;
      double x = 0.0;
      try {
        x = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) {
        throw std::invalid_argument("line " + std::to_string(lineno) + ": non-numeric value '" +
                                    tok + "' for key '" + key + "'");
      }
      v.push_back(x);
    }
    if (v.empty()) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": no values for key '" + key +
                                  "'");
    }
    kv.emplace(std::move(key), std::move(v));
  }
  ModelParams p;
  p.sr.n = int_from(kv, "n");
  p.ulr.L = int_from(kv, "L");
  p.sr.phi = mat_from(kv, "phi", p.sr.n, p.sr.n);
  p.sr.omega_half = mat_from(kv, "omega_half", p.sr.n, p.sr.n);
  p.ulr.a_mat = mat_from(kv, "a", p.sr.n, p.ulr.L);
  p.ulr.theta = mat_from(kv, "theta", p.ulr.L, p.ulr.L);
  p.ulr.s_mat = mat_from(kv, "s", p.ulr.L, p.ulr.L);
  validate(p);
  return p;
}

ModelParams load_params(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open parameter file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_params(buf.str());
}

void save_params(const ModelParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write parameter file: " + path);
  out << serialize_params(params);
}

}  // namespace ulr
