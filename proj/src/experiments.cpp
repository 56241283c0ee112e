#include "ulr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ulr/acf.hpp"
#include "ulr/estimate.hpp"
#include "ulr/rng.hpp"
#include "ulr/simulate.hpp"

namespace ulr {

namespace {

const std::vector<std::string> kArtifacts = {
    "trajectory.csv", "local_means.csv", "acf_standard.csv", "acf_short_run.csv",
    "acf_means.csv"};

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Two-coordinate benchmark model on the coarse clock; the fast innovation
// scale shrinks for studies that need the slow block to dominate.
ModelParams benchmark_params(double fast_scale) {
  ModelParams params;
  params.sr.n = 2;
  params.sr.phi = Mat::Zero(2, 2);
  params.sr.phi(0, 0) = 0.3;
  params.sr.phi(1, 1) = 0.7;
  params.sr.omega_half = Mat::Zero(2, 2);
  params.sr.omega_half(0, 0) = 1.0;
  params.sr.omega_half(0, 1) = 1.0;
  params.sr.omega_half(1, 1) = 2.0;
  params.sr.omega_half *= fast_scale;
  params.ulr.L = 1;
  params.ulr.theta = Mat::Constant(1, 1, 2.0 * std::log(2.5));
  params.ulr.s_mat = Mat::Constant(1, 1, std::sqrt(20.0));
  params.ulr.a_mat = Mat::Ones(2, 1);
  return params;
}

double quartile_spread(std::vector<double> v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  auto at = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<size_t>(h);
    const size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return at(0.75) - at(0.25);
}

void write_svg_lines(const std::filesystem::path& path, const std::string& hash,
                     const std::vector<double>& xs,
                     const std::vector<std::vector<double>>& series) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#8c564b", "#e377c2"};
  const double width = 800.0, height = 400.0, margin = 40.0;
  double xmin = xs.front(), xmax = xs.back();
  double ymin = std::numeric_limits<double>::infinity(), ymax = -ymin;
  for (const auto& s : series) {
    for (double v : s) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  }
  if (!(xmax > xmin)) xmax = xmin + 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  auto px = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (width - 2 * margin); };
  auto py = [&](double y) {
    return height - margin - (y - ymin) / (ymax - ymin) * (height - 2 * margin);
  };
  auto fmt2 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 400\">\n";
  out << "<!-- spec " << hash << " -->\n";
  out << "<rect x=\"" << fmt2(margin) << "\" y=\"" << fmt2(margin) << "\" width=\""
      << fmt2(width - 2 * margin) << "\" height=\"" << fmt2(height - 2 * margin)
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  const size_t n = xs.size();
  const size_t stride = std::max<size_t>(1, n / 1600);
  for (size_t k = 0; k < series.size(); ++k) {
    out << "<polyline fill=\"none\" stroke=\"" << palette[k % 6] << "\" points=\"";
    for (size_t i = 0; i < n; i += stride) {
      out << fmt2(px(xs[i])) << ',' << fmt2(py(series[k][i])) << ' ';
    }
    if ((n - 1) % stride != 0) {
      out << fmt2(px(xs[n - 1])) << ',' << fmt2(py(series[k][n - 1])) << ' ';
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

// Diagonal autocorrelations of a tabulated autocovariance estimate; rows of
// zeros when the lag-0 variance has collapsed.
void write_acf_csv(const std::filesystem::path& path, const std::string& hash,
                   const AcfEstimate& est, bool degenerate, bool with_svg,
                   std::vector<std::string>* artifacts) {
  const long n = est.values.front().rows();
  std::ofstream out = open_out(path);
  out << "# spec " << hash << '\n';
  if (degenerate) out << "# degenerate\n";
  out << "lag";
  for (long i = 0; i < n; ++i) out << ",corr_" << (i + 1);
  out << '\n';
  std::vector<double> xs;
  std::vector<std::vector<double>> cols(static_cast<size_t>(n));
  for (size_t h = 0; h < est.lags.size(); ++h) {
    out << est.lags[h];
    xs.push_back(static_cast<double>(est.lags[h]));
    for (long i = 0; i < n; ++i) {
      const double var0 = est.values.front()(i, i);
      const double corr = degenerate ? 0.0 : est.values[h](i, i) / var0;
      cols[static_cast<size_t>(i)].push_back(corr);
      out << ',' << fmt17(corr);
    }
    out << '\n';
  }
  artifacts->push_back(path.filename().string());
  if (with_svg) {
    std::filesystem::path svg = path;
    svg.replace_extension(".svg");
    write_svg_lines(svg, hash, xs, cols);
    artifacts->push_back(svg.filename().string());
  }
}

bool wants(const ExperimentSpec& spec, const std::string& name) {
  if (spec.outputs.empty()) return true;
  return std::find(spec.outputs.begin(), spec.outputs.end(), name) != spec.outputs.end();
}

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long parse_long(const std::string& value, int lineno, const std::string& key) {
  size_t used = 0;
  long out = 0;
  try {
    out = std::stol(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(value.substr(used)) != "") {
    throw std::invalid_argument("line " + std::to_string(lineno) + ": '" + key +
                                "' expects an integer, got '" + value + "'");
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& value, int lineno, const std::string& key) {
  std::string cleaned = value;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream in(cleaned);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": '" + key +
                                  "' has a malformed number '" + tok + "'");
    }
    out.push_back(v);
  }
  return out;
}

ExperimentSpec parse_spec_impl(const std::string& text, const std::filesystem::path& base_dir) {
  std::map<std::string, std::pair<std::string, int>> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    static const std::vector<std::string> known = {"name",   "T",         "H_T",
                                                   "K",      "reps",      "seed",
                                                   "c_grid", "even_grid", "params_file",
                                                   "outputs"};
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": unknown key '" + key +
                                  "'");
    }
    if (kv.count(key)) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": duplicate key '" + key +
                                  "'");
    }
    kv[key] = {trim(stripped.substr(eq + 1)), lineno};
  }

  ExperimentSpec spec;
  spec.params = benchmark_params(1.0);
  spec.reps = 1;
  spec.seed = 1;
  auto require = [&](const std::string& key) {
    if (!kv.count(key)) throw std::invalid_argument("missing required key '" + key + "'");
  };
  require("name");
  require("T");
  require("H_T");
  spec.name = kv["name"].first;
  spec.T = parse_long(kv["T"].first, kv["T"].second, "T");
  spec.H_T = parse_long(kv["H_T"].first, kv["H_T"].second, "H_T");
  if (kv.count("reps")) spec.reps = parse_long(kv["reps"].first, kv["reps"].second, "reps");
  if (kv.count("seed")) {
    spec.seed = static_cast<unsigned long>(parse_long(kv["seed"].first, kv["seed"].second, "seed"));
  }
  if (kv.count("c_grid") && kv.count("even_grid")) {
    throw std::invalid_argument("give either 'c_grid' or 'even_grid', not both");
  }
  if (kv.count("c_grid")) {
    spec.c_grid = parse_doubles(kv["c_grid"].first, kv["c_grid"].second, "c_grid");
  } else if (kv.count("even_grid")) {
    const long m = parse_long(kv["even_grid"].first, kv["even_grid"].second, "even_grid");
    if (m < 1) throw std::invalid_argument("'even_grid' must be a positive anchor count");
    for (long k = 0; k < m; ++k) {
      spec.c_grid.push_back(static_cast<double>(k) / static_cast<double>(m));
    }
  } else {
    throw std::invalid_argument("missing required key 'c_grid' (or 'even_grid')");
  }
  spec.K = kv.count("K") ? parse_long(kv["K"].first, kv["K"].second, "K")
                         : static_cast<long>(spec.c_grid.size());
  if (kv.count("params_file")) {
    std::filesystem::path p = kv["params_file"].first;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    spec.params = load_params(p.string());
  }
  if (kv.count("outputs")) {
    std::string cleaned = kv["outputs"].first;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream names(cleaned);
    std::string tok;
    while (names >> tok) spec.outputs.push_back(tok);
  }
  validate(spec);
  return spec;
}

}  // namespace

void validate(const ExperimentSpec& spec) {
  if (spec.name.empty()) throw std::invalid_argument("experiment name is empty");
  validate(spec.params);
  if (spec.T < 2) throw std::invalid_argument("sample length must be at least 2");
  if (spec.H_T < 1) throw std::invalid_argument("window width must be positive");
  if (spec.reps < 1) throw std::invalid_argument("replication count must be positive");
  if (spec.c_grid.empty()) throw std::invalid_argument("anchor grid is empty");
  if (spec.K != static_cast<long>(spec.c_grid.size())) {
    throw std::invalid_argument("K must equal the anchor count");
  }
  for (size_t k = 0; k < spec.c_grid.size(); ++k) {
    const double c = spec.c_grid[k];
    if (!(c >= 0.0) || !(c < 1.0)) {
      throw std::invalid_argument("anchors must lie in [0, 1)");
    }
    if (k > 0 && !(c > spec.c_grid[k - 1])) {
      throw std::invalid_argument("anchor grid must be strictly increasing");
    }
    if (std::lround(c * static_cast<double>(spec.T)) + spec.H_T > spec.T) {
      throw std::invalid_argument("window at anchor " + fmt17(c) + " spills past the sample");
    }
  }
  for (const auto& name : spec.outputs) {
    if (std::find(kArtifacts.begin(), kArtifacts.end(), name) == kArtifacts.end()) {
      throw std::invalid_argument("unknown output artifact '" + name + "'");
    }
  }
}

std::string spec_hash(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "name=" << spec.name << '\n' << serialize_params(spec.params);
  out << "T=" << spec.T << "\nH_T=" << spec.H_T << "\nK=" << spec.K << "\nreps=" << spec.reps
      << "\nseed=" << spec.seed << "\nc_grid=";
  for (double c : spec.c_grid) out << ' ' << fmt17(c);
  out << "\noutputs=";
  for (const auto& name : spec.outputs) out << ' ' << name;
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : out.str()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentSpec bivariate_ulr_preset() {
  ExperimentSpec spec;
  spec.name = "bivariate_ulr";
  spec.params = benchmark_params(1.0);
  spec.T = 7200;
  spec.H_T = 60;
  spec.K = 20;
  for (long k = 0; k < 20; ++k) spec.c_grid.push_back(static_cast<double>(k) / 20.0);
  spec.reps = 200;
  spec.seed = 1;
  return spec;
}

FigSuiteResult run_fig_suite(const ExperimentSpec& spec, const std::string& out_dir,
                             bool with_svg) {
  validate(spec);
  FigSuiteResult result;
  result.out_dir = out_dir;
  result.hash = spec_hash(spec);
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  const ArrayPath path = simulate_array(spec.params, spec.T, spec.seed);
  const LocalMeans means = local_means(path.y, spec.c_grid, spec.H_T);
  const long n = spec.params.sr.n;
  const Mat var0 = sample_acov(path.y, 0);
  for (long i = 0; i < n; ++i) result.degenerate = result.degenerate || var0(i, i) < 1e-100;

  if (wants(spec, "trajectory.csv")) {
    const Mat level = spec.params.ulr.a_mat * path.y_l_grid;
    std::ofstream out = open_out(dir / "trajectory.csv");
    out << "# spec " << result.hash << "\nt";
    for (long i = 0; i < n; ++i) out << ",y_" << (i + 1);
    for (long i = 0; i < n; ++i) out << ",level_" << (i + 1);
    out << '\n';
    std::vector<double> xs;
    std::vector<std::vector<double>> cols(static_cast<size_t>(n));
    for (long t = 0; t < spec.T; ++t) {
      out << (t + 1);
      xs.push_back(static_cast<double>(t + 1));
      for (long i = 0; i < n; ++i) {
        cols[static_cast<size_t>(i)].push_back(path.y(i, t));
        out << ',' << fmt17(path.y(i, t));
      }
      for (long i = 0; i < n; ++i) out << ',' << fmt17(level(i, t));
      out << '\n';
    }
    result.artifacts.push_back("trajectory.csv");
    if (with_svg) {
      write_svg_lines(dir / "trajectory.svg", result.hash, xs, cols);
      result.artifacts.push_back("trajectory.svg");
    }
  }

  if (wants(spec, "local_means.csv")) {
    std::ofstream out = open_out(dir / "local_means.csv");
    out << "# spec " << result.hash << "\nc";
    for (long i = 0; i < n; ++i) out << ",mean_" << (i + 1);
    out << '\n';
    std::vector<std::vector<double>> cols(static_cast<size_t>(n));
    for (long k = 0; k < spec.K; ++k) {
      out << fmt17(spec.c_grid[static_cast<size_t>(k)]);
      for (long i = 0; i < n; ++i) {
        cols[static_cast<size_t>(i)].push_back(means.means(i, k));
        out << ',' << fmt17(means.means(i, k));
      }
      out << '\n';
    }
    result.artifacts.push_back("local_means.csv");
    if (with_svg) {
      write_svg_lines(dir / "local_means.svg", result.hash, spec.c_grid, cols);
      result.artifacts.push_back("local_means.svg");
    }
  }

  if (wants(spec, "acf_standard.csv")) {
    const long max_lag = std::min<long>(120, spec.T - 2);
    write_acf_csv(dir / "acf_standard.csv", result.hash, standard_acf_table(path.y, max_lag),
                  result.degenerate, with_svg, &result.artifacts);
  }

  if (wants(spec, "acf_short_run.csv")) {
    const long max_lag = std::min<long>(40, spec.H_T - 1);
    std::vector<double> reachable;
    for (double c : spec.c_grid) {
      if (std::lround(c * static_cast<double>(spec.T)) >= max_lag) reachable.push_back(c);
    }
    if (reachable.empty()) {
      throw std::invalid_argument("no anchor window can reach the averaged-table lags");
    }
    write_acf_csv(dir / "acf_short_run.csv", result.hash,
                  averaged_acf_table(path.y, reachable, spec.H_T, max_lag), result.degenerate,
                  with_svg, &result.artifacts);
  }

  if (wants(spec, "acf_means.csv")) {
    const long max_lag = std::min<long>(10, spec.K - 1);
    write_acf_csv(dir / "acf_means.csv", result.hash, means_acf_table(means, max_lag),
                  result.degenerate, with_svg, &result.artifacts);
  }

  std::ofstream manifest = open_out(dir / "manifest.txt");
  for (const auto& name : result.artifacts) manifest << name << '\t' << result.hash << '\n';
  result.artifacts.push_back("manifest.txt");
  return result;
}

std::vector<VarianceCheckRow> local_mean_variance_check(const ModelParams& params, double c,
                                                        const std::vector<long>& H_grid, long T,
                                                        long reps, unsigned long seed) {
  if (params.ulr.L != 1) throw std::invalid_argument("the diagnostic needs a scalar slow block");
  const double theta = params.ulr.theta(0, 0);
  const double s = params.ulr.s_mat(0, 0);
  if (!(theta > 0.0)) throw std::invalid_argument("mean reversion rate must be positive");
  if (!std::isfinite(s)) throw std::invalid_argument("diffusion scale must be finite");
  if (T < 1) throw std::invalid_argument("sample length must be positive");
  if (reps < 2) throw std::invalid_argument("the variance needs at least two replications");
  if (!(c >= 0.0) || !(c < 1.0)) throw std::invalid_argument("anchor must lie in [0, 1)");
  if (H_grid.empty()) throw std::invalid_argument("window grid is empty");

  const double dt = 1.0 / static_cast<double>(T);
  const double rho = std::exp(-theta * dt);
  const double sig = std::abs(s) * std::sqrt(-std::expm1(-2.0 * theta * dt) / (2.0 * theta));
  std::vector<VarianceCheckRow> rows;
  for (size_t j = 0; j < H_grid.size(); ++j) {
    const long H = H_grid[j];
    if (H < 1) throw std::invalid_argument("window widths must be positive");
    double sum = 0.0, sumsq = 0.0;
    for (long r = 0; r < reps; ++r) {
      RngStream rng(seed, static_cast<uint64_t>(j) * static_cast<uint64_t>(reps) +
                              static_cast<uint64_t>(r));
      double v = 0.0, acc = 0.0;
      for (long i = 0; i < H; ++i) {
        v = rho * v + sig * rng.normal();
        acc += v;
      }
      const double delta = acc / static_cast<double>(H);
      sum += delta;
      sumsq += delta * delta;
    }
    const double nr = static_cast<double>(reps);
    const double var = (sumsq - sum * sum / nr) / (nr - 1.0);
    VarianceCheckRow row;
    row.H = H;
    row.empirical = static_cast<double>(H) * var;
    row.predicted = (1.0 / 3.0) * s * s * std::exp(2.0 * theta * c) *
                    static_cast<double>(H) * static_cast<double>(H) / static_cast<double>(T);
    row.ratio = row.predicted > 0.0 ? row.empirical / row.predicted
                                    : (row.empirical == 0.0 ? 0.0
                                                            : std::numeric_limits<double>::quiet_NaN());
    row.flagged = H * H > T;
    rows.push_back(row);
  }
  return rows;
}

std::vector<DispersionRow> drift_dispersion_study(long K, const std::vector<long>& T_grid,
                                                  long reps, unsigned long seed) {
  if (K < 2) throw std::invalid_argument("anchor count must be at least 2");
  if (reps < 1) throw std::invalid_argument("replication count must be positive");
  if (T_grid.empty()) throw std::invalid_argument("sample-length grid is empty");

  const ModelParams params = benchmark_params(0.25);
  std::vector<double> grid;
  for (long k = 0; k < K; ++k) grid.push_back(static_cast<double>(k) / static_cast<double>(K));

  std::vector<DispersionRow> rows;
  for (size_t ti = 0; ti < T_grid.size(); ++ti) {
    const long T = T_grid[ti];
    const long H = std::lround(static_cast<double>(T) / 30.0);
    if (H < 2) throw std::invalid_argument("sample length too short for the window rule");
    for (double c : grid) {
      if (std::lround(c * static_cast<double>(T)) + H > T) {
        throw std::invalid_argument("anchor grid does not fit the sample length");
      }
    }
    std::vector<double> lag_anchors;
    for (double c : grid) {
      if (std::lround(c * static_cast<double>(T)) >= 1) lag_anchors.push_back(c);
    }

    std::vector<double> thetas, phis;
    for (long r = 0; r < reps; ++r) {
      const uint64_t rep_seed =
          static_cast<uint64_t>(seed) + static_cast<uint64_t>(ti) * static_cast<uint64_t>(reps) +
          static_cast<uint64_t>(r);
      const ArrayPath path = simulate_array(params, T, rep_seed);
      const LocalMeans means = local_means(path.y, grid, H);
      const PCAFit pca = step3_pca(means, 0.0);
      const Mat top = pca.y_l_hat.topRows(1);
      const OUFit ou = step4_mle_ou(top, K);
      thetas.push_back(ou.theta_hat(0, 0));
      const Mat g0 = averaged_sr_acov(path.y, lag_anchors, H, 0);
      const Mat g1 = averaged_sr_acov(path.y, lag_anchors, H, 1);
      const SRFit sr = step1_sr(g0, g1);
      phis.push_back(sr.phi_hat(1, 1));
    }

    DispersionRow row;
    row.T = T;
    row.H = H;
    row.flagged = reps < 2;
    row.iqr_theta = quartile_spread(thetas);
    row.iqr_phi = quartile_spread(phis);
    if (rows.empty()) {
      row.ratio_theta = row.flagged ? std::numeric_limits<double>::quiet_NaN() : 1.0;
      row.ratio_phi = row.ratio_theta;
    } else {
      row.ratio_theta = row.iqr_theta / rows.front().iqr_theta;
      row.ratio_phi = row.iqr_phi / rows.front().iqr_phi;
    }
    rows.push_back(row);
  }
  return rows;
}

ExperimentSpec parse_experiment_spec(const std::string& text) {
  return parse_spec_impl(text, std::filesystem::path());
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec_impl(buf.str(), std::filesystem::path(path).parent_path());
}

}  // namespace ulr
