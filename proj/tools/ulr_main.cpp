#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ulr/acf.hpp"
#include "ulr/estimate.hpp"
#include "ulr/experiments.hpp"
#include "ulr/linalg.hpp"
#include "ulr/model.hpp"
#include "ulr/pipeline.hpp"
#include "ulr/predict.hpp"
#include "ulr/simulate.hpp"

namespace {

namespace fs = std::filesystem;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

ulr::ModelParams params_or_benchmark(const std::string& params_file) {
  if (params_file.empty()) return ulr::bivariate_ulr_preset().params;
  return ulr::load_params(params_file);
}

// Loads a dated CSV and keeps the observation columns: the ones named y_*
// when present (so simulated paths round-trip), otherwise every column.
ulr::Mat read_series(const std::string& path, std::vector<std::string>* names_out = nullptr) {
  const ulr::SeriesBundle bundle = ulr::ingest_csv(path);
  std::vector<long> keep;
  for (size_t i = 0; i < bundle.names.size(); ++i) {
    if (bundle.names[i].rfind("y_", 0) == 0) keep.push_back(static_cast<long>(i));
  }
  if (keep.empty()) {
    for (size_t i = 0; i < bundle.names.size(); ++i) keep.push_back(static_cast<long>(i));
  }
  ulr::Mat y(static_cast<long>(keep.size()), bundle.values.cols());
  for (size_t r = 0; r < keep.size(); ++r) {
    y.row(static_cast<long>(r)) = bundle.values.row(keep[r]);
    if (names_out != nullptr) names_out->push_back(bundle.names[static_cast<size_t>(keep[r])]);
  }
  return y;
}

std::vector<double> even_grid(long k) {
  std::vector<double> grid;
  for (long i = 0; i < k; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(k));
  return grid;
}

void write_mat_rows(std::ostream& out, const std::string& block, const ulr::Mat& m) {
  for (long i = 0; i < m.rows(); ++i) {
    for (long j = 0; j < m.cols(); ++j) {
      out << block << ',' << i << ',' << j << ',' << fmt17(m(i, j)) << '\n';
    }
  }
}

void write_scalar_row(std::ostream& out, const std::string& block, double v) {
  out << block << ",0,0," << fmt17(v) << '\n';
}

void print_mat(std::ostream& out, const std::string& title, const ulr::Mat& m) {
  out << title << " (" << m.rows() << " x " << m.cols() << ")\n";
  for (long i = 0; i < m.rows(); ++i) {
    out << " ";
    for (long j = 0; j < m.cols(); ++j) out << ' ' << fmt17(m(i, j));
    out << '\n';
  }
}

// ---- simulate ----

void run_simulate(const std::string& params_file, long t_len, unsigned long seed,
                  const std::string& out_path) {
  const ulr::ModelParams params = params_or_benchmark(params_file);
  const ulr::ArrayPath path = ulr::simulate_array(params, t_len, seed);
  std::ofstream out = open_out(out_path);
  out << "t";
  for (long i = 0; i < params.sr.n; ++i) out << ",y_" << (i + 1);
  for (long i = 0; i < params.sr.n; ++i) out << ",ys_" << (i + 1);
  for (long l = 0; l < params.ulr.L; ++l) out << ",yl_" << (l + 1);
  out << '\n';
  for (long t = 0; t < t_len; ++t) {
    out << (t + 1);
    for (long i = 0; i < params.sr.n; ++i) out << ',' << fmt17(path.y(i, t));
    for (long i = 0; i < params.sr.n; ++i) out << ',' << fmt17(path.y_s(i, t));
    for (long l = 0; l < params.ulr.L; ++l) out << ',' << fmt17(path.y_l_grid(l, t));
    out << '\n';
  }
  std::cout << "wrote " << out_path << " (" << t_len << " observations)\n";
}

// ---- ltu ----

const std::map<std::string, ulr::LTUTag>& ltu_tags() {
  static const std::map<std::string, ulr::LTUTag> tags = {
      {"random_walk", ulr::LTUTag::random_walk},
      {"singular", ulr::LTUTag::singular},
      {"ltu_zero_init", ulr::LTUTag::ltu_zero_init},
      {"ltu_stationary", ulr::LTUTag::ltu_stationary},
      {"ltu_scaled", ulr::LTUTag::ltu_scaled},
      {"rw_scaled", ulr::LTUTag::rw_scaled},
      {"ulr", ulr::LTUTag::ulr},
      {"time_deformed", ulr::LTUTag::time_deformed}};
  return tags;
}

void run_ltu(const std::string& variant_name, double c, double sigma, double d, long t_len,
             unsigned long seed, double tail_mult, long tail_reps, const std::string& out_dir) {
  std::vector<std::string> chosen;
  if (variant_name == "all") {
    for (const auto& [name, tag] : ltu_tags()) chosen.push_back(name);
  } else if (ltu_tags().count(variant_name)) {
    chosen.push_back(variant_name);
  } else {
    throw std::invalid_argument("unknown variant '" + variant_name + "'");
  }
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::ofstream summary = open_out(dir / "tail_summary.csv");
  summary << "variant,c,sigma,d,T,a_level,p_max,std_err,argmax_t\n";
  for (const auto& name : chosen) {
    ulr::LTUVariant variant;
    variant.tag = ltu_tags().at(name);
    variant.c = c;
    variant.sigma = sigma;
    variant.d = d;
    const std::vector<double> path = ulr::simulate_ltu(variant, t_len, seed);
    std::ofstream out = open_out(dir / (name + ".csv"));
    out << "t,y\n";
    for (long t = 0; t < t_len; ++t) out << (t + 1) << ',' << fmt17(path[static_cast<size_t>(t)]) << '\n';
    const double a_level = tail_mult * sigma;
    const ulr::TailEstimate tail = ulr::tail_prob(variant, t_len, a_level, tail_reps, seed + 1);
    summary << name << ',' << fmt17(c) << ',' << fmt17(sigma) << ',' << fmt17(d) << ',' << t_len
            << ',' << fmt17(a_level) << ',' << fmt17(tail.p_max) << ',' << fmt17(tail.std_err)
            << ',' << tail.argmax_t << '\n';
  }
  std::cout << "wrote " << chosen.size() << " path file(s) and tail_summary.csv in " << out_dir
            << '\n';
}

// ---- acf ----

void write_acf(const ulr::AcfEstimate& est, const std::string& out_path) {
  std::ofstream out = open_out(out_path);
  out << "lag,i,j,value\n";
  for (size_t h = 0; h < est.lags.size(); ++h) {
    const ulr::Mat& m = est.values[h];
    for (long i = 0; i < m.rows(); ++i) {
      for (long j = 0; j < m.cols(); ++j) {
        out << est.lags[h] << ',' << (i + 1) << ',' << (j + 1) << ',' << fmt17(m(i, j)) << '\n';
      }
    }
  }
}

// ---- estimate ----

void run_estimate(const std::string& input, long grid_count, long window, double threshold,
                  const std::string& report_path, const std::string& csv_path) {
  const ulr::Mat y = read_series(input);
  const ulr::EstimationReport report =
      ulr::estimate_pipeline(y, even_grid(grid_count), window, threshold);

  {
    std::ofstream out = open_out(report_path);
    out << "estimation report\n";
    out << "sample: " << input << " (" << y.rows() << " series, " << y.cols()
        << " observations)\n";
    out << "anchors: " << report.c_grid.size() << ", window: " << report.H_T
        << ", share threshold: " << fmt17(report.threshold) << "\n\n";
    print_mat(out, "fast transition phi_hat", report.phi_hat);
    out << "spectral radius: " << fmt17(report.spectral_radius_phi) << '\n';
    print_mat(out, "fast innovation covariance omega_hat", report.omega_hat);
    out << "\nslow factor count: " << report.L_hat << '\n';
    print_mat(out, "eigenvalues of the mean outer product",
              ulr::Mat(report.eigenvalues.transpose()));
    if (report.L_hat > 0) {
      print_mat(out, "loadings a_hat", report.a_hat);
      print_mat(out, "factor path on the anchor grid", report.y_l_hat);
      print_mat(out, "mean reversion theta_hat", report.theta_hat);
      print_mat(out, "diffusion scale s_hat", report.s_hat);
      out << "coarse AR coefficient: " << fmt17(report.ar1.rho_hat) << '\n';
      out << "coarse log likelihood: " << fmt17(report.ou_loglik) << '\n';
    }
    print_mat(out, "long-horizon covariance limit", report.sigma_inf_hat);
    out << "\nflags:";
    if (report.flags.omega_clipped) out << " omega_clipped";
    if (report.flags.phi_unstable) out << " phi_unstable";
    if (report.flags.no_factor) out << " no_factor";
    if (report.flags.rho_nonpositive) out << " rho_nonpositive";
    if (report.flags.rho_boundary) out << " rho_boundary";
    if (report.flags.rho_weak) out << " rho_weak";
    if (report.flags.s_clipped) out << " s_clipped";
    out << '\n';
  }

  {
    std::ofstream out = open_out(csv_path);
    out << "block,i,j,value\n";
    write_scalar_row(out, "L_hat", static_cast<double>(report.L_hat));
    write_scalar_row(out, "H_T", static_cast<double>(report.H_T));
    write_scalar_row(out, "K_scale", static_cast<double>(report.K_scale));
    write_scalar_row(out, "threshold", report.threshold);
    write_scalar_row(out, "spectral_radius_phi", report.spectral_radius_phi);
    write_scalar_row(out, "rho_hat", report.ar1.rho_hat);
    write_scalar_row(out, "sigma2_hat", report.ar1.sigma2_hat);
    write_scalar_row(out, "flag_omega_clipped", report.flags.omega_clipped ? 1.0 : 0.0);
    write_scalar_row(out, "flag_phi_unstable", report.flags.phi_unstable ? 1.0 : 0.0);
    write_scalar_row(out, "flag_no_factor", report.flags.no_factor ? 1.0 : 0.0);
    write_scalar_row(out, "flag_rho_nonpositive", report.flags.rho_nonpositive ? 1.0 : 0.0);
    write_scalar_row(out, "flag_rho_boundary", report.flags.rho_boundary ? 1.0 : 0.0);
    write_scalar_row(out, "flag_rho_weak", report.flags.rho_weak ? 1.0 : 0.0);
    write_scalar_row(out, "flag_s_clipped", report.flags.s_clipped ? 1.0 : 0.0);
    for (size_t k = 0; k < report.c_grid.size(); ++k) {
      out << "c_grid," << k << ",0," << fmt17(report.c_grid[k]) << '\n';
    }
    write_mat_rows(out, "phi_hat", report.phi_hat);
    write_mat_rows(out, "omega_hat", report.omega_hat);
    write_mat_rows(out, "omega_half_hat", report.omega_half_hat);
    write_mat_rows(out, "eigenvalues", ulr::Mat(report.eigenvalues));
    if (report.L_hat > 0) {
      write_mat_rows(out, "a_hat", report.a_hat);
      write_mat_rows(out, "y_l_hat", report.y_l_hat);
      write_mat_rows(out, "theta_hat", report.theta_hat);
      write_mat_rows(out, "s_hat", report.s_hat);
    }
    write_mat_rows(out, "sigma_inf_hat", report.sigma_inf_hat);
  }
  std::cout << "wrote " << report_path << " and " << csv_path << '\n';
}

// ---- belt ----

void run_belt(long k_steps, long grid_count, double grid_min, double grid_max,
              const std::vector<double>& levels, long reps, unsigned long seed,
              const std::string& out_path) {
  std::vector<double> grid;
  for (long i = 0; i < grid_count; ++i) {
    grid.push_back(grid_min + (grid_max - grid_min) * static_cast<double>(i) /
                                  static_cast<double>(grid_count - 1));
  }
  const ulr::ConfidenceBelt belt = ulr::build_belt(k_steps, grid, levels, reps, seed);
  std::ofstream out = open_out(out_path);
  out << "rho";
  for (double level : levels) out << ",q_" << fmt17(level);
  out << '\n';
  for (size_t g = 0; g < belt.rho_grid.size(); ++g) {
    out << fmt17(belt.rho_grid[g]);
    for (size_t l = 0; l < belt.levels.size(); ++l) {
      out << ',' << fmt17(belt.quantile_curves(static_cast<long>(l), static_cast<long>(g)));
    }
    out << '\n';
  }
  std::cout << "wrote " << out_path << " (" << belt.rho_grid.size() << " cells, " << reps
            << " paths each)\n";
}

// ---- predict ----

struct StoredReport {
  std::map<std::string, ulr::Mat> blocks;
  std::vector<double> c_grid;
};

StoredReport load_report_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("block,i,j,value", 0) != 0) {
    throw std::invalid_argument("not an estimate table: " + path);
  }
  std::map<std::string, std::vector<std::tuple<long, long, double>>> cells;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string block, si, sj, sv;
    if (!std::getline(fields, block, ',') || !std::getline(fields, si, ',') ||
        !std::getline(fields, sj, ',') || !std::getline(fields, sv)) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": malformed row");
    }
    cells[block].emplace_back(std::stol(si), std::stol(sj), std::stod(sv));
  }
  StoredReport report;
  for (const auto& [block, entries] : cells) {
    long rows = 0, cols = 0;
    for (const auto& [i, j, v] : entries) {
      rows = std::max(rows, i + 1);
      cols = std::max(cols, j + 1);
    }
    ulr::Mat m = ulr::Mat::Zero(rows, cols);
    for (const auto& [i, j, v] : entries) m(i, j) = v;
    if (block == "c_grid") {
      for (long i = 0; i < rows; ++i) report.c_grid.push_back(m(i, 0));
    } else {
      report.blocks[block] = m;
    }
  }
  return report;
}

void run_predict(const std::string& report_path, double alpha, double gamma, long coordinate,
                 bool two_sided, long belt_reps, unsigned long belt_seed,
                 const std::string& out_path) {
  const StoredReport stored = load_report_csv(report_path);
  auto need = [&](const std::string& block) -> const ulr::Mat& {
    auto it = stored.blocks.find(block);
    if (it == stored.blocks.end()) {
      throw std::invalid_argument("estimate table lacks block '" + block + "'");
    }
    return it->second;
  };
  if (static_cast<long>(need("L_hat")(0, 0)) != 1) {
    throw std::invalid_argument("prediction needs a single slow factor");
  }
  const ulr::Mat& a_hat = need("a_hat");
  if (coordinate < 1 || coordinate > a_hat.rows()) {
    throw std::invalid_argument("coordinate out of range");
  }
  const double load = a_hat(coordinate - 1, 0);
  const ulr::Mat& phi = need("phi_hat");
  const ulr::Mat gamma_s0 = ulr::solve_discrete_lyapunov(phi, need("omega_hat"));
  const double eta = std::sqrt(std::max(0.0, gamma_s0(coordinate - 1, coordinate - 1)));
  const ulr::Mat& y_l = need("y_l_hat");
  const double level_last = load * y_l(0, y_l.cols() - 1);
  const double s_scaled = std::abs(load) * need("s_hat")(0, 0);
  const double rho_hat = need("rho_hat")(0, 0);
  const long k_anchors = static_cast<long>(stored.c_grid.size());
  if (k_anchors < 2) throw std::invalid_argument("estimate table lacks the anchor grid");

  std::vector<double> grid;
  for (int i = 1; i <= 49; ++i) grid.push_back(0.02 * i);
  const std::vector<double> levels = {0.01, 0.025, 0.05, 0.1, 0.5, 0.9, 0.95, 0.975, 0.99};
  const ulr::ConfidenceBelt belt =
      ulr::build_belt(k_anchors, grid, levels, belt_reps, belt_seed);
  const ulr::PredictionInterval pi = ulr::minmax_interval(alpha, belt, std::abs(rho_hat), eta,
                                                          s_scaled, level_last, gamma, two_sided);

  std::ofstream out = open_out(out_path);
  out << "horizon_ratio,level,lower,upper,alpha1_star,beta_star,plug_in,parameter_shift,"
         "level_shift\n";
  out << fmt17(pi.horizon_ratio) << ',' << fmt17(pi.level) << ',' << fmt17(pi.lower) << ','
      << fmt17(pi.upper) << ',' << fmt17(pi.alpha1_star) << ',' << fmt17(pi.beta_star) << ','
      << fmt17(pi.decomposition[0]) << ',' << fmt17(pi.decomposition[1]) << ','
      << fmt17(pi.decomposition[2]) << '\n';
  std::cout << "wrote " << out_path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-scale vector autoregression toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate a two-scale path and write it as CSV");
  std::string sim_params, sim_out;
  long sim_t = 0;
  unsigned long sim_seed = 1;
  sim->add_option("--params", sim_params, "model parameter file (benchmark model when absent)");
  sim->add_option("--T", sim_t, "sample length")->required();
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_option("--out", sim_out, "output CSV path")->required();

  // ltu
  auto* ltu = app.add_subcommand("ltu", "simulate near-unit-root benchmark variants");
  std::string ltu_variant = "all", ltu_out = "ltu_out";
  double ltu_c = 1.0, ltu_sigma = 1.0, ltu_d = 1.0, ltu_mult = 4.0;
  long ltu_t = 0, ltu_reps = 1000;
  unsigned long ltu_seed = 1;
  ltu->add_option("--variant", ltu_variant,
                  "variant name (random_walk, singular, ltu_zero_init, ltu_stationary, "
                  "ltu_scaled, rw_scaled, ulr, time_deformed) or 'all'");
  ltu->add_option("--c", ltu_c, "mean reversion rate");
  ltu->add_option("--sigma", ltu_sigma, "noise scale");
  ltu->add_option("--d", ltu_d, "time deformation exponent");
  ltu->add_option("--T", ltu_t, "sample length")->required();
  ltu->add_option("--seed", ltu_seed, "random seed");
  ltu->add_option("--tail-mult", ltu_mult, "tail level as a multiple of sigma");
  ltu->add_option("--tail-reps", ltu_reps, "paths for the tail diagnostic");
  ltu->add_option("--out", ltu_out, "output directory");

  // acf
  auto* acf = app.add_subcommand("acf", "tabulate autocovariance estimates from a path CSV");
  std::string acf_in, acf_out, acf_kind = "standard", acf_cs = "0.2,0.4,0.6,0.8";
  long acf_lag = 20, acf_grid = 20, acf_h = 0;
  double acf_c = 0.5;
  bool acf_raw = false;
  acf->add_option("--input", acf_in, "path CSV (uses the y_* columns when present)")->required();
  acf->add_option("--kind", acf_kind, "standard, distant, local, averaged, or means");
  acf->add_option("--max-lag", acf_lag, "largest tabulated lag");
  acf->add_option("--c", acf_c, "window anchor for the local kind");
  acf->add_option("--c-list", acf_cs, "comma-separated anchors for the distant kind");
  acf->add_option("--even-grid", acf_grid, "anchor count for averaged/means kinds");
  acf->add_option("--H", acf_h, "window width (local, averaged, means)");
  acf->add_flag("--raw", acf_raw, "skip demeaning for the distant kind");
  acf->add_option("--out", acf_out, "output CSV path")->required();

  // estimate
  auto* est = app.add_subcommand("estimate", "run the five-step fit and write the report");
  std::string est_in, est_report = "report.txt", est_csv = "estimates.csv";
  long est_grid = 20, est_h = 0;
  double est_threshold = 0.05;
  est->add_option("--input", est_in, "path CSV (uses the y_* columns when present)")->required();
  est->add_option("--even-grid", est_grid, "anchor count");
  est->add_option("--H", est_h, "window width")->required();
  est->add_option("--threshold", est_threshold, "eigenvalue share threshold");
  est->add_option("--out-report", est_report, "plain-text report path");
  est->add_option("--out-csv", est_csv, "machine-readable estimate table path");

  // belt
  auto* belt = app.add_subcommand("belt", "simulate confidence belt quantile curves");
  std::string belt_out;
  long belt_k = 0, belt_grid_count = 49, belt_reps = 1000;
  double belt_min = 0.02, belt_max = 0.98;
  unsigned long belt_seed = 2718;
  std::vector<double> belt_levels = {0.05, 0.1, 0.5, 0.9, 0.95};
  belt->add_option("--K", belt_k, "chain steps per simulated path")->required();
  belt->add_option("--grid-count", belt_grid_count, "number of grid cells");
  belt->add_option("--grid-min", belt_min, "smallest grid coefficient");
  belt->add_option("--grid-max", belt_max, "largest grid coefficient");
  belt->add_option("--levels", belt_levels, "quantile levels")->delimiter(',');
  belt->add_option("--reps", belt_reps, "paths per grid cell");
  belt->add_option("--seed", belt_seed, "random seed");
  belt->add_option("--out", belt_out, "output CSV path")->required();

  // predict
  auto* pred = app.add_subcommand("predict", "long-horizon interval from an estimate table");
  std::string pred_report, pred_out = "interval.csv";
  double pred_alpha = 0.05, pred_gamma = 0.0;
  long pred_coord = 1, pred_reps = 1000;
  unsigned long pred_seed = 2718;
  bool pred_two = false;
  pred->add_option("--report", pred_report, "estimate table written by the estimate command")
      ->required();
  pred->add_option("--alpha", pred_alpha, "tail level");
  pred->add_option("--gamma", pred_gamma, "horizon as a fraction of the sample")->required();
  pred->add_option("--coordinate", pred_coord, "observed coordinate to predict (1-based)");
  pred->add_flag("--two-sided", pred_two, "mirror the construction for a lower bound");
  pred->add_option("--belt-reps", pred_reps, "paths per belt cell");
  pred->add_option("--belt-seed", pred_seed, "belt random seed");
  pred->add_option("--out", pred_out, "output CSV path");

  // experiment run
  auto* exp = app.add_subcommand("experiment", "reproducible simulation studies");
  exp->require_subcommand(1);
  auto* exp_run = exp->add_subcommand("run", "run the figure suite for a preset or spec file");
  std::string exp_spec, exp_out;
  bool exp_nosvg = false;
  exp_run->add_option("spec", exp_spec, "preset name (bivariate_ulr) or spec file path")
      ->required();
  exp_run->add_option("--out", exp_out, "artifact directory (defaults to <name>_artifacts)");
  exp_run->add_flag("--no-svg", exp_nosvg, "skip the SVG companions");

  // apply
  auto* apply = app.add_subcommand("apply", "block-filter a dated CSV and build the tables");
  std::string apply_in, apply_out;
  long apply_block = 11, apply_horizon = 0, apply_order = 1;
  double apply_alpha = 0.05;
  apply->add_option("--input", apply_in, "input CSV with a date column")->required();
  apply->add_option("--block", apply_block, "observations per block");
  apply->add_option("--horizon", apply_horizon, "forecast horizon in observations")->required();
  apply->add_option("--alpha", apply_alpha, "two-sided level");
  apply->add_option("--order", apply_order, "autoregressive order of the direct column");
  apply->add_option("--out", apply_out, "report directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      run_simulate(sim_params, sim_t, sim_seed, sim_out);
    } else if (ltu->parsed()) {
      run_ltu(ltu_variant, ltu_c, ltu_sigma, ltu_d, ltu_t, ltu_seed, ltu_mult, ltu_reps, ltu_out);
    } else if (acf->parsed()) {
      const ulr::Mat y = read_series(acf_in);
      ulr::AcfEstimate table;
      if (acf_kind == "standard") {
        table = ulr::standard_acf_table(y, acf_lag);
      } else if (acf_kind == "distant") {
        std::vector<double> cs;
        std::string token;
        std::istringstream parts(acf_cs);
        while (std::getline(parts, token, ',')) cs.push_back(std::stod(token));
        table = ulr::distant_acf_table(y, cs, !acf_raw);
      } else if (acf_kind == "local") {
        table = ulr::local_acf_table(y, acf_c, acf_h, acf_lag);
      } else if (acf_kind == "averaged") {
        std::vector<double> reachable;
        for (double c : even_grid(acf_grid)) {
          if (std::lround(c * static_cast<double>(y.cols())) >= acf_lag) reachable.push_back(c);
        }
        if (reachable.empty()) {
          throw std::invalid_argument("no anchor window can reach the requested lag");
        }
        table = ulr::averaged_acf_table(y, reachable, acf_h, acf_lag);
      } else if (acf_kind == "means") {
        table = ulr::means_acf_table(ulr::local_means(y, even_grid(acf_grid), acf_h), acf_lag);
      } else {
        throw std::invalid_argument("unknown kind '" + acf_kind + "'");
      }
      write_acf(table, acf_out);
      std::cout << "wrote " << acf_out << '\n';
    } else if (est->parsed()) {
      run_estimate(est_in, est_grid, est_h, est_threshold, est_report, est_csv);
    } else if (belt->parsed()) {
      run_belt(belt_k, belt_grid_count, belt_min, belt_max, belt_levels, belt_reps, belt_seed,
               belt_out);
    } else if (pred->parsed()) {
      run_predict(pred_report, pred_alpha, pred_gamma, pred_coord, pred_two, pred_reps,
                  pred_seed, pred_out);
    } else if (exp->parsed()) {
      const ulr::ExperimentSpec spec = exp_spec == "bivariate_ulr"
                                           ? ulr::bivariate_ulr_preset()
                                           : ulr::load_experiment_spec(exp_spec);
      const std::string out_dir = exp_out.empty() ? spec.name + "_artifacts" : exp_out;
      const ulr::FigSuiteResult result = ulr::run_fig_suite(spec, out_dir, !exp_nosvg);
      std::cout << "spec " << result.hash << '\n';
      for (const auto& name : result.artifacts) std::cout << out_dir << '/' << name << '\n';
    } else if (apply->parsed()) {
      const ulr::ApplyResult result =
          ulr::run_apply(apply_in, apply_block, apply_horizon, apply_alpha, apply_out,
                         apply_order);
      for (const auto& name : result.files) std::cout << apply_out << '/' << name << '\n';
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
