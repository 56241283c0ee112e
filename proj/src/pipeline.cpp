#include "ulr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "ulr/estimate.hpp"
#include "ulr/rng.hpp"

namespace ulr {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Least-squares AR(p) with intercept on the observation clock, forecast by
// iteration and variance by the moving-average weight recursion.
struct ArForecast {
  double center = 0.0;
  double sd = 0.0;
  bool degenerate = false;
};

ArForecast ar_forecast(const Vec& x, long p, long horizon) {
  const long t_obs = x.size();
  const long m = t_obs - p;
  if (m < p + 2) {
    throw std::invalid_argument("too few observations for the autoregressive order");
  }
  Mat design(m, p + 1);
  Vec target(m);
  for (long t = 0; t < m; ++t) {
    design(t, 0) = 1.0;
    for (long i = 0; i < p; ++i) design(t, 1 + i) = x(p + t - 1 - i);
    target(t) = x(p + t);
  }
  const Vec beta = design.colPivHouseholderQr().solve(target);
  const double ssr = (target - design * beta).squaredNorm();
  const double sig2 = ssr / static_cast<double>(m - p - 1);

  std::vector<double> hist(static_cast<size_t>(p));
  for (long i = 0; i < p; ++i) hist[static_cast<size_t>(i)] = x(t_obs - 1 - i);
  double center = hist[0];
  for (long step = 0; step < horizon; ++step) {
    double next = beta(0);
    for (long i = 0; i < p; ++i) next += beta(1 + i) * hist[static_cast<size_t>(i)];
    for (long i = p - 1; i > 0; --i) hist[static_cast<size_t>(i)] = hist[static_cast<size_t>(i - 1)];
    hist[0] = next;
    center = next;
  }

  std::vector<double> psi(static_cast<size_t>(horizon), 0.0);
  psi[0] = 1.0;
  for (long j = 1; j < horizon; ++j) {
    double acc = 0.0;
    for (long i = 1; i <= std::min<long>(j, p); ++i) acc += beta(i) * psi[static_cast<size_t>(j - i)];
    psi[static_cast<size_t>(j)] = acc;
  }
  double var = 0.0;
  for (double w : psi) var += w * w;
  var *= sig2;

  ArForecast out;
  out.center = center;
  out.sd = std::sqrt(std::max(0.0, var));
  out.degenerate = !(sig2 > 0.0);
  return out;
}

std::string flag01(bool b) { return b ? "1" : "0"; }

}  // namespace

SeriesBundle ingest_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty file: " + path);
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2) {
    throw std::invalid_argument("line 1: need a date column and at least one series");
  }
  SeriesBundle bundle;
  bundle.names.assign(header.begin() + 1, header.end());

  std::vector<std::vector<double>> rows;
  std::set<std::string> seen;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected " +
                                  std::to_string(header.size()) + " fields, got " +
                                  std::to_string(fields.size()));
    }
    const std::string& date = fields[0];
    if (date.empty()) throw std::invalid_argument("line " + std::to_string(lineno) + ": empty date");
    if (!seen.insert(date).second) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": duplicate date '" + date +
                                  "'");
    }
    std::vector<double> row;
    for (size_t k = 1; k < fields.size(); ++k) {
      if (fields[k].empty()) {
        throw std::invalid_argument("line " + std::to_string(lineno) + ": empty value in column '" +
                                    bundle.names[k - 1] + "'");
      }
      size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(fields[k], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != fields[k].size()) {
        throw std::invalid_argument("line " + std::to_string(lineno) + ": column '" +
                                    bundle.names[k - 1] + "' has non-numeric value '" + fields[k] +
                                    "'");
      }
      row.push_back(v);
    }
    bundle.dates.push_back(date);
    rows.push_back(row);
  }
  if (rows.empty()) throw std::invalid_argument("no observations in " + path);

  const long n = static_cast<long>(bundle.names.size());
  const long t_obs = static_cast<long>(rows.size());
  bundle.values = Mat(n, t_obs);
  for (long t = 0; t < t_obs; ++t) {
    for (long i = 0; i < n; ++i) bundle.values(i, t) = rows[static_cast<size_t>(t)][static_cast<size_t>(i)];
  }
  return bundle;
}

FilteredULR block_filter(const SeriesBundle& bundle, long block_len) {
  if (block_len < 2) throw std::invalid_argument("block length must be at least 2");
  const long t_obs = bundle.values.cols();
  if (t_obs < block_len) throw std::invalid_argument("fewer observations than one block");
  FilteredULR filtered;
  filtered.names = bundle.names;
  filtered.block_len = block_len;
  const long n_blocks = t_obs / block_len;
  filtered.dropped = t_obs - n_blocks * block_len;
  filtered.averages = Mat(bundle.values.rows(), n_blocks);
  for (long b = 0; b < n_blocks; ++b) {
    filtered.averages.col(b) =
        bundle.values.middleCols(b * block_len, block_len).rowwise().mean();
    filtered.centers.push_back(bundle.dates[static_cast<size_t>(b * block_len + block_len / 2)]);
  }
  return filtered;
}

double block_to_obs_persistence(double rho_block, long block_len) {
  if (block_len < 1) throw std::invalid_argument("block length must be positive");
  const double mag = std::abs(rho_block);
  if (!(mag < 1.0)) throw std::invalid_argument("block persistence must lie inside the unit circle");
  if (mag == 0.0) return 0.0;
  return std::pow(mag, 1.0 / static_cast<double>(block_len));
}

std::vector<UlrFitRow> fit_ulr_ar1(const FilteredULR& filtered) {
  std::vector<UlrFitRow> rows;
  const long n = filtered.averages.rows();
  for (long i = 0; i < n; ++i) {
    UlrFitRow row;
    row.name = filtered.names[static_cast<size_t>(i)];
    const Vec series = filtered.averages.row(i).transpose();
    row.mean = series.mean();
    const Vec centered = series.array() - row.mean;
    try {
      const Ar1Fit fit = ar1_mle(centered);
      row.rho_block = fit.rho_hat;
      row.rho_obs = block_to_obs_persistence(fit.rho_hat, filtered.block_len);
      row.sigma2 = fit.sigma2_hat;
      row.negative = fit.rho_hat < 0.0;
      row.weak = fit.weak;
    } catch (const std::domain_error&) {
      row.degenerate = true;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<HorizonRow> horizon_intervals(const SeriesBundle& bundle, const FilteredULR& filtered,
                                          long horizon_obs, double alpha, long p,
                                          const ConfidenceBelt* belt, long belt_reps,
                                          unsigned long belt_seed) {
  if (bundle.names != filtered.names) {
    throw std::invalid_argument("filtered series do not match the bundle");
  }
  if (!(alpha > 0.0) || !(alpha < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  if (horizon_obs < 1) throw std::invalid_argument("horizon must be positive");
  if (p < 1 || p > 4) throw std::invalid_argument("autoregressive order must lie in 1..4");
  const long n_blocks = filtered.averages.cols();
  if (n_blocks < 3) throw std::invalid_argument("need at least three blocks");
  const long h_blocks =
      std::lround(static_cast<double>(horizon_obs) / static_cast<double>(filtered.block_len));
  if (h_blocks < 1) throw std::invalid_argument("horizon is shorter than half a block");

  ConfidenceBelt local_belt;
  if (belt != nullptr) {
    if (belt->K != n_blocks) {
      throw std::invalid_argument("belt step count must match the number of blocks");
    }
  } else {
    std::vector<double> grid;
    for (int i = 1; i <= 49; ++i) grid.push_back(0.02 * i);
    const std::vector<double> levels = {0.01, 0.025, 0.05, 0.1, 0.5, 0.9, 0.95, 0.975, 0.99};
    local_belt = build_belt(n_blocks, grid, levels, belt_reps, belt_seed);
    belt = &local_belt;
  }

  const std::vector<UlrFitRow> fits = fit_ulr_ar1(filtered);
  const double z = normal_quantile(1.0 - alpha / 2.0);
  const double gamma = static_cast<double>(h_blocks) / static_cast<double>(n_blocks);

  std::vector<HorizonRow> rows;
  for (long i = 0; i < bundle.values.rows(); ++i) {
    HorizonRow row;
    row.name = bundle.names[static_cast<size_t>(i)];
    row.horizon_obs = horizon_obs;
    row.horizon_blocks = h_blocks;

    const ArForecast ar = ar_forecast(bundle.values.row(i).transpose(), p, horizon_obs);
    row.ar_center = ar.center;
    row.ar_lower = ar.center - z * ar.sd;
    row.ar_upper = ar.center + z * ar.sd;

    const UlrFitRow& fit = fits[static_cast<size_t>(i)];
    row.negative = fit.negative;
    const double rho = std::abs(fit.rho_block);
    if (fit.degenerate || ar.degenerate || rho == 0.0 || !(fit.sigma2 > 0.0)) {
      row.degenerate = true;
      const double level_now = filtered.averages(i, n_blocks - 1);
      row.plug_center = fit.degenerate ? level_now : fit.mean + std::pow(rho, h_blocks) *
                                                                    (level_now - fit.mean);
      row.plug_lower = row.plug_center;
      row.plug_upper = row.plug_center;
      row.robust_center = row.plug_center;
      row.robust_lower = row.plug_center;
      row.robust_upper = row.plug_center;
      rows.push_back(row);
      continue;
    }

    const double sigma_c = std::sqrt(fit.sigma2 / (1.0 - rho * rho));
    const double y_last = filtered.averages(i, n_blocks - 1) - fit.mean;
    const double pull = std::pow(rho, static_cast<double>(h_blocks));
    row.plug_center = fit.mean + pull * y_last;
    const double half = z * sigma_c * std::sqrt(1.0 - pull * pull);
    row.plug_lower = row.plug_center - half;
    row.plug_upper = row.plug_center + half;

    const double theta_hat = -static_cast<double>(n_blocks) * std::log(rho);
    const double s_hat = sigma_c * std::sqrt(2.0 * theta_hat);
    const PredictionInterval pi =
        minmax_interval(alpha, *belt, rho, 0.0, s_hat, y_last, gamma, /*two_sided=*/true);
    row.alpha1_star = pi.alpha1_star;
    row.robust_center = row.plug_center;
    // The adjusted interval keeps the plug-in one inside it even when the
    // drift confidence set was clipped at the tabulated boundary.
    row.robust_lower = std::min(fit.mean + pi.lower, row.plug_lower);
    row.robust_upper = std::max(fit.mean + pi.upper, row.plug_upper);
    row.clipped = invert_belt(*belt, rho, pi.alpha1_star).clipped;
    rows.push_back(row);
  }
  return rows;
}

ApplyResult run_apply(const std::string& input_csv, long block_len, long horizon_obs,
                      double alpha, const std::string& out_dir, long p) {
  const SeriesBundle bundle = ingest_csv(input_csv);
  const FilteredULR filtered = block_filter(bundle, block_len);
  ApplyResult result;
  result.out_dir = out_dir;
  result.table1 = fit_ulr_ar1(filtered);
  result.table2 = horizon_intervals(bundle, filtered, horizon_obs, alpha, p);

  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);

  {
    std::ofstream out = open_out(dir / "filtered.csv");
    out << "date";
    for (const auto& name : filtered.names) out << ',' << name;
    out << '\n';
    for (long b = 0; b < filtered.averages.cols(); ++b) {
      out << filtered.centers[static_cast<size_t>(b)];
      for (long i = 0; i < filtered.averages.rows(); ++i) {
        out << ',' << fmt17(filtered.averages(i, b));
      }
      out << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "table1.csv");
    out << "series,rho_block,rho_obs,sigma2,mean,negative,weak,degenerate\n";
    for (const auto& row : result.table1) {
      out << row.name << ',' << fmt17(row.rho_block) << ',' << fmt17(row.rho_obs) << ','
          << fmt17(row.sigma2) << ',' << fmt17(row.mean) << ',' << flag01(row.negative) << ','
          << flag01(row.weak) << ',' << flag01(row.degenerate) << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "table2.csv");
    out << "series,horizon_obs,horizon_blocks,ar_center,ar_lower,ar_upper,plug_center,plug_lower,"
           "plug_upper,robust_center,robust_lower,robust_upper,alpha1_star,negative,degenerate,"
           "clipped\n";
    for (const auto& row : result.table2) {
      out << row.name << ',' << row.horizon_obs << ',' << row.horizon_blocks << ','
          << fmt17(row.ar_center) << ',' << fmt17(row.ar_lower) << ',' << fmt17(row.ar_upper)
          << ',' << fmt17(row.plug_center) << ',' << fmt17(row.plug_lower) << ','
          << fmt17(row.plug_upper) << ',' << fmt17(row.robust_center) << ','
          << fmt17(row.robust_lower) << ',' << fmt17(row.robust_upper) << ','
          << fmt17(row.alpha1_star) << ',' << flag01(row.negative) << ','
          << flag01(row.degenerate) << ',' << flag01(row.clipped) << '\n';
    }
  }
  {
    std::ofstream out = open_out(dir / "run.log");
    out << "input: " << input_csv << '\n';
    out << "series: " << bundle.names.size() << '\n';
    out << "observations: " << bundle.values.cols() << '\n';
    out << "block length: " << block_len << '\n';
    out << "blocks: " << filtered.averages.cols() << '\n';
    out << "dropped trailing observations: " << filtered.dropped << '\n';
    out << "horizon: " << horizon_obs << " observations = " << result.table2.front().horizon_blocks
        << " blocks\n";
    out << "two-sided level: " << fmt17(alpha) << '\n';
    out << "autoregressive order: " << p << '\n';
    for (const auto& row : result.table1) {
      out << row.name << ": rho_block=" << fmt17(row.rho_block)
          << " rho_obs=" << fmt17(row.rho_obs);
      if (row.negative) out << " [negative]";
      if (row.weak) out << " [weak]";
      if (row.degenerate) out << " [degenerate]";
      out << '\n';
    }
  }
  result.files = {"table1.csv", "table2.csv", "filtered.csv", "run.log"};
  return result;
}

}  // namespace ulr
