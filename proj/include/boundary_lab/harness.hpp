#ifndef BOUNDARY_LAB_HARNESS_HPP_
#define BOUNDARY_LAB_HARNESS_HPP_

// Replication engine: Monte Carlo risk of the functional estimators over a
// grid of intensities, log-log rate fits, and the risk CSV format.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "boundary_lab/bounds.hpp"
#include "boundary_lab/envelope.hpp"
#include "boundary_lab/functionals.hpp"
#include "boundary_lab/model.hpp"
#include "boundary_lab/parallel.hpp"
#include "boundary_lab/simulate.hpp"

namespace boundary_lab {

enum class EstimatorKind { f_phi, f_p, t_hat };

inline std::string to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::f_phi: return "fphi";
    case EstimatorKind::f_p: return "fp";
    case EstimatorKind::t_hat: return "that";
  }
  return "?";
}

inline EstimatorKind parse_estimator(const std::string& text) {
  if (text == "fphi") return EstimatorKind::f_phi;
  if (text == "fp") return EstimatorKind::f_p;
  if (text == "that") return EstimatorKind::t_hat;
  throw std::invalid_argument("unknown estimator '" + text + "' (fphi|fp|that)");
}

inline constexpr double kMaxDiscardFraction = 0.01;
inline constexpr double kExceedanceTail = 1e-9;

struct RiskGridConfig {
  BoundaryFunction boundary;
  HolderClass holder;
  EstimatorKind estimator = EstimatorKind::f_p;
  FunctionalSpec spec;  // phi for fphi; the power preset for fp / that
  std::vector<long> ns;
  long reps = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::size_t grid_size = kDefaultGridSize;
  double cap_margin = 0.0;
  bool with_var_rhs = true;
  std::size_t exceedance_x_nodes = 65;
  std::size_t exceedance_u_nodes = 257;
};

struct RiskRow {
  long n = 0;
  long reps = 0;  // valid replications
  double mean_estimate = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  double mean_abs_error = 0.0;
  double var_empirical = 0.0;
  double var_rhs = std::numeric_limits<double>::quiet_NaN();
  long discarded = 0;
};

struct RiskTable {
  std::vector<RiskRow> rows;
  double target = 0.0;
  bool valid = true;
};

// Smallest u with deviation_bound(u) <= tail, found by bisection.
inline double exceedance_u_max(const HolderClass& holder, double n, double tail = kExceedanceTail) {
  double lo = 0.0;
  double hi = 2.0 * holder.radius;
  while (deviation_bound({holder, n, hi}) > tail) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (deviation_bound({holder, n, mid}) > tail ? lo : hi) = mid;
  }
  return hi;
}

inline double risk_target(const RiskGridConfig& config) {
  const double f = functional_value(config.spec, config.boundary, config.grid_size);
  if (config.estimator == EstimatorKind::t_hat) return std::pow(std::max(f, 0.0), 1.0 / *config.spec.power);
  return f;
}

// For each n: `reps` replications on streams derive_stream(seed, {n, r}),
// reduced in replication order. var_rhs is the variance identity evaluated on
// an exceedance table built from the same replications (not for that).
inline RiskTable run_risk_grid(const RiskGridConfig& config) {
  if (config.reps < 100) throw std::invalid_argument("run_risk_grid: reps must be >= 100");
  if (config.ns.empty()) throw std::invalid_argument("run_risk_grid: empty n grid");
  for (std::size_t i = 0; i < config.ns.size(); ++i) {
    if (config.ns[i] < 1 || (i > 0 && config.ns[i] <= config.ns[i - 1])) {
      throw std::invalid_argument("run_risk_grid: ns must be positive and strictly increasing");
    }
  }
  if (config.estimator != EstimatorKind::f_phi && !config.spec.power) {
    throw std::invalid_argument("run_risk_grid: fp and that need the power functional");
  }
  RiskTable table;
  table.target = risk_target(config);
  const bool var_rhs = config.with_var_rhs && config.estimator != EstimatorKind::t_hat;
  const std::size_t reps = static_cast<std::size_t>(config.reps);

  for (long n : config.ns) {
    const ModelConfig model(n, config.boundary, config.holder);
    const PppSampler sampler(model, default_cap(model, config.cap_margin, config.grid_size),
                             config.grid_size);
    std::optional<ExceedanceAccumulator> acc;
    if (var_rhs) {
      acc.emplace(uniform_grid(config.exceedance_x_nodes),
                  uniform_grid(config.exceedance_u_nodes, 0.0,
                               exceedance_u_max(config.holder, static_cast<double>(n))));
    }
    std::vector<double> estimate(reps);
    std::vector<std::uint8_t> valid(reps, 0);
    std::vector<std::vector<std::uint32_t>> levels(var_rhs ? reps : 0);
    parallel_for(reps, config.threads, [&](std::size_t r) {
      const PppSample sample =
          sampler.sample(derive_stream(config.seed, {static_cast<std::uint64_t>(n), r}));
      if (sample.empty() || !sample.cap_valid) return;
      const Envelope env(sample, config.holder);
      const EstimateResult est = estimate_functional(env, sample, config.spec, config.grid_size);
      estimate[r] = config.estimator == EstimatorKind::t_hat
                        ? positive_part_root(est.value, *config.spec.power)
                        : est.value;
      if (var_rhs) levels[r] = acc->summarize(env, config.boundary);
      valid[r] = 1;
    });

    RiskRow row;
    row.n = n;
    double sum = 0.0, sum_sq_err = 0.0, sum_abs_err = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      if (!valid[r]) {
        ++row.discarded;
        if (acc) acc->add_discarded();
        continue;
      }
      ++row.reps;
      sum += estimate[r];
      const double err = estimate[r] - table.target;
      sum_sq_err += err * err;
      sum_abs_err += std::abs(err);
      if (acc) acc->add(levels[r]);
    }
    if (row.reps < 2) throw std::runtime_error("run_risk_grid: fewer than 2 valid replications");
    const double k = static_cast<double>(row.reps);
    row.mean_estimate = sum / k;
    row.bias = row.mean_estimate - table.target;
    row.mse = sum_sq_err / k;
    row.rmse = std::sqrt(row.mse);
    row.mean_abs_error = sum_abs_err / k;
    double centred = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
      if (!valid[r]) continue;
      const double d = estimate[r] - row.mean_estimate;
      centred += d * d;
    }
    row.var_empirical = centred / (k - 1.0);
    if (acc) row.var_rhs = variance_rhs(model, config.spec, acc->table());
    if (static_cast<double>(row.discarded) > kMaxDiscardFraction * static_cast<double>(config.reps)) {
      table.valid = false;
    }
    table.rows.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------
// Rate fits
// ---------------------------------------------------------------------------

enum class RiskColumn { rmse, mean_abs_error };

inline RiskColumn parse_risk_column(const std::string& text) {
  if (text == "rmse") return RiskColumn::rmse;
  if (text == "mean_abs_error") return RiskColumn::mean_abs_error;
  throw std::invalid_argument("unknown risk column '" + text + "' (rmse|mean_abs_error)");
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double target_exponent = 0.0;
  bool within_tolerance = false;
};

// OLS of log(risk) on log(n); within_tolerance iff |slope + target| <= tol.
inline RateFit fit_rate_slope(const RiskTable& table, RiskColumn column, double target,
                              double tol) {
  const std::size_t k = table.rows.size();
  if (k < 4) throw std::invalid_argument("fit_rate_slope: need at least 4 rows");
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    const RiskRow& row = table.rows[i];
    const double risk = column == RiskColumn::rmse ? row.rmse : row.mean_abs_error;
    if (!(risk > 0.0) || row.n < 1) {
      throw std::invalid_argument("fit_rate_slope: risk values must be positive");
    }
    lx[i] = std::log(static_cast<double>(row.n));
    ly[i] = std::log(risk);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_rate_slope: n values must differ");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = ly[i] - fit.intercept - fit.slope * lx[i];
    ssr += e * e;
  }
  fit.slope_stderr = std::sqrt(ssr / static_cast<double>(k - 2) / sxx);
  fit.target_exponent = target;
  fit.within_tolerance = std::abs(fit.slope + target) <= tol;
  return fit;
}

// ---------------------------------------------------------------------------
// Risk CSV
// ---------------------------------------------------------------------------

inline constexpr const char* kRiskCsvHeader =
    "n,reps,mean_estimate,bias,mse,rmse,mean_abs_error,var_empirical,var_rhs,discarded";

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_risk_csv(std::ostream& out, const RiskTable& table) {
  out << kRiskCsvHeader << '\n';
  for (const RiskRow& r : table.rows) {
    out << r.n << ',' << r.reps << ',' << format_double(r.mean_estimate) << ','
        << format_double(r.bias) << ',' << format_double(r.mse) << ',' << format_double(r.rmse)
        << ',' << format_double(r.mean_abs_error) << ',' << format_double(r.var_empirical) << ','
        << format_double(r.var_rhs) << ',' << r.discarded << '\n';
  }
}

inline void write_risk_csv(const std::string& path, const RiskTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_risk_csv(out, table);
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline RiskTable read_risk_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("risk csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRiskCsvHeader) throw std::runtime_error("risk csv: unexpected header '" + line + "'");
  RiskTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 10) {
      throw std::runtime_error("risk csv: line " + std::to_string(line_no) + " needs 10 fields");
    }
    try {
      RiskRow r;
      r.n = std::stol(cells[0]);
      r.reps = std::stol(cells[1]);
      r.mean_estimate = std::stod(cells[2]);
      r.bias = std::stod(cells[3]);
      r.mse = std::stod(cells[4]);
      r.rmse = std::stod(cells[5]);
      r.mean_abs_error = std::stod(cells[6]);
      r.var_empirical = std::stod(cells[7]);
      r.var_rhs = std::strtod(cells[8].c_str(), nullptr);
      r.discarded = std::stol(cells[9]);
      table.rows.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error("risk csv: malformed number on line " + std::to_string(line_no));
    }
  }
  return table;
}

inline RiskTable read_risk_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_risk_csv(in);
}

}  // namespace boundary_lab

#endif  // BOUNDARY_LAB_HARNESS_HPP_
