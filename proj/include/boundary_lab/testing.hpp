#ifndef BOUNDARY_LAB_TESTING_HPP_
#define BOUNDARY_LAB_TESTING_HPP_

// Plug-in test of H0: g = g0 against ||g - g0||_p >= r_n, rejecting when
// Fhat_p >= r_n^p / 2 on the g0-shifted sample.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "boundary_lab/bounds.hpp"
#include "boundary_lab/functionals.hpp"
#include "boundary_lab/model.hpp"
#include "boundary_lab/parallel.hpp"
#include "boundary_lab/simulate.hpp"

namespace boundary_lab {

struct TestConfig {
  double p = 1.0;
  double r_n = 1.0;
  HolderClass holder;
  long n = 1;
  BoundaryFunction g0;

  TestConfig(double p_, double r_n_, HolderClass holder_, long n_)
      : TestConfig(p_, r_n_, holder_, n_, BoundaryFunction::constant(0.0, holder_)) {}

  TestConfig(double p_, double r_n_, HolderClass holder_, long n_, BoundaryFunction g0_)
      : p(p_), r_n(r_n_), holder(holder_), n(n_), g0(std::move(g0_)) {
    if (!(p >= 1.0)) throw std::invalid_argument("test: p must be >= 1");
    if (!(r_n > 0.0) || !std::isfinite(r_n)) throw std::invalid_argument("test: r_n must be > 0");
    if (n < 1) throw std::invalid_argument("test: n must be >= 1");
  }

  double threshold() const { return 0.5 * std::pow(r_n, p); }
};

struct TestOutcome {
  int decision = 0;
  double statistic = 0.0;
  bool cap_valid = true;
};

inline int test_decision(double statistic, double threshold) {
  return statistic >= threshold ? 1 : 0;
}

namespace detail {

inline bool is_zero_curve(const BoundaryFunction& g) { return g.is_constant() && g(0.0) == 0.0; }

// Observations (X, Y - g0(X)) with the constant cap y_cap - max g0, below
// which the shifted window is complete.
inline PppSample shift_by_null(const PppSample& sample, const BoundaryFunction& g0,
                               double radius, std::size_t grid_size) {
  if (is_zero_curve(g0)) return sample;
  PppSample out = sample;
  for (Point& pt : out.points) pt.y -= g0(pt.x);
  out.y_cap = sample.y_cap - boundary_max(g0, grid_size);
  out.cap_valid = sample.cap_valid && cap_is_valid(out.points, radius, out.y_cap);
  return out;
}

}  // namespace detail

inline TestOutcome run_test(const PppSample& sample, const TestConfig& config,
                            std::size_t grid_size = kDefaultGridSize) {
  const PppSample shifted =
      detail::shift_by_null(sample, config.g0, config.holder.radius, grid_size);
  const EstimateResult est = estimate_functional(shifted, config.holder,
                                                 FunctionalSpec::power_preset(config.p), grid_size);
  TestOutcome out;
  out.statistic = est.value;
  out.decision = test_decision(est.value, config.threshold());
  out.cap_valid = est.cap_valid;
  return out;
}

// ---------------------------------------------------------------------------
// Error experiment
// ---------------------------------------------------------------------------

struct TestRecord {
  std::size_t hypothesis;  // 0 = null, a + 1 = alternative a
  long rep;
  double statistic;
  int decision;
  bool valid;
};

struct ErrorExperimentResult {
  double type1 = 0.0;
  double type1_stderr = 0.0;
  double worst_type2 = 0.0;
  double worst_type2_stderr = 0.0;
  std::size_t worst_alternative = 0;
  std::vector<double> type2;  // per alternative
  long discarded = 0;
  std::vector<TestRecord> records;
};

// Alternative boundaries are full curves; they are checked for membership of
// g - g0 in C^beta(R) on a grid and for ||g - g0||_p >= r_n (relative slack
// 1e-9). The norm uses the uniform grid plus both curves' breakpoints, which
// is exact for p = 1 on piecewise-linear differences of constant sign.
inline void validate_alternative(const TestConfig& config, const BoundaryFunction& alt,
                                 std::size_t index, std::size_t grid_size = kDefaultGridSize,
                                 std::size_t holder_grid = 513) {
  if (!(alt.holder() == config.holder)) {
    std::ostringstream msg;
    msg << "alternative " << index << " (" << alt.describe() << ") claims a different class";
    throw std::invalid_argument(msg.str());
  }
  const auto diff = [&](double x) { return alt(x) - config.g0(x); };
  if (!holder_check(diff, config.holder, holder_grid)) {
    std::ostringstream msg;
    msg << "alternative " << index << " (" << alt.describe() << ") minus g0 is not in C^"
        << config.holder.beta << "(" << config.holder.radius << ") on the check grid";
    throw std::invalid_argument(msg.str());
  }
  std::vector<double> nodes = resolving_nodes(alt, grid_size);
  const std::vector<double> null_nodes = resolving_nodes(config.g0, grid_size);
  std::vector<double> merged;
  std::merge(nodes.begin(), nodes.end(), null_nodes.begin(), null_nodes.end(),
             std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  std::vector<double> powered(merged.size());
  for (std::size_t i = 0; i < merged.size(); ++i) {
    powered[i] = std::pow(std::abs(diff(merged[i])), config.p);
  }
  const double norm = std::pow(trapezoid(merged, powered), 1.0 / config.p);
  if (norm < config.r_n * (1.0 - 1e-9)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "alternative " << index << " (" << alt.describe() << ") has ||g - g0||_p = " << norm
        << " < r_n = " << config.r_n;
    throw std::invalid_argument(msg.str());
  }
}

// Rejection rate under g0 and acceptance rates under each alternative, with
// binomial standard errors over valid replications. Null replication r uses
// stream derive_stream(seed, {0, r}); alternative a uses {a + 1, r}.
inline ErrorExperimentResult error_experiment(const TestConfig& config,
                                              const std::vector<BoundaryFunction>& alternatives,
                                              long reps, std::uint64_t seed, unsigned threads = 0,
                                              std::size_t grid_size = kDefaultGridSize,
                                              bool keep_records = false) {
  if (reps < 1) throw std::invalid_argument("error_experiment: reps must be >= 1");
  for (std::size_t a = 0; a < alternatives.size(); ++a) {
    validate_alternative(config, alternatives[a], a, grid_size);
  }
  std::vector<PppSampler> samplers;
  samplers.reserve(alternatives.size() + 1);
  const auto add_sampler = [&](const BoundaryFunction& g) {
    const ModelConfig model(config.n, g, config.holder);
    samplers.emplace_back(model, default_cap(model, 0.0, grid_size), grid_size);
  };
  add_sampler(config.g0);
  for (const auto& alt : alternatives) add_sampler(alt);

  const std::size_t hyps = samplers.size();
  const std::size_t per = static_cast<std::size_t>(reps);
  std::vector<TestRecord> records(hyps * per);
  parallel_for(hyps * per, threads, [&](std::size_t i) {
    const std::size_t hyp = i / per;
    const std::size_t r = i % per;
    const PppSample sample = samplers[hyp].sample(derive_stream(seed, {hyp, r}));
    TestRecord rec{hyp, static_cast<long>(r), std::numeric_limits<double>::quiet_NaN(), 0, false};
    if (!sample.empty() && sample.cap_valid) {
      const TestOutcome outcome = run_test(sample, config, grid_size);
      if (outcome.cap_valid) {
        rec.statistic = outcome.statistic;
        rec.decision = outcome.decision;
        rec.valid = true;
      }
    }
    records[i] = rec;
  });

  ErrorExperimentResult out;
  const auto rate = [](long hits, long total) {
    return total > 0 ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
  };
  const auto binomial_se = [](double q, long total) {
    return total > 0 ? std::sqrt(q * (1.0 - q) / static_cast<double>(total)) : 0.0;
  };
  for (std::size_t hyp = 0; hyp < hyps; ++hyp) {
    long valid = 0;
    long hits = 0;  // rejections under the null, acceptances otherwise
    for (std::size_t r = 0; r < per; ++r) {
      const TestRecord& rec = records[hyp * per + r];
      if (!rec.valid) {
        ++out.discarded;
        continue;
      }
      ++valid;
      if (hyp == 0 ? rec.decision == 1 : rec.decision == 0) ++hits;
    }
    const double q = rate(hits, valid);
    if (hyp == 0) {
      out.type1 = q;
      out.type1_stderr = binomial_se(q, valid);
    } else {
      out.type2.push_back(q);
      if (hyp == 1 || q > out.worst_type2) {
        out.worst_type2 = q;
        out.worst_type2_stderr = binomial_se(q, valid);
        out.worst_alternative = hyp - 1;
      }
    }
  }
  if (keep_records) out.records = std::move(records);
  return out;
}

// ---------------------------------------------------------------------------
// Alternatives at separation r_n
// ---------------------------------------------------------------------------

// Least-favourable shapes at ||g - g0||_p = r_n: all-ones bump sums with
// m = 1, 2, 4, ... cells (c = r_n / (R h^beta ||K||_p)), single bumps in the
// first cell (c = r_n / (R h^{beta + 1/p} ||K||_p)), each kept while
// c <= 1/4, and the constant g0 + r_n.
inline std::vector<BoundaryFunction> bump_alternatives(const TestConfig& config,
                                                       std::size_t max_cells = 1024) {
  const double r = config.holder.radius;
  const double beta = config.holder.beta;
  const double k_norm = triangular_kernel_norm(config.p);
  std::vector<BoundaryFunction> out;
  for (std::size_t m = 1; m <= max_cells; m *= 2) {
    const double h = 1.0 / static_cast<double>(m);
    const double c = config.r_n / (r * std::pow(h, beta) * k_norm);
    if (c > 0.25) break;
    out.push_back(
        BoundaryFunction::bump_sum(std::vector<std::uint8_t>(m, 1), c, config.holder, config.g0));
  }
  for (std::size_t m = 1; m <= max_cells; m *= 2) {
    const double h = 1.0 / static_cast<double>(m);
    const double c = config.r_n / (r * std::pow(h, beta + 1.0 / config.p) * k_norm);
    if (c > 0.25) break;
    if (m == 1) continue;  // identical to the all-ones sum with one cell
    std::vector<std::uint8_t> theta(m, 0);
    theta[0] = 1;
    out.push_back(BoundaryFunction::bump_sum(std::move(theta), c, config.holder, config.g0));
  }
  out.push_back(BoundaryFunction::shifted(config.g0, config.r_n));
  return out;
}

// Chebyshev bound on the type-I error: P0(Fhat_p >= r_n^p / 2) <=
// E0[Fhat_p^2] / (r_n^p / 2)^2, with E0[Fhat_p^2] bounded by the explicit
// risk bound at g = 0.
inline double type1_chebyshev_bound(const TestConfig& config) {
  const double g_term =
      norm_power_2p_minus_2(BoundaryFunction::constant(0.0, config.holder), config.p);
  const double mse = risk_upper_bound_power(config.p, config.holder.beta, config.holder.radius,
                                            static_cast<double>(config.n), g_term);
  const double t = config.threshold();
  return std::min(1.0, mse / (t * t));
}

}  // namespace boundary_lab

#endif  // BOUNDARY_LAB_TESTING_HPP_
