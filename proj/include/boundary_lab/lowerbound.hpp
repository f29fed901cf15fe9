#ifndef BOUNDARY_LAB_LOWERBOUND_HPP_
#define BOUNDARY_LAB_LOWERBOUND_HPP_

// Bernoulli bump prior g_theta = f + sum_k theta_k g_k with
// g_k(x) = c R h^beta K((x - (k-1)h) / h), its exact likelihood ratio against
// the base f and the chi-square certificate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "boundary_lab/model.hpp"
#include "boundary_lab/parallel.hpp"
#include "boundary_lab/rng.hpp"
#include "boundary_lab/simulate.hpp"

namespace boundary_lab {

inline constexpr double kWeightNormSlack = 1e-12;

struct PriorConfig {
  std::size_t m = 1;
  double c = 0.25;
  HolderClass holder;
  std::vector<double> weights;
  BoundaryFunction base;

  PriorConfig(std::size_t m_, double c_, HolderClass holder_, std::vector<double> weights_,
              std::optional<BoundaryFunction> base_ = std::nullopt)
      : m(m_),
        c(c_),
        holder(holder_),
        weights(std::move(weights_)),
        base(base_ ? *base_ : BoundaryFunction::constant(0.0, holder_)) {
    if (m < 1) throw std::invalid_argument("prior: m must be >= 1");
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("prior: c must be > 0");
    if (weights.size() != m) throw std::invalid_argument("prior: need one weight per cell");
    for (double w : weights) {
      if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("prior: weights must lie in [0,1]");
    }
  }

  double h() const noexcept { return 1.0 / static_cast<double>(m); }
  // c <= 1/4 puts every g_theta - f in C^beta(R).
  bool certified() const noexcept { return c <= 0.25; }
  double bump_amplitude() const { return c * holder.radius * std::pow(h(), holder.beta); }
  // max_x g_k(x) = 2 c R h^beta.
  double bump_peak() const { return 2.0 * bump_amplitude(); }
  // ∫ g_k = c R h^{beta+1} since ∫K = 1.
  double bump_integral() const { return c * holder.radius * std::pow(h(), holder.beta + 1.0); }
  double weight_square_sum() const {
    return std::inner_product(weights.begin(), weights.end(), weights.begin(), 0.0);
  }
  bool normalized() const { return weight_square_sum() <= 1.0 + kWeightNormSlack; }
};

// p_k = 1/sqrt(m).
inline std::vector<double> uniform_weights(std::size_t m) {
  if (m < 1) throw std::invalid_argument("uniform_weights: m must be >= 1");
  return std::vector<double>(m, 1.0 / std::sqrt(static_cast<double>(m)));
}

// a_k = ∫ phi'(f(x)) K((x - (k-1)h)/h) dx by trapezoid on `nodes_per_cell`
// points per cell.
inline std::vector<double> matched_scores(std::size_t m, const BoundaryFunction& base,
                                          const FunctionalSpec& spec,
                                          std::size_t nodes_per_cell = 257) {
  if (m < 1) throw std::invalid_argument("matched weights: m must be >= 1");
  require_grid(nodes_per_cell);
  const double h = 1.0 / static_cast<double>(m);
  std::vector<double> a(m);
  std::vector<double> values(nodes_per_cell);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < nodes_per_cell; ++i) {
      const double u = grid_node(i, nodes_per_cell);
      const double x = (static_cast<double>(k) + u) * h;
      values[i] = spec.phi_prime(base(x)) * triangular_kernel(u);
    }
    a[k] = trapezoid_uniform(values, h);
  }
  return a;
}

// p_k = a_k / ||a||_2 when all scores are nonnegative; otherwise the positive
// parts a_{k+} / ||a_+||_2, falling back to a_{k-} / ||a_-||_2 when no score
// is positive.
inline std::vector<double> matched_weights(std::size_t m, const BoundaryFunction& base,
                                           const FunctionalSpec& spec,
                                           std::size_t nodes_per_cell = 257) {
  const std::vector<double> a = matched_scores(m, base, spec, nodes_per_cell);
  const auto normalize = [](std::vector<double> v) -> std::optional<std::vector<double>> {
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (!(norm > 0.0)) return std::nullopt;
    for (double& x : v) x = std::min(1.0, x / norm);
    return v;
  };
  std::vector<double> pos(m);
  std::vector<double> neg(m);
  for (std::size_t k = 0; k < m; ++k) {
    pos[k] = std::max(a[k], 0.0);
    neg[k] = std::max(-a[k], 0.0);
  }
  if (auto w = normalize(pos)) return *w;
  if (auto w = normalize(neg)) return *w;
  throw std::invalid_argument("matched weights: all scores vanish (phi' o f is zero)");
}

// m = floor(2 (c R n)^{1/(beta+1)}), the cell count for the estimation prior.
inline std::size_t estimation_cells(double c, const HolderClass& holder, double n) {
  const double m = std::floor(2.0 * std::pow(c * holder.radius * n, 1.0 / (holder.beta + 1.0)));
  if (m < 1.0) throw std::invalid_argument("estimation_cells: c R n too small for one cell");
  return static_cast<std::size_t>(m);
}

// ---------------------------------------------------------------------------
// Prior draws and likelihood ratio
// ---------------------------------------------------------------------------

struct PriorDraw {
  std::vector<std::uint8_t> theta;
  BoundaryFunction g_theta;
};

inline PriorDraw draw_prior(const PriorConfig& config, std::uint64_t seed) {
  CounterRng rng(derive_stream(seed, {0x9e1d}));
  std::vector<std::uint8_t> theta(config.m);
  for (std::size_t k = 0; k < config.m; ++k) theta[k] = rng.uniform() < config.weights[k] ? 1 : 0;
  BoundaryFunction g = BoundaryFunction::bump_sum(theta, config.c, config.holder, config.base);
  return {std::move(theta), std::move(g)};
}

inline std::size_t cell_of(double x, std::size_t m) {
  const double scaled = x * static_cast<double>(m);
  if (!(scaled > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(scaled), m - 1);
}

// clear[k] = 1 iff every point with X in cell k satisfies Y >= f(X) + g_k(X).
inline std::vector<std::uint8_t> cell_clear_indicators(const PppSample& sample,
                                                       const PriorConfig& config) {
  const double height = config.bump_amplitude();
  const double m = static_cast<double>(config.m);
  std::vector<std::uint8_t> clear(config.m, 1);
  for (const Point& pt : sample.points) {
    const std::size_t k = cell_of(pt.x, config.m);
    const double bump = height * triangular_kernel(pt.x * m - static_cast<double>(k));
    if (pt.y < config.base(pt.x) + bump) clear[k] = 0;
  }
  return clear;
}

// dP_1/dP_0 = prod_k (1 - p_k + p_k e^{n ∫g_k} clear_k) for a sample drawn
// under the base f. The cap must clear every bump.
inline double likelihood_ratio(const PppSample& sample, const PriorConfig& config,
                               std::size_t grid_size = kDefaultGridSize) {
  if (sample.y_cap < boundary_max(config.base, grid_size) + config.bump_peak()) {
    throw std::invalid_argument("likelihood_ratio: y_cap lies below the bump tops");
  }
  const double lift = std::exp(static_cast<double>(sample.n) * config.bump_integral());
  const std::vector<std::uint8_t> clear = cell_clear_indicators(sample, config);
  double lr = 1.0;
  for (std::size_t k = 0; k < config.m; ++k) {
    const double w = config.weights[k];
    lr *= 1.0 - w + (clear[k] ? w * lift : 0.0);
  }
  return lr;
}

// ---------------------------------------------------------------------------
// Chi-square certificate
// ---------------------------------------------------------------------------

struct Chi2Report {
  double exact_value = 0.0;  // prod_k (1 + p_k^2 (e^{n∫g_k} - 1)) - 1
  double lemma_bound = 0.0;  // exp(e^{n∫g_1} - 1) - 1; NaN if sum p_k^2 > 1
  double mc_estimate = std::numeric_limits<double>::quiet_NaN();
  double mc_stderr = std::numeric_limits<double>::quiet_NaN();
  double mean_lr = std::numeric_limits<double>::quiet_NaN();
  double mean_lr_stderr = std::numeric_limits<double>::quiet_NaN();
  double bump_mass = 0.0;    // n ∫ g_k
  double clear_probability = 0.0;  // e^{-n∫g_k}
  std::vector<double> cell_clear_rate;
  std::vector<double> cell_clear_stderr;
  long mc_reps = 0;
  long discarded = 0;
};

inline double chi2_exact(const PriorConfig& config, double n) {
  const double excess = std::expm1(n * config.bump_integral());
  double log_prod = 0.0;
  for (double w : config.weights) log_prod += std::log1p(w * w * excess);
  return std::expm1(log_prod);
}

inline double chi2_lemma_bound(const PriorConfig& config, double n) {
  if (!config.normalized()) return std::numeric_limits<double>::quiet_NaN();
  return std::expm1(std::expm1(n * config.bump_integral()));
}

// Exact value and lemma bound; with mc_reps > 0 also the Monte Carlo mean of
// LR^2 - 1 and of LR under the base, and per-cell clear rates. Replication r
// uses stream derive_stream(seed, {n, r}).
inline Chi2Report chi2_certificate(const PriorConfig& config, long n, long mc_reps,
                                   std::uint64_t seed, unsigned threads = 0,
                                   std::size_t grid_size = kDefaultGridSize) {
  if (n < 1) throw std::invalid_argument("chi2_certificate: n must be >= 1");
  if (mc_reps < 0) throw std::invalid_argument("chi2_certificate: mc_reps must be >= 0");
  Chi2Report out;
  const double nd = static_cast<double>(n);
  out.bump_mass = nd * config.bump_integral();
  out.clear_probability = std::exp(-out.bump_mass);
  out.exact_value = chi2_exact(config, nd);
  out.lemma_bound = chi2_lemma_bound(config, nd);
  out.mc_reps = mc_reps;
  if (mc_reps == 0) return out;

  const ModelConfig model(n, config.base, config.holder);
  const PppSampler sampler(model, default_cap(model, 0.0, grid_size), grid_size);
  const std::size_t reps = static_cast<std::size_t>(mc_reps);
  std::vector<double> lr(reps);
  std::vector<std::vector<std::uint8_t>> clear(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    const PppSample sample =
        sampler.sample(derive_stream(seed, {static_cast<std::uint64_t>(n), r}));
    lr[r] = likelihood_ratio(sample, config, grid_size);
    clear[r] = cell_clear_indicators(sample, config);
  });

  const double count = static_cast<double>(reps);
  double sum = 0.0, sum_sq = 0.0, sum_4 = 0.0;
  for (double v : lr) {
    sum += v;
    sum_sq += v * v;
    sum_4 += v * v * v * v;
  }
  const double mean = sum / count;
  const double mean_sq = sum_sq / count;
  out.mean_lr = mean;
  out.mc_estimate = mean_sq - 1.0;
  if (reps > 1) {
    out.mean_lr_stderr = std::sqrt(std::max(0.0, (sum_sq - count * mean * mean) / (count - 1.0)) / count);
    out.mc_stderr =
        std::sqrt(std::max(0.0, (sum_4 - count * mean_sq * mean_sq) / (count - 1.0)) / count);
  }
  out.cell_clear_rate.assign(config.m, 0.0);
  for (const auto& row : clear) {
    for (std::size_t k = 0; k < config.m; ++k) out.cell_clear_rate[k] += row[k];
  }
  out.cell_clear_stderr.resize(config.m);
  for (std::size_t k = 0; k < config.m; ++k) {
    out.cell_clear_rate[k] /= count;
    const double q = out.clear_probability;
    out.cell_clear_stderr[k] = std::sqrt(q * (1.0 - q) / count);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Geometry of the testing prior
// ---------------------------------------------------------------------------

struct PriorGeometry {
  std::size_t m;
  double h;
  double m_continuous;  // the unrounded solution
};

// Solves 2^{-1/p} c R ||K||_p m^{-(beta + 1/(2p))} = r_target, the L^p norm of
// g_theta when sum_k theta_k = sqrt(m)/2, and rounds m down so the norm at
// that prior mass is at least r_target.
inline PriorGeometry prior_geometry(double c, const HolderClass& holder, double r_target,
                                    double p) {
  if (!(r_target > 0.0)) throw std::invalid_argument("prior_geometry: r_target must be > 0");
  if (!(p >= 1.0)) throw std::invalid_argument("prior_geometry: p must be >= 1");
  if (!(c > 0.0)) throw std::invalid_argument("prior_geometry: c must be > 0");
  const double scale = c * holder.radius * triangular_kernel_norm(p) * std::pow(2.0, -1.0 / p);
  const double exponent = holder.beta + 1.0 / (2.0 * p);
  const double m_star = std::pow(r_target / scale, -1.0 / exponent);
  const double m = std::floor(m_star + 1e-9);
  if (m < 1.0) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "prior_geometry: r_target " << r_target << " needs m = " << m_star << " < 1 cells";
    throw std::invalid_argument(msg.str());
  }
  if (m > 1e9) throw std::invalid_argument("prior_geometry: r_target too small");
  return {static_cast<std::size_t>(m), 1.0 / m, m_star};
}

inline PriorGeometry prior_geometry(const PriorConfig& config, double r_target, double p) {
  return prior_geometry(config.c, config.holder, r_target, p);
}

// ||g_theta - f||_p for a draw, exact for the triangular kernel.
inline double prior_draw_norm(const PriorConfig& config, const std::vector<std::uint8_t>& theta,
                              double p) {
  const double active = static_cast<double>(std::count(theta.begin(), theta.end(), 1));
  return std::pow(active, 1.0 / p) * config.c * config.holder.radius *
         std::pow(config.h(), config.holder.beta + 1.0 / p) * triangular_kernel_norm(p);
}

// Chebyshev bound on pi(sum_k theta_k <= sqrt(m)/2) for p_k = 1/sqrt(m).
inline double prior_mass_chebyshev_bound(std::size_t m) {
  const double s = 1.0 / std::sqrt(static_cast<double>(m));
  return 4.0 * s * (1.0 - s);
}

}  // namespace boundary_lab

#endif  // BOUNDARY_LAB_LOWERBOUND_HPP_
