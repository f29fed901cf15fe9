#ifndef BOUNDARY_LAB_ENVELOPE_HPP_
#define BOUNDARY_LAB_ENVELOPE_HPP_

// The maximum-likelihood envelope over C^beta(R):
//
//   ghat(x) = min_k ( Y_k + R |x - X_k|^beta ).
//
// A point that is not on the envelope at its own abscissa is dominated at
// every x (subadditivity of d -> d^beta for beta <= 1), so only the points
// with a true indicator are kept for evaluation.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "boundary_lab/model.hpp"
#include "boundary_lab/parallel.hpp"
#include "boundary_lab/rng.hpp"
#include "boundary_lab/simulate.hpp"

namespace boundary_lab {

class NoObservations : public std::runtime_error {
 public:
  NoObservations() : std::runtime_error("no observations: the sample is empty") {}
};

class Envelope {
 public:
  Envelope(const PppSample& sample, HolderClass holder) : holder_(holder) {
    if (sample.empty()) throw NoObservations();
    const std::size_t count = sample.size();
    sample_size_ = count;

    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const Point& pa = sample.points[a];
      const Point& pb = sample.points[b];
      return pa.x < pb.x || (pa.x == pb.x && a < b);
    });
    std::vector<double> xs(count);
    std::vector<double> ys(count);
    for (std::size_t i = 0; i < count; ++i) {
      xs[i] = sample.points[order[i]].x;
      ys[i] = sample.points[order[i]].y;
    }
    std::vector<double> prefix_min(count);
    std::vector<double> suffix_min(count);
    prefix_min[0] = ys[0];
    for (std::size_t i = 1; i < count; ++i) prefix_min[i] = std::min(prefix_min[i - 1], ys[i]);
    suffix_min[count - 1] = ys[count - 1];
    for (std::size_t i = count - 1; i-- > 0;) suffix_min[i] = std::min(suffix_min[i + 1], ys[i]);

    indicators_.assign(count, 0);
    for (std::size_t i = 0; i < count; ++i) {
      if (!dominated(xs, ys, prefix_min, suffix_min, i)) {
        indicators_[order[i]] = 1;
        support_.push_back({xs[i], ys[i]});
      }
    }
    build_support_minima();
  }

  const HolderClass& holder() const noexcept { return holder_; }
  std::size_t sample_size() const noexcept { return sample_size_; }

  // 1(min_{k != j} (Y_k + R|X_j - X_k|^beta) >= Y_j), indexed like the sample.
  const std::vector<std::uint8_t>& indicators() const noexcept { return indicators_; }
  bool on_envelope(std::size_t j) const { return indicators_.at(j) != 0; }
  std::size_t count_on_envelope() const noexcept { return support_.size(); }

  // Envelope points sorted by abscissa.
  std::span<const Point> support() const noexcept { return support_; }

  double operator()(double x) const {
    const auto it = std::lower_bound(support_.begin(), support_.end(), x,
                                     [](const Point& p, double v) { return p.x < v; });
    return evaluate_from(x, static_cast<std::size_t>(it - support_.begin()));
  }

  // Values at the nodes of the uniform grid with grid_size nodes.
  std::vector<double> evaluate_grid(std::size_t grid_size) const {
    require_grid(grid_size);
    std::vector<double> out(grid_size);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < grid_size; ++i) {
      const double x = grid_node(i, grid_size);
      while (pos < support_.size() && support_[pos].x < x) ++pos;
      out[i] = evaluate_from(x, pos);
    }
    return out;
  }

  // Values at sorted abscissae.
  std::vector<double> evaluate_sorted(std::span<const double> xs) const {
    std::vector<double> out(xs.size());
    std::size_t pos = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      while (pos < support_.size() && support_[pos].x < xs[i]) ++pos;
      out[i] = evaluate_from(xs[i], pos);
    }
    return out;
  }

 private:
  bool dominated(const std::vector<double>& xs, const std::vector<double>& ys,
                 const std::vector<double>& prefix_min, const std::vector<double>& suffix_min,
                 std::size_t j) const {
    const double yj = ys[j];
    for (std::size_t k = j + 1; k < xs.size(); ++k) {
      const double reach = holder_.modulus(xs[k] - xs[j]);
      if (suffix_min[k] + reach >= yj) break;
      if (ys[k] + reach < yj) return true;
    }
    for (std::size_t k = j; k-- > 0;) {
      const double reach = holder_.modulus(xs[j] - xs[k]);
      if (prefix_min[k] + reach >= yj) break;
      if (ys[k] + reach < yj) return true;
    }
    return false;
  }

  void build_support_minima() {
    const std::size_t e = support_.size();
    support_prefix_min_.resize(e);
    support_suffix_min_.resize(e);
    support_prefix_min_[0] = support_[0].y;
    for (std::size_t i = 1; i < e; ++i) {
      support_prefix_min_[i] = std::min(support_prefix_min_[i - 1], support_[i].y);
    }
    support_suffix_min_[e - 1] = support_[e - 1].y;
    for (std::size_t i = e - 1; i-- > 0;) {
      support_suffix_min_[i] = std::min(support_suffix_min_[i + 1], support_[i].y);
    }
  }

  // pos: index of the first support point with abscissa >= x.
  double evaluate_from(double x, std::size_t pos) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = pos; k < support_.size(); ++k) {
      const double reach = holder_.modulus(support_[k].x - x);
      if (support_suffix_min_[k] + reach >= best) break;
      best = std::min(best, support_[k].y + reach);
    }
    for (std::size_t k = pos; k-- > 0;) {
      const double reach = holder_.modulus(x - support_[k].x);
      if (support_prefix_min_[k] + reach >= best) break;
      best = std::min(best, support_[k].y + reach);
    }
    return best;
  }

  HolderClass holder_;
  std::size_t sample_size_ = 0;
  std::vector<std::uint8_t> indicators_;
  std::vector<Point> support_;
  std::vector<double> support_prefix_min_;
  std::vector<double> support_suffix_min_;
};

// ghat(x) for x in [0, 1].
inline double envelope_evaluate(const Envelope& env, double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("envelope_evaluate: x outside [0, 1]");
  return env(x);
}

// Direct O(#points) evaluation of min_k (Y_k + R|x - X_k|^beta); reference
// for the pruned evaluator.
inline double envelope_evaluate_direct(std::span<const Point> points, const HolderClass& holder,
                                       double x) {
  if (points.empty()) throw NoObservations();
  double best = std::numeric_limits<double>::infinity();
  for (const Point& p : points) best = std::min(best, p.y + holder.modulus(std::abs(x - p.x)));
  return best;
}

// ---------------------------------------------------------------------------
// Exceedance probabilities P(ghat(x) - g(x) >= u)
// ---------------------------------------------------------------------------

// Monte Carlo estimate of P(ghat(x) - g(x) >= u) on an (x, u) grid, stored
// row-major by x.
struct ExceedanceTable {
  std::vector<double> x_grid;
  std::vector<double> u_grid;
  std::vector<double> p_hat;
  long reps = 0;       // replications contributing
  long discarded = 0;  // empty or cap-invalid samples

  double at(std::size_t ix, std::size_t iu) const { return p_hat[ix * u_grid.size() + iu]; }
  double stderr_at(std::size_t ix, std::size_t iu) const {
    const double p = at(ix, iu);
    return reps > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(reps)) : 0.0;
  }
};

// Accumulates per-replication envelope excesses into exceedance counts.
class ExceedanceAccumulator {
 public:
  ExceedanceAccumulator(std::vector<double> x_grid, std::vector<double> u_grid)
      : x_grid_(std::move(x_grid)), u_grid_(std::move(u_grid)) {
    if (x_grid_.empty() || u_grid_.empty()) {
      throw std::invalid_argument("exceedance: empty x or u grid");
    }
    if (!std::is_sorted(x_grid_.begin(), x_grid_.end()) ||
        !std::is_sorted(u_grid_.begin(), u_grid_.end())) {
      throw std::invalid_argument("exceedance: grids must be sorted");
    }
    // counts_[ix * (nu + 1) + k]: replications with exactly k grid values u <= excess.
    counts_.assign(x_grid_.size() * (u_grid_.size() + 1), 0);
  }

  const std::vector<double>& x_grid() const noexcept { return x_grid_; }
  const std::vector<double>& u_grid() const noexcept { return u_grid_; }

  // Number of u-grid values <= excess for each x (the per-replication summary).
  std::vector<std::uint32_t> summarize(const Envelope& env, const BoundaryFunction& g) const {
    const std::vector<double> ghat = env.evaluate_sorted(x_grid_);
    std::vector<std::uint32_t> levels(x_grid_.size());
    for (std::size_t i = 0; i < x_grid_.size(); ++i) {
      const double excess = ghat[i] - g(x_grid_[i]);
      levels[i] = static_cast<std::uint32_t>(
          std::upper_bound(u_grid_.begin(), u_grid_.end(), excess) - u_grid_.begin());
    }
    return levels;
  }

  void add(std::span<const std::uint32_t> levels) {
    const std::size_t stride = u_grid_.size() + 1;
    for (std::size_t i = 0; i < levels.size(); ++i) ++counts_[i * stride + levels[i]];
    ++reps_;
  }

  void add_discarded() { ++discarded_; }

  ExceedanceTable table() const {
    ExceedanceTable out;
    out.x_grid = x_grid_;
    out.u_grid = u_grid_;
    out.reps = reps_;
    out.discarded = discarded_;
    const std::size_t nu = u_grid_.size();
    const std::size_t stride = nu + 1;
    out.p_hat.assign(x_grid_.size() * nu, 0.0);
    if (reps_ == 0) return out;
    for (std::size_t i = 0; i < x_grid_.size(); ++i) {
      long above = 0;  // replications with level > j, i.e. excess >= u_j
      for (std::size_t j = nu; j-- > 0;) {
        above += counts_[i * stride + j + 1];
        out.p_hat[i * nu + j] = static_cast<double>(above) / static_cast<double>(reps_);
      }
    }
    return out;
  }

 private:
  std::vector<double> x_grid_;
  std::vector<double> u_grid_;
  std::vector<long> counts_;
  long reps_ = 0;
  long discarded_ = 0;
};

// Simulates `reps` replications and tabulates P(ghat(x) - g(x) >= u). The
// replication r uses the stream derive_stream(seed, {n, r}).
inline ExceedanceTable exceedance_table(const ModelConfig& config, std::vector<double> x_grid,
                                        std::vector<double> u_grid, long reps,
                                        std::uint64_t seed, unsigned threads = 0,
                                        double cap_margin = 0.0) {
  if (reps < 1) throw std::invalid_argument("exceedance: reps must be >= 1");
  for (double u : u_grid) {
    if (!(u >= 0.0)) throw std::invalid_argument("exceedance: u values must be >= 0");
  }
  ExceedanceAccumulator acc(std::move(x_grid), std::move(u_grid));
  const PppSampler sampler(config, default_cap(config, cap_margin));
  std::vector<std::vector<std::uint32_t>> levels(static_cast<std::size_t>(reps));
  std::vector<std::uint8_t> valid(static_cast<std::size_t>(reps), 0);
  parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
    const PppSample sample = sampler.sample(
        derive_stream(seed, {static_cast<std::uint64_t>(config.intensity_scale), r}));
    if (sample.empty() || !sample.cap_valid) return;
    const Envelope env(sample, config.holder);
    levels[r] = acc.summarize(env, config.boundary);
    valid[r] = 1;
  });
  for (std::size_t r = 0; r < levels.size(); ++r) {
    if (valid[r]) {
      acc.add(levels[r]);
    } else {
      acc.add_discarded();
    }
  }
  return acc.table();
}

struct ExceedanceEstimate {
  double u;
  double p_hat;
  double stderr;
};

// P(ghat(x) - g(x) >= u) at a single abscissa, with binomial standard errors.
inline std::vector<ExceedanceEstimate> envelope_exceedance(const ModelConfig& config, double x,
                                                           const std::vector<double>& u_grid,
                                                           long reps, std::uint64_t seed,
                                                           unsigned threads = 0) {
  std::vector<std::size_t> order(u_grid.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return u_grid[a] < u_grid[b]; });
  std::vector<double> sorted_u(u_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) sorted_u[i] = u_grid[order[i]];

  const ExceedanceTable table = exceedance_table(config, {x}, sorted_u, reps, seed, threads);
  std::vector<ExceedanceEstimate> out(u_grid.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    out[order[i]] = {sorted_u[i], table.at(0, i), table.stderr_at(0, i)};
  }
  return out;
}

}  // namespace boundary_lab

#endif  // BOUNDARY_LAB_ENVELOPE_HPP_
