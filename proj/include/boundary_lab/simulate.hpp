#ifndef BOUNDARY_LAB_SIMULATE_HPP_
#define BOUNDARY_LAB_SIMULATE_HPP_

// Sampling the Poisson point process with intensity n * 1(y >= g(x)) on the
// truncated window {(x, y) : x in [0,1], g(x) <= y <= y_cap}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "boundary_lab/model.hpp"
#include "boundary_lab/rng.hpp"

namespace boundary_lab {

struct Point {
  double x;
  double y;

  friend bool operator==(const Point&, const Point&) = default;
};

struct PppSample {
  std::vector<Point> points;
  long n = 1;
  double y_cap = 0.0;
  // True iff min_j y_j + R <= y_cap (or the sample is empty): points above
  // the cap then cannot change the envelope or any indicator.
  bool cap_valid = true;
  std::uint64_t seed = 0;

  bool empty() const noexcept { return points.empty(); }
  std::size_t size() const noexcept { return points.size(); }
};

inline bool cap_is_valid(const std::vector<Point>& points, double radius, double y_cap) {
  if (points.empty()) return true;
  double min_y = std::numeric_limits<double>::infinity();
  for (const Point& p : points) min_y = std::min(min_y, p.y);
  return min_y + radius <= y_cap;
}

// max_x g(x) + 2R + margin.
inline double default_cap(const ModelConfig& config, double margin = 0.0,
                          std::size_t grid_size = kDefaultGridSize) {
  if (!(margin >= 0.0)) throw std::invalid_argument("default_cap: margin must be >= 0");
  return boundary_max(config.boundary, grid_size) + 2.0 * config.holder.radius + margin;
}

// Precomputed column-area table for one (config, y_cap). Points are drawn by
// choosing a cell of the node grid proportionally to its column area and
// inverting the linear column-height density inside the cell; y is then
// uniform on [g(x), y_cap]. When g is affine between nodes (constants, bump
// sums, grid interpolants, beta = 1 power) this is exact; otherwise the
// x-marginal carries the trapezoid error of the node grid.
class PppSampler {
 public:
  PppSampler(ModelConfig config, double y_cap, std::size_t grid_size = kDefaultGridSize)
      : config_(std::move(config)), y_cap_(y_cap) {
    if (!std::isfinite(y_cap_)) throw std::invalid_argument("sample_ppp: y_cap must be finite");
    nodes_ = resolving_nodes(config_.boundary, grid_size);
    heights_.resize(nodes_.size());
    double max_g = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double g = config_.boundary(nodes_[i]);
      max_g = std::max(max_g, g);
      heights_[i] = y_cap_ - g;
    }
    if (y_cap_ < max_g) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "sample_ppp: y_cap " << y_cap_ << " lies below max g = " << max_g;
      throw std::invalid_argument(msg.str());
    }
    cumulative_.assign(nodes_.size(), 0.0);
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      const double cell = 0.5 * (nodes_[i] - nodes_[i - 1]) * (heights_[i] + heights_[i - 1]);
      cumulative_[i] = cumulative_[i - 1] + cell;
    }
  }

  const ModelConfig& config() const noexcept { return config_; }
  double y_cap() const noexcept { return y_cap_; }
  double area() const noexcept { return cumulative_.back(); }
  double expected_count() const noexcept { return config_.n() * area(); }

  PppSample sample(std::uint64_t seed) const {
    PppSample out;
    out.n = config_.intensity_scale;
    out.y_cap = y_cap_;
    out.seed = seed;
    CounterRng rng(detail::mix64(seed ^ 0x5851f42d4c957f2dULL));
    const double mean = expected_count();
    if (!(mean > 0.0)) {
      out.cap_valid = true;
      return out;
    }
    std::poisson_distribution<long long> count_dist(mean);
    const long long count = count_dist(rng);
    out.points.reserve(static_cast<std::size_t>(count));
    const double total = area();
    for (long long j = 0; j < count; ++j) {
      const double target = rng.uniform() * total;
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
      std::size_t cell = static_cast<std::size_t>(it - cumulative_.begin());
      cell = std::clamp<std::size_t>(cell, 1, nodes_.size() - 1);
      // target rounding up to the total can land past the last non-empty cell.
      while (cumulative_[cell] == cumulative_[cell - 1] && cell > 1) --cell;

      const double x0 = nodes_[cell - 1];
      const double x1 = nodes_[cell];
      const double c0 = heights_[cell - 1];
      const double c1 = heights_[cell];
      const double v = rng.uniform();
      const double denom = c0 + std::sqrt(std::max(0.0, c0 * c0 + v * (c1 * c1 - c0 * c0)));
      double t = denom > 0.0 ? v * (c0 + c1) / denom : v;
      t = std::clamp(t, 0.0, 1.0);
      const double x = std::clamp(x0 + (x1 - x0) * t, 0.0, 1.0);

      const double g = config_.boundary(x);
      const double y = std::min(g + rng.uniform() * (y_cap_ - g), y_cap_);
      if (!(y >= g && y <= y_cap_)) {
        throw std::logic_error("sample_ppp: generated point outside the admissible region");
      }
      out.points.push_back({x, y});
    }
    out.cap_valid = cap_is_valid(out.points, config_.holder.radius, y_cap_);
    return out;
  }

 private:
  ModelConfig config_;
  double y_cap_;
  std::vector<double> nodes_;
  std::vector<double> heights_;
  std::vector<double> cumulative_;
};

inline PppSample sample_ppp(const ModelConfig& config, double y_cap, std::uint64_t seed,
                            std::size_t grid_size = kDefaultGridSize) {
  return PppSampler(config, y_cap, grid_size).sample(seed);
}

}  // namespace boundary_lab

#endif  // BOUNDARY_LAB_SIMULATE_HPP_
