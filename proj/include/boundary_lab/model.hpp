#ifndef BOUNDARY_LAB_MODEL_HPP_
#define BOUNDARY_LAB_MODEL_HPP_

// Domain types shared by every module: the Hölder class C^beta(R), boundary
// curves g on [0,1], functionals F(g) = ∫ phi(g(x)) dx and the model
// configuration (intensity n * 1(y >= g(x))).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace boundary_lab {

inline constexpr std::size_t kDefaultGridSize = 8192;

// ---------------------------------------------------------------------------
// Hölder class
// ---------------------------------------------------------------------------

struct HolderClass {
  double beta = 1.0;
  double radius = 1.0;

  HolderClass() = default;
  HolderClass(double beta_, double radius_) : beta(beta_), radius(radius_) {
    if (!(beta > 0.0 && beta <= 1.0)) {
      throw std::invalid_argument("holder class: beta must lie in (0, 1], got " +
                                  std::to_string(beta));
    }
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw std::invalid_argument("holder class: radius must be positive, got " +
                                  std::to_string(radius));
    }
  }

  // R * d^beta, with a fast path for the Lipschitz case.
  double modulus(double distance) const noexcept {
    return beta == 1.0 ? radius * distance : radius * std::pow(distance, beta);
  }

  friend bool operator==(const HolderClass&, const HolderClass&) = default;
};

// ---------------------------------------------------------------------------
// Quadrature helpers
// ---------------------------------------------------------------------------

inline void require_grid(std::size_t grid_size) {
  if (grid_size < 2) {
    throw std::invalid_argument("grid size must be at least 2, got " +
                                std::to_string(grid_size));
  }
}

// Node i of the uniform grid with grid_size nodes on [0, 1].
inline double grid_node(std::size_t i, std::size_t grid_size) noexcept {
  if (i + 1 == grid_size) return 1.0;
  return static_cast<double>(i) / static_cast<double>(grid_size - 1);
}

inline std::vector<double> uniform_grid(std::size_t grid_size, double lo = 0.0,
                                        double hi = 1.0) {
  require_grid(grid_size);
  std::vector<double> nodes(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    nodes[i] = lo + (hi - lo) * grid_node(i, grid_size);
  }
  nodes.back() = hi;
  return nodes;
}

// Composite trapezoid of samples on a uniform grid over an interval of the
// given length.
inline double trapezoid_uniform(std::span<const double> values, double length = 1.0) {
  if (values.size() < 2) throw std::invalid_argument("trapezoid: need at least 2 samples");
  double interior = 0.0;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) interior += values[i];
  const double step = length / static_cast<double>(values.size() - 1);
  return step * (0.5 * (values.front() + values.back()) + interior);
}

// Composite trapezoid on arbitrary sorted nodes.
inline double trapezoid(std::span<const double> nodes, std::span<const double> values) {
  if (nodes.size() != values.size() || nodes.size() < 2) {
    throw std::invalid_argument("trapezoid: node/value size mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    sum += 0.5 * (nodes[i] - nodes[i - 1]) * (values[i] + values[i - 1]);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Triangular kernel K(u) = 4 min(u, 1 - u) on [0, 1]
// ---------------------------------------------------------------------------

inline double triangular_kernel(double u) noexcept {
  if (u <= 0.0 || u >= 1.0) return 0.0;
  return 4.0 * std::min(u, 1.0 - u);
}

// ||K||_p = 2 (p + 1)^{-1/p}; in particular ∫K = 1.
inline double triangular_kernel_norm(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("kernel norm: p must be >= 1");
  return 2.0 * std::pow(p + 1.0, -1.0 / p);
}

// ---------------------------------------------------------------------------
// Boundary functions
// ---------------------------------------------------------------------------

class BoundaryFunction;

namespace boundary_kind {

struct Constant {
  double value;
};

// R * x^beta for the claimed class.
struct ScaledPower {};

// base + sum_k theta_k * c R h^beta K((x - (k-1)h) / h), h = 1/m.
struct BumpSum {
  std::vector<std::uint8_t> theta;
  double c;
  std::shared_ptr<const BoundaryFunction> base;
};

// Piecewise-linear interpolant through (nodes[i], values[i]).
struct GridInterpolant {
  std::vector<double> nodes;
  std::vector<double> values;
};

struct Shifted {
  std::shared_ptr<const BoundaryFunction> base;
  double offset;
};

}  // namespace boundary_kind

// An evaluable curve g on [0, 1] together with the Hölder class it claims
// membership of. Immutable; copies share any nested base curve.
class BoundaryFunction {
 public:
  using Kind = std::variant<boundary_kind::Constant, boundary_kind::ScaledPower,
                            boundary_kind::BumpSum, boundary_kind::GridInterpolant,
                            boundary_kind::Shifted>;

  static BoundaryFunction constant(double value, HolderClass holder) {
    if (!std::isfinite(value)) throw std::invalid_argument("constant boundary must be finite");
    return BoundaryFunction(boundary_kind::Constant{value}, holder);
  }

  static BoundaryFunction scaled_power(HolderClass holder) {
    return BoundaryFunction(boundary_kind::ScaledPower{}, holder);
  }

  // Bumps of amplitude c R h^beta on the m = theta.size() cells of [0, 1].
  // c <= 1/4 keeps the bump part in C^beta(R). The claimed class is `holder`;
  // for a non-constant base the caller is responsible for the claim.
  static BoundaryFunction bump_sum(std::vector<std::uint8_t> theta, double c,
                                   HolderClass holder,
                                   std::optional<BoundaryFunction> base = std::nullopt);

  // nodes must be strictly increasing with nodes.front() <= 0 and
  // nodes.back() >= 1.
  static BoundaryFunction grid_interpolant(std::vector<double> nodes,
                                           std::vector<double> values, HolderClass holder) {
    if (nodes.size() != values.size() || nodes.size() < 2) {
      throw std::invalid_argument("grid interpolant: need >= 2 nodes with matching values");
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
      if (!(nodes[i] > nodes[i - 1])) {
        throw std::invalid_argument("grid interpolant: nodes must be strictly increasing");
      }
    }
    if (nodes.front() > 0.0 || nodes.back() < 1.0) {
      throw std::invalid_argument("grid interpolant: nodes must cover [0, 1]");
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw std::invalid_argument("grid interpolant: non-finite value");
    }
    return BoundaryFunction(
        boundary_kind::GridInterpolant{std::move(nodes), std::move(values)}, holder);
  }

  static BoundaryFunction shifted(const BoundaryFunction& base, double offset) {
    if (!std::isfinite(offset)) throw std::invalid_argument("shift must be finite");
    return BoundaryFunction(
        boundary_kind::Shifted{std::make_shared<const BoundaryFunction>(base), offset},
        base.holder());
  }

  double operator()(double x) const;

  const HolderClass& holder() const noexcept { return holder_; }
  const Kind& kind() const noexcept { return kind_; }

  bool is_constant() const noexcept {
    return std::holds_alternative<boundary_kind::Constant>(kind_);
  }

  // Interior abscissae where the curve has kinks (sorted, unique). Between
  // consecutive breakpoints every kind except ScaledPower is affine.
  std::vector<double> breakpoints() const;

  // True when the curve is affine between consecutive breakpoints.
  bool piecewise_linear() const;

  std::string describe() const;

 private:
  BoundaryFunction(Kind kind, HolderClass holder) : kind_(std::move(kind)), holder_(holder) {}

  Kind kind_;
  HolderClass holder_;
};

inline BoundaryFunction BoundaryFunction::bump_sum(std::vector<std::uint8_t> theta, double c,
                                                   HolderClass holder,
                                                   std::optional<BoundaryFunction> base) {
  if (theta.empty()) throw std::invalid_argument("bump sum: need at least one cell");
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("bump sum: c must be > 0");
  for (auto& t : theta) t = t ? 1 : 0;
  auto base_ptr = std::make_shared<const BoundaryFunction>(
      base ? *base : BoundaryFunction::constant(0.0, holder));
  return BoundaryFunction(boundary_kind::BumpSum{std::move(theta), c, std::move(base_ptr)},
                          holder);
}

inline double BoundaryFunction::operator()(double x) const {
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, boundary_kind::Constant>) {
          return k.value;
        } else if constexpr (std::is_same_v<T, boundary_kind::ScaledPower>) {
          return holder_.modulus(std::max(x, 0.0));
        } else if constexpr (std::is_same_v<T, boundary_kind::BumpSum>) {
          const std::size_t m = k.theta.size();
          const double h = 1.0 / static_cast<double>(m);
          double value = (*k.base)(x);
          const double scaled = x * static_cast<double>(m);
          std::size_t cell = scaled <= 0.0 ? 0 : static_cast<std::size_t>(scaled);
          if (cell >= m) cell = m - 1;
          if (k.theta[cell]) {
            const double amplitude = k.c * holder_.radius * std::pow(h, holder_.beta);
            value += amplitude * triangular_kernel(scaled - static_cast<double>(cell));
          }
          return value;
        } else if constexpr (std::is_same_v<T, boundary_kind::GridInterpolant>) {
          const auto& xs = k.nodes;
          if (x <= xs.front()) return k.values.front();
          if (x >= xs.back()) return k.values.back();
          const auto it = std::upper_bound(xs.begin(), xs.end(), x);
          const std::size_t i = static_cast<std::size_t>(it - xs.begin());
          const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
          return k.values[i - 1] + t * (k.values[i] - k.values[i - 1]);
        } else {
          return (*k.base)(x) + k.offset;
        }
      },
      kind_);
}

inline std::vector<double> BoundaryFunction::breakpoints() const {
  std::vector<double> points = std::visit(
      [&](const auto& k) -> std::vector<double> {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, boundary_kind::BumpSum>) {
          std::vector<double> out = k.base->breakpoints();
          const std::size_t m = k.theta.size();
          for (std::size_t i = 0; i < m; ++i) {
            if (!k.theta[i]) continue;
            out.push_back(static_cast<double>(i) / static_cast<double>(m));
            out.push_back((static_cast<double>(i) + 0.5) / static_cast<double>(m));
            out.push_back(static_cast<double>(i + 1) / static_cast<double>(m));
          }
          return out;
        } else if constexpr (std::is_same_v<T, boundary_kind::GridInterpolant>) {
          return k.nodes;
        } else if constexpr (std::is_same_v<T, boundary_kind::Shifted>) {
          return k.base->breakpoints();
        } else {
          return {};
        }
      },
      kind_);
  std::erase_if(points, [](double x) { return !(x > 0.0 && x < 1.0); });
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

inline bool BoundaryFunction::piecewise_linear() const {
  return std::visit(
      [&](const auto& k) -> bool {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, boundary_kind::ScaledPower>) {
          return holder_.beta == 1.0;
        } else if constexpr (std::is_same_v<T, boundary_kind::BumpSum> ||
                             std::is_same_v<T, boundary_kind::Shifted>) {
          return k.base->piecewise_linear();
        } else {
          return true;
        }
      },
      kind_);
}

inline std::string BoundaryFunction::describe() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, boundary_kind::Constant>) {
          out << "const:" << k.value;
        } else if constexpr (std::is_same_v<T, boundary_kind::ScaledPower>) {
          out << "powb";
        } else if constexpr (std::is_same_v<T, boundary_kind::BumpSum>) {
          out << "bumps:";
          for (auto t : k.theta) out << (t ? '1' : '0');
          out << ':' << k.c;
          if (!(k.base->is_constant() && (*k.base)(0.0) == 0.0)) {
            out << "+(" << k.base->describe() << ')';
          }
        } else if constexpr (std::is_same_v<T, boundary_kind::GridInterpolant>) {
          out << "grid:<" << k.nodes.size() << " nodes>";
        } else {
          out << "shift:" << k.offset << ':' << k.base->describe();
        }
      },
      kind_);
  return out.str();
}

// Evaluation nodes: the uniform grid merged with the curve's breakpoints.
// For piecewise-linear curves this node set resolves g exactly.
inline std::vector<double> resolving_nodes(const BoundaryFunction& g, std::size_t grid_size) {
  std::vector<double> nodes = uniform_grid(grid_size);
  const std::vector<double> kinks = g.breakpoints();
  if (kinks.empty()) return nodes;
  std::vector<double> merged;
  merged.reserve(nodes.size() + kinks.size());
  std::merge(nodes.begin(), nodes.end(), kinks.begin(), kinks.end(), std::back_inserter(merged));
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  return merged;
}

// max_x g(x), evaluated on the uniform grid plus breakpoints (exact for
// piecewise-linear and monotone curves).
inline double boundary_max(const BoundaryFunction& g, std::size_t grid_size = kDefaultGridSize) {
  double best = -std::numeric_limits<double>::infinity();
  for (double x : resolving_nodes(g, grid_size)) best = std::max(best, g(x));
  return best;
}

// ---------------------------------------------------------------------------
// Functionals F(g) = ∫_0^1 phi(g(x)) dx
// ---------------------------------------------------------------------------

struct FunctionalSpec {
  std::function<double(double)> phi;
  std::function<double(double)> phi_prime;
  std::string label;
  std::optional<double> power;

  // phi(u) = |u|^p, phi'(u) = p |u|^{p-1} sgn(u) with phi'(0) = 0.
  static FunctionalSpec power_preset(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) {
      throw std::invalid_argument("power functional: p must be >= 1");
    }
    FunctionalSpec spec;
    spec.phi = [p](double u) { return std::pow(std::abs(u), p); };
    spec.phi_prime = [p](double u) {
      if (u == 0.0) return 0.0;
      const double magnitude = p == 1.0 ? 1.0 : p * std::pow(std::abs(u), p - 1.0);
      return u > 0.0 ? magnitude : -magnitude;
    };
    std::ostringstream label;
    label << "power:" << p;
    spec.label = label.str();
    spec.power = p;
    return spec;
  }

  // phi(u) = exp(a u); phi' grows exponentially, which the unbiasedness
  // condition tolerates for |a| well below n.
  static FunctionalSpec exponential(double a) {
    if (!std::isfinite(a)) throw std::invalid_argument("exponential functional: a must be finite");
    FunctionalSpec spec;
    spec.phi = [a](double u) { return std::exp(a * u); };
    spec.phi_prime = [a](double u) { return a * std::exp(a * u); };
    std::ostringstream label;
    label << "exp:" << a;
    spec.label = label.str();
    return spec;
  }

  static FunctionalSpec constant(double value) {
    FunctionalSpec spec;
    spec.phi = [value](double) { return value; };
    spec.phi_prime = [](double) { return 0.0; };
    std::ostringstream label;
    label << "const:" << value;
    spec.label = label.str();
    return spec;
  }
};

// ∫_0^1 phi(g(x)) dx by the composite trapezoid on a uniform grid.
inline double functional_value(const FunctionalSpec& spec, const BoundaryFunction& g,
                               std::size_t grid_size = kDefaultGridSize) {
  require_grid(grid_size);
  std::vector<double> values(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double x = grid_node(i, grid_size);
    values[i] = spec.phi(g(x));
    if (!std::isfinite(values[i])) {
      std::ostringstream msg;
      msg << "functional_value: " << spec.label << " is not finite at x=" << x
          << " (g(x)=" << g(x) << ")";
      throw std::domain_error(msg.str());
    }
  }
  return trapezoid_uniform(values);
}

// ||g||_p on the uniform grid.
inline double lp_norm(const BoundaryFunction& g, double p,
                      std::size_t grid_size = kDefaultGridSize) {
  return std::pow(functional_value(FunctionalSpec::power_preset(p), g, grid_size), 1.0 / p);
}

// ---------------------------------------------------------------------------
// Hölder membership on a grid
// ---------------------------------------------------------------------------

// Relative slack absorbing rounding in evaluations that sit exactly on the
// Hölder bound (e.g. R x^beta or bumps with c = 1/4).
inline constexpr double kHolderRoundingSlack = 1e-12;

// True iff |f(x_i) - f(x_j)| <= R |x_i - x_j|^beta for every pair of nodes of
// the uniform grid, up to rounding slack. Works for any callable on [0, 1].
template <class Curve>
bool holder_check(const Curve& f, const HolderClass& h, std::size_t grid_size) {
  require_grid(grid_size);
  std::vector<double> xs = uniform_grid(grid_size);
  std::vector<double> ys(grid_size);
  double scale = 0.0;
  for (std::size_t i = 0; i < grid_size; ++i) {
    ys[i] = f(xs[i]);
    scale = std::max(scale, std::abs(ys[i]));
  }
  const double abs_slack = 4.0 * std::numeric_limits<double>::epsilon() * std::max(scale, h.radius);
  for (std::size_t i = 0; i < grid_size; ++i) {
    for (std::size_t j = i + 1; j < grid_size; ++j) {
      const double bound = h.modulus(xs[j] - xs[i]);
      if (std::abs(ys[j] - ys[i]) > bound * (1.0 + kHolderRoundingSlack) + abs_slack) {
        return false;
      }
    }
  }
  return true;
}

inline bool holder_membership_check(const BoundaryFunction& f, std::size_t grid_size) {
  return holder_check(f, f.holder(), grid_size);
}

// ---------------------------------------------------------------------------
// Model configuration: intensity n * 1(y >= g(x)) on [0,1] x R
// ---------------------------------------------------------------------------

struct ModelConfig {
  long intensity_scale;
  BoundaryFunction boundary;
  HolderClass holder;

  ModelConfig(long n, BoundaryFunction g, HolderClass h)
      : intensity_scale(n), boundary(std::move(g)), holder(h) {
    if (intensity_scale < 1) {
      throw std::invalid_argument("model: intensity scale n must be a positive integer");
    }
    if (!(boundary.holder() == holder)) {
      throw std::invalid_argument("model: boundary claims a different Hölder class");
    }
  }

  double n() const noexcept { return static_cast<double>(intensity_scale); }
};

}  // namespace boundary_lab

#endif  // BOUNDARY_LAB_MODEL_HPP_
