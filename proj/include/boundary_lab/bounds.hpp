#ifndef BOUNDARY_LAB_BOUNDS_HPP_
#define BOUNDARY_LAB_BOUNDS_HPP_

// Closed-form analytic quantities for the boundary model: the envelope
// deviation inequality, its Gamma moments, the variance identity evaluated
// from an exceedance table, the explicit risk bound for phi(u) = |u|^p, the
// local asymptotic constant, the Hölder interpolation inequality and the
// minimax rate exponents.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <vector>

#include "boundary_lab/envelope.hpp"
#include "boundary_lab/model.hpp"
#include "boundary_lab/rng.hpp"

namespace boundary_lab {

// ---------------------------------------------------------------------------
// Deviation inequality
// ---------------------------------------------------------------------------

struct DeviationBoundParams {
  HolderClass holder;
  double n;
  double u;
};

// Upper bound on P(ghat(x) - g(x) >= u):
//   exp(-n beta (2R)^{-1/beta} u^{(beta+1)/beta} / (beta+1))   for u <= 2R,
//   exp(-n (u - 2R/(beta+1)))                                  for u >  2R.
inline double deviation_bound(const DeviationBoundParams& params) {
  const double beta = params.holder.beta;
  const double r = params.holder.radius;
  const double u = params.u;
  if (!(u >= 0.0)) throw std::invalid_argument("deviation_bound: u must be >= 0");
  if (!(params.n > 0.0)) throw std::invalid_argument("deviation_bound: n must be positive");
  if (u <= 2.0 * r) {
    const double rate = params.n * beta * std::pow(2.0 * r, -1.0 / beta) / (beta + 1.0);
    return std::exp(-rate * std::pow(u, (beta + 1.0) / beta));
  }
  return std::exp(-params.n * (u - 2.0 * r / (beta + 1.0)));
}

// ---------------------------------------------------------------------------
// Gamma moments
// ---------------------------------------------------------------------------

// ∫_0^∞ u^q exp(-n beta (2R)^{-1/beta} u^{(beta+1)/beta} / (beta+1)) du
//   = ((beta+1)/beta)^{(beta q - 1)/(beta+1)} (2R)^{(q+1)/(beta+1)}
//     Gamma(beta (q+1)/(beta+1)) n^{-beta (q+1)/(beta+1)},
// an upper bound for the same integral over [0, 2R].
inline double gamma_moment(double q, double beta, double radius, double n) {
  if (!(q >= 0.0)) throw std::invalid_argument("gamma_moment: q must be >= 0");
  const HolderClass holder(beta, radius);
  if (!(n > 0.0)) throw std::invalid_argument("gamma_moment: n must be positive");
  const double b1 = beta + 1.0;
  return std::pow(b1 / beta, (beta * q - 1.0) / b1) * std::pow(2.0 * radius, (q + 1.0) / b1) *
         std::tgamma(beta * (q + 1.0) / b1) * std::pow(n, -beta * (q + 1.0) / b1);
}

// ---------------------------------------------------------------------------
// Variance identity
// ---------------------------------------------------------------------------

inline constexpr double kExceedanceTailWarning = 1e-3;

// (1/n) ∫∫ phi'(g(x) + u)^2 P(ghat(x) - g(x) >= u) du dx, by a double
// trapezoid over the table's (x, u) grid. Warns on std::clog when the table's
// last u column still carries probability above 1e-3.
inline double variance_rhs(const ModelConfig& config, const FunctionalSpec& spec,
                           const ExceedanceTable& table) {
  const std::size_t nx = table.x_grid.size();
  const std::size_t nu = table.u_grid.size();
  if (nx < 2 || nu < 2 || table.p_hat.size() != nx * nu) {
    throw std::invalid_argument("variance_rhs: table needs >= 2 x and u nodes");
  }
  double tail = 0.0;
  for (std::size_t i = 0; i < nx; ++i) tail = std::max(tail, table.at(i, nu - 1));
  if (tail > kExceedanceTailWarning) {
    std::clog << "warning: variance_rhs: exceedance at u_max=" << table.u_grid.back() << " is "
              << tail << " (> " << kExceedanceTailWarning << "); the u grid is too short\n";
  }
  std::vector<double> inner(nx);
  std::vector<double> integrand(nu);
  for (std::size_t i = 0; i < nx; ++i) {
    const double g = config.boundary(table.x_grid[i]);
    for (std::size_t j = 0; j < nu; ++j) {
      const double p = table.at(i, j);
      if (p == 0.0) {
        integrand[j] = 0.0;
        continue;
      }
      const double d = spec.phi_prime(g + table.u_grid[j]);
      integrand[j] = d * d * p;
    }
    inner[i] = trapezoid(table.u_grid, integrand);
  }
  return trapezoid(table.x_grid, inner) / config.n();
}

// ---------------------------------------------------------------------------
// Explicit risk bound for phi(u) = |u|^p
// ---------------------------------------------------------------------------

// The four terms of
//   E(Fhat_p - ||g||_p^p)^2 <= C1 R^{1/(b+1)} G n^{-(2b+1)/(b+1)}
//                             + C2 R^{(2p-1)/(b+1)} n^{-(2bp+1)/(b+1)}
//                             + C3 G n^{-2} exp(-2bRn/(b+1))
//                             + C4 n^{-2p} exp(-bRn/(b+1)),
// with G = ||g||_{2p-2}^{2p-2} (G = 1 when p = 1) and, writing
// A = p^2 2^{2p-2} for the factor from |u + g|^{2p-2} <= 2^{2p-2}(u^{2p-2} + |g|^{2p-2}):
//   C1 = A ((b+1)/b)^{-1/(b+1)} 2^{1/(b+1)} Gamma(b/(b+1))
//        (gamma_moment with q = 0, divided by n),
//   C2 = A ((b+1)/b)^{(b(2p-2)-1)/(b+1)} 2^{(2p-1)/(b+1)} Gamma(b(2p-1)/(b+1))
//        (gamma_moment with q = 2p - 2, divided by n),
//   C3 = A
//        (∫_{2R}^∞ exp(-n(u - 2R/(b+1))) du = n^{-1} exp(-2bRn/(b+1))),
//   C4 = A ((b+1)/b)^{2p-1} 2^{2p-1} Gamma(2p-1)
//        (∫_{2R}^∞ u^{2p-2} exp(-nbu/(b+1)) du
//           = ((b+1)/(nb))^{2p-1} Gamma(2p-1, 2bRn/(b+1)) and
//         Gamma(s, x) <= 2^s Gamma(s) exp(-x/2)).
struct RiskBoundTerms {
  double near_boundary_g = 0.0;   // C1 term
  double near_boundary_u = 0.0;   // C2 term
  double far_tail_g = 0.0;        // C3 term
  double far_tail_u = 0.0;        // C4 term

  double total() const noexcept {
    return near_boundary_g + near_boundary_u + far_tail_g + far_tail_u;
  }
};

inline RiskBoundTerms risk_upper_bound_power_terms(double p, double beta, double radius, double n,
                                                   double g_norm_2p_minus_2) {
  if (!(p >= 1.0)) throw std::invalid_argument("risk bound: p must be >= 1");
  const HolderClass holder(beta, radius);
  if (!(n > 0.0)) throw std::invalid_argument("risk bound: n must be positive");
  if (!(g_norm_2p_minus_2 >= 0.0)) {
    throw std::invalid_argument("risk bound: ||g||_{2p-2}^{2p-2} must be >= 0");
  }
  const double b1 = beta + 1.0;
  const double a = p * p * std::pow(2.0, 2.0 * p - 2.0);
  const double c1 = a * std::pow(b1 / beta, -1.0 / b1) * std::pow(2.0, 1.0 / b1) *
                    std::tgamma(beta / b1);
  const double c2 = a * std::pow(b1 / beta, (beta * (2.0 * p - 2.0) - 1.0) / b1) *
                    std::pow(2.0, (2.0 * p - 1.0) / b1) *
                    std::tgamma(beta * (2.0 * p - 1.0) / b1);
  const double c3 = a;
  const double c4 = a * std::pow(b1 / beta, 2.0 * p - 1.0) * std::pow(2.0, 2.0 * p - 1.0) *
                    std::tgamma(2.0 * p - 1.0);
  RiskBoundTerms t;
  t.near_boundary_g = c1 * std::pow(radius, 1.0 / b1) * g_norm_2p_minus_2 *
                      std::pow(n, -(2.0 * beta + 1.0) / b1);
  t.near_boundary_u = c2 * std::pow(radius, (2.0 * p - 1.0) / b1) *
                      std::pow(n, -(2.0 * beta * p + 1.0) / b1);
  t.far_tail_g = c3 * g_norm_2p_minus_2 * std::pow(n, -2.0) *
                 std::exp(-2.0 * beta * radius * n / b1);
  t.far_tail_u = c4 * std::pow(n, -2.0 * p) * std::exp(-beta * radius * n / b1);
  return t;
}

inline double risk_upper_bound_power(double p, double beta, double radius, double n,
                                     double g_norm_2p_minus_2) {
  return risk_upper_bound_power_terms(p, beta, radius, n, g_norm_2p_minus_2).total();
}

// ||g||_{2p-2}^{2p-2} with the convention ||g||_0^0 = 1.
inline double norm_power_2p_minus_2(const BoundaryFunction& g, double p,
                                    std::size_t grid_size = kDefaultGridSize) {
  const double q = 2.0 * p - 2.0;
  if (q == 0.0) return 1.0;
  std::vector<double> values(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) {
    values[i] = std::pow(std::abs(g(grid_node(i, grid_size))), q);
  }
  return trapezoid_uniform(values);
}

// ---------------------------------------------------------------------------
// Local asymptotic constant
// ---------------------------------------------------------------------------

// Gamma(b/(b+1)) (2Rb/(b+1))^{1/(b+1)} ||phi' o f||_2^2.
inline double local_asymptotic_constant(double beta, double radius, double phi_prime_norm_sq) {
  const HolderClass holder(beta, radius);
  if (!(phi_prime_norm_sq >= 0.0)) {
    throw std::invalid_argument("local_asymptotic_constant: norm must be >= 0");
  }
  const double b1 = beta + 1.0;
  return std::tgamma(beta / b1) * std::pow(2.0 * radius * beta / b1, 1.0 / b1) *
         phi_prime_norm_sq;
}

// ---------------------------------------------------------------------------
// Interpolation inequality
// ---------------------------------------------------------------------------

// ||1 - y^beta||_p on [0, 1] via ∫(1 - y^beta)^p dy = B(1/beta, p+1) / beta.
inline double one_minus_power_norm(double beta, double p) {
  const double log_beta_fn =
      std::lgamma(1.0 / beta) + std::lgamma(p + 1.0) - std::lgamma(1.0 / beta + p + 1.0);
  return std::pow(std::exp(log_beta_fn) / beta, 1.0 / p);
}

struct InterpolationCheck {
  double lhs = 0.0;     // ||f||_p on the grid
  double rhs = 0.0;     // ||f||_inf min(1, ||f||_inf/R)^{1/(beta p)} ||1 - y^beta||_p
  double margin = 0.0;  // grid-error allowance added to lhs
  bool holds = true;
};

// Checks ||f||_p >= ||f||_inf min(1, ||f||_inf / R)^{1/(beta p)} ||1 - y^beta||_p
// for f in C^beta(R), with trapezoid norms on a uniform grid. The margin
// 2R grid^{-beta} is added to the left side; it dominates the discretisation
// error of the grid L^p norm of a C^beta(R) function.
inline InterpolationCheck interpolation_check(const BoundaryFunction& f, double p,
                                              std::size_t grid_size = kDefaultGridSize) {
  if (!(p >= 1.0)) throw std::invalid_argument("interpolation_check: p must be >= 1");
  require_grid(grid_size);
  const double beta = f.holder().beta;
  const double r = f.holder().radius;
  std::vector<double> powered(grid_size);
  double sup = 0.0;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double v = std::abs(f(grid_node(i, grid_size)));
    sup = std::max(sup, v);
    powered[i] = std::pow(v, p);
  }
  InterpolationCheck out;
  out.lhs = std::pow(trapezoid_uniform(powered), 1.0 / p);
  out.rhs = sup == 0.0 ? 0.0
                       : sup * std::pow(std::min(1.0, sup / r), 1.0 / (beta * p)) *
                             one_minus_power_norm(beta, p);
  out.margin = 2.0 * r * std::pow(static_cast<double>(grid_size), -beta);
  out.holds = out.lhs + out.margin >= out.rhs;
  return out;
}

struct CorpusCase {
  BoundaryFunction f;
  double p;
};

// Randomised corpus of curves built only from constructors whose Hölder
// membership holds by construction: constants, shifted R x^beta, shifted bump
// sums with c <= 1/4 and (for beta = 1) piecewise-linear interpolants with
// slopes bounded by R. beta and p cycle through {0.3, 0.5, 1} and {1, 2, 4}
// unless fixed.
inline std::vector<CorpusCase> interpolation_corpus(std::size_t size, std::uint64_t seed,
                                                    double radius = 1.0,
                                                    std::optional<double> beta = std::nullopt,
                                                    std::optional<double> p = std::nullopt) {
  static constexpr double kBetas[] = {0.3, 0.5, 1.0};
  static constexpr double kPowers[] = {1.0, 2.0, 4.0};
  std::vector<CorpusCase> corpus;
  corpus.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    CounterRng rng(derive_stream(seed, {i}));
    const double b = beta ? *beta : kBetas[i % 3];
    const double pp = p ? *p : kPowers[(i / 3) % 3];
    const HolderClass holder(b, radius);
    const double offset = (2.0 * rng.uniform() - 1.0) * 2.0 * radius;
    std::size_t kind = (i / 9) % 4;
    if (kind == 3 && b != 1.0) kind = 2;
    switch (kind) {
      case 0:
        corpus.push_back({BoundaryFunction::constant(offset, holder), pp});
        break;
      case 1:
        corpus.push_back(
            {BoundaryFunction::shifted(BoundaryFunction::scaled_power(holder), offset * 0.5), pp});
        break;
      case 2: {
        const std::size_t m = 1 + static_cast<std::size_t>(rng.uniform() * 32.0);
        std::vector<std::uint8_t> theta(m);
        for (auto& t : theta) t = rng.uniform() < 0.5 ? 1 : 0;
        theta[static_cast<std::size_t>(rng.uniform() * static_cast<double>(m))] = 1;
        const double c = 0.25 * (0.05 + 0.95 * rng.uniform());
        const double shift = rng.uniform() < 0.5 ? 0.0 : offset * 0.1;
        corpus.push_back({BoundaryFunction::shifted(
                              BoundaryFunction::bump_sum(std::move(theta), c, holder), shift),
                          pp});
        break;
      }
      default: {
        const std::size_t nodes = 2 + static_cast<std::size_t>(rng.uniform() * 40.0);
        std::vector<double> xs = uniform_grid(nodes);
        std::vector<double> ys(nodes);
        ys[0] = offset * 0.5;
        for (std::size_t k = 1; k < nodes; ++k) {
          const double slope = (2.0 * rng.uniform() - 1.0) * radius;
          ys[k] = ys[k - 1] + slope * (xs[k] - xs[k - 1]);
        }
        corpus.push_back({BoundaryFunction::grid_interpolant(xs, ys, holder), pp});
        break;
      }
    }
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Rate exponents
// ---------------------------------------------------------------------------

struct ExponentTable {
  double beta;
  double p;
  double ppp_estimation;           // ||g||_p^p, linear functionals
  double ppp_lp_norm_and_testing;  // ||g||_p and the separation rate
  double gwn_testing;
};

inline ExponentTable rate_exponents(double beta, double p) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("rate_exponents: beta in (0,1]");
  if (!(p >= 1.0)) throw std::invalid_argument("rate_exponents: p must be >= 1");
  ExponentTable t{};
  t.beta = beta;
  t.p = p;
  t.ppp_estimation = (beta + 0.5) / (beta + 1.0);
  t.ppp_lp_norm_and_testing = (beta + 1.0 / (2.0 * p)) / (beta + 1.0);
  t.gwn_testing = beta / (2.0 * beta + 0.5 + std::max(0.5 - 1.0 / p, 0.0));
  return t;
}

// r_n^* = n^{-(beta + 1/(2p))/(beta + 1)}.
inline double separation_rate(double beta, double p, double n) {
  return std::pow(n, -rate_exponents(beta, p).ppp_lp_norm_and_testing);
}

}  // namespace boundary_lab

#endif  // BOUNDARY_LAB_BOUNDS_HPP_
