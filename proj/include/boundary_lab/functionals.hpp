#ifndef BOUNDARY_LAB_FUNCTIONALS_HPP_
#define BOUNDARY_LAB_FUNCTIONALS_HPP_

// Unbiased estimation of F(g) = ∫ phi(g(x)) dx from the envelope:
//
//   Fhat = ∫ phi(ghat(x)) dx - (1/n) sum_j phi'(Y_j) 1(ghat(X_j) >= Y_j),
//
// its pseudo version with a known dominating curve, and the L^p-norm
// estimator That = max(Fhat_p, 0)^{1/p}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "boundary_lab/envelope.hpp"
#include "boundary_lab/model.hpp"
#include "boundary_lab/simulate.hpp"

namespace boundary_lab {

struct EstimateResult {
  double value = 0.0;
  double integral_term = 0.0;  // ∫ phi(ghat)
  double sum_term = 0.0;       // (1/n) sum_j phi'(Y_j) * indicator_j
  std::size_t count_on_envelope = 0;
  bool cap_valid = true;
};

namespace detail {

inline double checked_phi_prime(const FunctionalSpec& spec, double y) {
  const double d = spec.phi_prime(y);
  if (!std::isfinite(d)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "phi' of " << spec.label << " overflows at y=" << y;
    throw std::overflow_error(msg.str());
  }
  return d;
}

inline double integrate_phi_on_grid(const FunctionalSpec& spec, std::vector<double> values) {
  for (double& v : values) {
    const double mapped = spec.phi(v);
    if (!std::isfinite(mapped)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "phi of " << spec.label << " is not finite at " << v;
      throw std::domain_error(msg.str());
    }
    v = mapped;
  }
  return trapezoid_uniform(values);
}

}  // namespace detail

// Fhat for a sample whose envelope has already been built.
inline EstimateResult estimate_functional(const Envelope& env, const PppSample& sample,
                                          const FunctionalSpec& spec,
                                          std::size_t grid_size = kDefaultGridSize) {
  if (sample.empty()) throw NoObservations();
  if (env.sample_size() != sample.size()) {
    throw std::invalid_argument("estimate_functional: envelope built from a different sample");
  }
  EstimateResult out;
  out.cap_valid = sample.cap_valid;
  out.integral_term = detail::integrate_phi_on_grid(spec, env.evaluate_grid(grid_size));
  double sum = 0.0;
  const auto& indicator = env.indicators();
  for (std::size_t j = 0; j < sample.size(); ++j) {
    if (!indicator[j]) continue;
    sum += detail::checked_phi_prime(spec, sample.points[j].y);
    ++out.count_on_envelope;
  }
  out.sum_term = sum / static_cast<double>(sample.n);
  out.value = out.integral_term - out.sum_term;
  return out;
}

inline EstimateResult estimate_functional(const PppSample& sample, const HolderClass& holder,
                                          const FunctionalSpec& spec,
                                          std::size_t grid_size = kDefaultGridSize) {
  require_grid(grid_size);
  const Envelope env(sample, holder);
  return estimate_functional(env, sample, spec, grid_size);
}

// Pseudo-estimator with a known curve gbar >= g (the caller guarantees
// domination). cap_valid additionally requires max gbar <= y_cap, since
// points above the cap could otherwise enter the indicator sum.
inline EstimateResult estimate_pseudo(const PppSample& sample, const BoundaryFunction& gbar,
                                      const FunctionalSpec& spec,
                                      std::size_t grid_size = kDefaultGridSize) {
  require_grid(grid_size);
  EstimateResult out;
  out.cap_valid = boundary_max(gbar, grid_size) <= sample.y_cap;
  std::vector<double> values(grid_size);
  for (std::size_t i = 0; i < grid_size; ++i) values[i] = gbar(grid_node(i, grid_size));
  out.integral_term = detail::integrate_phi_on_grid(spec, std::move(values));
  double sum = 0.0;
  for (const Point& p : sample.points) {
    if (gbar(p.x) >= p.y) {
      sum += detail::checked_phi_prime(spec, p.y);
      ++out.count_on_envelope;
    }
  }
  out.sum_term = sum / static_cast<double>(sample.n);
  out.value = out.integral_term - out.sum_term;
  return out;
}

// max(fhat, 0)^{1/p}.
inline double positive_part_root(double fhat, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("positive_part_root: p must be >= 1");
  return std::pow(std::max(fhat, 0.0), 1.0 / p);
}

// That = (Fhat_p)_+^{1/p}, estimating ||g||_p.
inline double estimate_lp_norm(const PppSample& sample, const HolderClass& holder, double p,
                               std::size_t grid_size = kDefaultGridSize) {
  if (!(p >= 1.0)) throw std::invalid_argument("estimate_lp_norm: p must be >= 1");
  const EstimateResult fhat =
      estimate_functional(sample, holder, FunctionalSpec::power_preset(p), grid_size);
  return positive_part_root(fhat.value, p);
}

// ---------------------------------------------------------------------------
// Exact ∫ |ghat|^p for beta = 1
// ---------------------------------------------------------------------------

// ∫ |l(x)|^p over [x0, x1] for the affine l with l(x0) = y0, l(x1) = y1.
inline double integrate_abs_power_affine(double x0, double y0, double x1, double y1, double p) {
  const double width = x1 - x0;
  if (!(width > 0.0)) return 0.0;
  if ((y0 < 0.0 && y1 > 0.0) || (y0 > 0.0 && y1 < 0.0)) {
    const double root = x0 + width * y0 / (y0 - y1);
    return integrate_abs_power_affine(x0, y0, root, 0.0, p) +
           integrate_abs_power_affine(root, 0.0, x1, y1, p);
  }
  const double a = std::abs(y0);
  const double b = std::abs(y1);
  const double spread = std::abs(b - a);
  if (spread <= 1e-6 * std::max(a, b)) {
    // Simpson is exact to O(spread^4) here and avoids the cancellation below.
    const double mid = 0.5 * (a + b);
    return width * (std::pow(a, p) + 4.0 * std::pow(mid, p) + std::pow(b, p)) / 6.0;
  }
  return width * (std::pow(b, p + 1.0) - std::pow(a, p + 1.0)) / ((p + 1.0) * (b - a));
}

// For beta = 1 the envelope is piecewise affine: between consecutive
// envelope points only their two cones matter, and they cross once. Returns
// the exact ∫_0^1 |ghat(x)|^p dx.
inline double exact_power_integral_lipschitz(const Envelope& env, double p) {
  if (env.holder().beta != 1.0) {
    throw std::invalid_argument("exact_power_integral_lipschitz: requires beta = 1");
  }
  if (!(p >= 1.0)) throw std::invalid_argument("exact_power_integral_lipschitz: p must be >= 1");
  const double r = env.holder().radius;
  const auto pts = env.support();
  double total = integrate_abs_power_affine(0.0, pts.front().y + r * pts.front().x,
                                            pts.front().x, pts.front().y, p);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Point& a = pts[i];
    const Point& b = pts[i + 1];
    double cross = (b.y - a.y + r * (a.x + b.x)) / (2.0 * r);
    cross = std::clamp(cross, a.x, b.x);
    total += integrate_abs_power_affine(a.x, a.y, cross, a.y + r * (cross - a.x), p);
    total += integrate_abs_power_affine(cross, b.y + r * (b.x - cross), b.x, b.y, p);
  }
  total += integrate_abs_power_affine(pts.back().x, pts.back().y, 1.0,
                                      pts.back().y + r * (1.0 - pts.back().x), p);
  return total;
}

}  // namespace boundary_lab

#endif  // BOUNDARY_LAB_FUNCTIONALS_HPP_
