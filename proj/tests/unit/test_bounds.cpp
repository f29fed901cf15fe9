#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "boundary_lab/bounds.hpp"
#include "boundary_lab/functionals.hpp"

namespace bl = boundary_lab;
using boost::math::quadrature::gauss_kronrod;

namespace {

double gk(const std::function<double(double)>& f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

double branch_one(double u, double beta, double r, double n) {
  return std::exp(-n * beta * std::pow(2.0 * r, -1.0 / beta) * std::pow(u, (beta + 1.0) / beta) /
                  (beta + 1.0));
}

}  // namespace

TEST(DeviationBound, Examples) {
  const bl::HolderClass lip(1.0, 1.0);
  EXPECT_EQ(bl::deviation_bound({lip, 10.0, 0.0}), 1.0);
  EXPECT_NEAR(bl::deviation_bound({lip, 10.0, 1.0}), std::exp(-2.5), 1e-15);
  EXPECT_NEAR(bl::deviation_bound({lip, 10.0, 1.0}), 0.08208, 1e-5);
  for (double beta : {0.3, 0.5, 1.0}) {
    const bl::HolderClass h(beta, 0.7);
    const double at = bl::deviation_bound({h, 12.0, 1.4});
    EXPECT_NEAR(at, std::exp(-2.0 * 0.7 * beta * 12.0 / (beta + 1.0)), 1e-14);
    EXPECT_NEAR(bl::deviation_bound({h, 12.0, std::nextafter(1.4, 2.0)}), at, 1e-13);
  }
  EXPECT_THROW(bl::deviation_bound({lip, 10.0, -0.1}), std::invalid_argument);
}

TEST(DeviationBound, ContinuousAndNonincreasing) {
  bl::CounterRng rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    const double beta = 0.05 + 0.95 * rng.uniform();
    const double r = 0.1 + 3.0 * rng.uniform();
    const double n = 1.0 + 500.0 * rng.uniform();
    const bl::HolderClass h(beta, r);
    double prev = 1.0;
    for (int i = 0; i <= 2000; ++i) {
      const double u = 4.0 * r * i / 2000.0;
      const double b = bl::deviation_bound({h, n, u});
      ASSERT_LE(b, prev * (1.0 + 1e-14)) << beta << " " << r << " " << n << " u=" << u;
      prev = b;
    }
    const double left = bl::deviation_bound({h, n, 2.0 * r * (1.0 - 1e-12)});
    const double right = bl::deviation_bound({h, n, 2.0 * r * (1.0 + 1e-12)});
    // exponents reach ~1e3, so compare on the log scale unless both underflow
    if (std::min(left, right) < 1e-290) {
      EXPECT_LT(std::max(left, right), 1e-280);
    } else {
      EXPECT_NEAR(std::log(left), std::log(right), 1e-9 * (1.0 + std::abs(std::log(left))));
    }
  }
}

TEST(GammaMoment, Examples) {
  EXPECT_NEAR(bl::gamma_moment(0.0, 1.0, 0.5, 1.0), std::sqrt(std::numbers::pi / 2.0), 1e-14);
  EXPECT_NEAR(bl::gamma_moment(0.0, 1.0, 0.5, 100.0), 0.125331, 1e-6);
  for (double q : {0.0, 1.0, 2.5}) {
    for (double beta : {0.4, 1.0}) {
      const double a = bl::gamma_moment(q, beta, 0.8, 30.0);
      const double b = bl::gamma_moment(q, beta, 0.8, 120.0);
      EXPECT_NEAR(b / a, std::pow(4.0, -beta * (q + 1.0) / (beta + 1.0)), 1e-13);
    }
  }
  EXPECT_THROW(bl::gamma_moment(-1.0, 1.0, 1.0, 1.0), std::invalid_argument);
}

TEST(GammaMoment, DominatesTruncatedIntegral) {
  for (double beta : {0.3, 0.6, 1.0}) {
    for (double q : {0.0, 1.0, 2.0}) {
      const double r = 0.5;
      double last_gap = std::numeric_limits<double>::infinity();
      for (double n : {2.0, 10.0, 100.0, 1000.0}) {
        const auto f = [&](double u) { return std::pow(u, q) * branch_one(u, beta, r, n); };
        const double truncated = gk(f, 0.0, 2.0 * r);
        const double closed = bl::gamma_moment(q, beta, r, n);
        const double full = boost::math::quadrature::exp_sinh<double>().integrate(f);
        EXPECT_NEAR(closed, full, 1e-9 * closed) << beta << " " << q << " " << n;
        EXPECT_GE(closed, truncated * (1.0 - 1e-12));
        const double gap = (closed - truncated) / closed;
        EXPECT_LE(gap, last_gap + 1e-15);
        last_gap = gap;
      }
      EXPECT_LT(last_gap, 1e-6) << beta << " " << q;
    }
  }
}

TEST(VarianceRhs, ZeroTable) {
  const bl::HolderClass lip(1.0, 1.0);
  const bl::ModelConfig cfg(10, bl::BoundaryFunction::constant(1.0, lip), lip);
  bl::ExceedanceTable t;
  t.x_grid = bl::uniform_grid(5);
  t.u_grid = bl::uniform_grid(5, 0.0, 2.0);
  t.p_hat.assign(25, 0.0);
  t.reps = 10;
  EXPECT_EQ(bl::variance_rhs(cfg, bl::FunctionalSpec::power_preset(2), t), 0.0);
}

TEST(VarianceRhs, DeviationBoundTableMatchesClosedForms) {
  const double beta = 1.0, r = 0.5, n = 200.0;
  const bl::HolderClass h(beta, r);
  const bl::ModelConfig cfg(200, bl::BoundaryFunction::constant(0.0, h), h);
  bl::FunctionalSpec identity;
  identity.phi = [](double u) { return u; };
  identity.phi_prime = [](double) { return 1.0; };
  identity.label = "identity";
  bl::ExceedanceTable t;
  t.x_grid = bl::uniform_grid(3);
  t.u_grid = bl::uniform_grid(20001, 0.0, 4.0 * r);
  t.reps = 1;
  for (std::size_t i = 0; i < 3; ++i) {
    for (double u : t.u_grid) t.p_hat.push_back(bl::deviation_bound({h, n, u}));
  }
  const double got = bl::variance_rhs(cfg, identity, t);
  const double tail = std::exp(-n * (2.0 * r - 2.0 * r / (beta + 1.0))) / n;
  const double oracle = (gk([&](double u) { return branch_one(u, beta, r, n); }, 0.0, 2.0 * r) + tail) / n;
  EXPECT_NEAR(got, oracle, 1e-6 * oracle);
  EXPECT_NEAR(got, (bl::gamma_moment(0.0, beta, r, n) + tail) / n, 1e-6 * oracle);
}

TEST(VarianceRhs, FubiniIdentityForFirstMoment) {
  // g = 1, p = 1: phi' = 1 on [1, 3], so (1/n) ∫∫ P(ghat - g >= u) du dx = (1/n) E ∫ (ghat - g).
  const bl::HolderClass lip(1.0, 1.0);
  const bl::ModelConfig cfg(64, bl::BoundaryFunction::constant(1.0, lip), lip);
  const long reps = 3000;
  const std::size_t nx = 129;
  const auto table =
      bl::exceedance_table(cfg, bl::uniform_grid(nx), bl::uniform_grid(4001, 0.0, 2.0), reps, 77, 1);
  const double rhs = bl::variance_rhs(cfg, bl::FunctionalSpec::power_preset(1), table);
  const bl::PppSampler sampler(cfg, bl::default_cap(cfg));
  double mean_l1 = 0.0;
  for (long r = 0; r < reps; ++r) {
    const auto s = sampler.sample(bl::derive_stream(77, {64, static_cast<std::uint64_t>(r)}));
    const auto ghat = bl::Envelope(s, lip).evaluate_grid(nx);
    mean_l1 += bl::trapezoid_uniform(ghat) - 1.0;
  }
  mean_l1 /= static_cast<double>(reps);
  EXPECT_NEAR(rhs, mean_l1 / 64.0, 2e-3 * mean_l1 / 64.0);
}

TEST(RiskBound, LeadingTerms) {
  const double p = 2.0, beta = 0.7, r = 1.3, g_term = 0.6;
  const double n = 1e6;
  const auto t = bl::risk_upper_bound_power_terms(p, beta, r, n, g_term);
  EXPECT_GT(t.near_boundary_g, 0.0);
  EXPECT_GT(t.near_boundary_u, 0.0);
  EXPECT_NEAR(t.total() / t.near_boundary_g, 1.0, 1e-2);
  const double lead = t.near_boundary_g / (std::pow(r, 1.0 / (beta + 1.0)) * g_term *
                                           std::pow(n, -(2.0 * beta + 1.0) / (beta + 1.0)));
  const auto t2 = bl::risk_upper_bound_power_terms(p, beta, r, 4.0 * n, g_term);
  EXPECT_NEAR(t2.near_boundary_g / (std::pow(r, 1.0 / (beta + 1.0)) * g_term *
                                    std::pow(4.0 * n, -(2.0 * beta + 1.0) / (beta + 1.0))),
              lead, 1e-12 * lead);
  const auto zero = bl::risk_upper_bound_power_terms(p, beta, r, n, 0.0);
  EXPECT_EQ(zero.near_boundary_g, 0.0);
  EXPECT_NEAR(zero.total() / zero.near_boundary_u, 1.0, 1e-9);
  const auto zero4 = bl::risk_upper_bound_power_terms(p, beta, r, 4.0 * n, 0.0);
  EXPECT_NEAR(zero4.near_boundary_u / zero.near_boundary_u,
              std::pow(4.0, -(2.0 * beta * p + 1.0) / (beta + 1.0)), 1e-12);
  EXPECT_THROW(bl::risk_upper_bound_power(0.5, beta, r, n, 1.0), std::invalid_argument);
}

TEST(RiskBound, ConstantsMatchGammaMoments) {
  // The near-boundary terms are the Gamma moments times p^2 2^{2p-2} / n.
  for (double beta : {0.4, 1.0}) {
    for (double p : {1.0, 1.5, 3.0}) {
      const double r = 0.9, n = 50.0, g_term = 1.7;
      const double a = p * p * std::pow(2.0, 2.0 * p - 2.0);
      const auto t = bl::risk_upper_bound_power_terms(p, beta, r, n, g_term);
      EXPECT_NEAR(t.near_boundary_g, a * g_term * bl::gamma_moment(0.0, beta, r, n) / n,
                  1e-12 * t.near_boundary_g);
      EXPECT_NEAR(t.near_boundary_u, a * bl::gamma_moment(2.0 * p - 2.0, beta, r, n) / n,
                  1e-12 * t.near_boundary_u);
    }
  }
}

TEST(RiskBound, TailTermDominatesIncompleteGamma) {
  // n^{-1} ∫_{2R}^∞ u^{2p-2} e^{-n beta u/(beta+1)} du <= C4-term / (p^2 2^{2p-2}).
  for (double beta : {0.5, 1.0}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const double r = 0.5, n = 20.0;
      const auto f = [&](double u) {
        return std::exp((2.0 * p - 2.0) * std::log(u) - n * beta * u / (beta + 1.0));
      };
      const double tail = boost::math::quadrature::exp_sinh<double>().integrate(
          [&](double v) { return f(2.0 * r + v); });
      const auto t = bl::risk_upper_bound_power_terms(p, beta, r, n, 0.0);
      EXPECT_LE(tail / n, t.far_tail_u / (p * p * std::pow(2.0, 2.0 * p - 2.0))) << beta << " " << p;
    }
  }
}

TEST(RiskBound, DominatesEmpiricalMse) {
  const bl::HolderClass lip(1.0, 1.0);
  const auto g = bl::BoundaryFunction::constant(1.0, lip);
  const bl::ModelConfig cfg(100, g, lip);
  const bl::PppSampler sampler(cfg, bl::default_cap(cfg));
  const int reps = 2000;
  double mse = 0.0;
  for (int r = 0; r < reps; ++r) {
    const auto s = sampler.sample(bl::derive_stream(5, {std::uint64_t(r)}));
    const double e = bl::estimate_functional(s, lip, bl::FunctionalSpec::power_preset(1), 1025).value - 1.0;
    mse += e * e;
  }
  mse /= reps;
  const double bound = bl::risk_upper_bound_power(1.0, 1.0, 1.0, 100.0, bl::norm_power_2p_minus_2(g, 1.0));
  EXPECT_TRUE(std::isfinite(bound));
  EXPECT_GT(bound, 0.0);
  EXPECT_GE(bound, mse);
}

TEST(LocalConstant, Examples) {
  EXPECT_NEAR(bl::local_asymptotic_constant(1.0, 1.0, 4.0), 4.0 * std::sqrt(std::numbers::pi), 1e-13);
  EXPECT_NEAR(bl::local_asymptotic_constant(1.0, 1.0, 4.0), 7.0898, 1e-4);
  EXPECT_EQ(bl::local_asymptotic_constant(0.5, 2.0, 0.0), 0.0);
  for (double beta : {0.3, 1.0}) {
    EXPECT_NEAR(bl::local_asymptotic_constant(beta, 2.4, 1.0) / bl::local_asymptotic_constant(beta, 1.2, 1.0),
                std::pow(2.0, 1.0 / (beta + 1.0)), 1e-13);
  }
}

TEST(Interpolation, NormOfOneMinusPower) {
  for (double beta : {0.3, 0.5, 1.0}) {
    for (double p : {1.0, 2.0, 4.0}) {
      const double direct =
          std::pow(gk([&](double y) { return std::pow(1.0 - std::pow(y, beta), p); }, 0.0, 1.0), 1.0 / p);
      EXPECT_NEAR(bl::one_minus_power_norm(beta, p), direct, 1e-10);
    }
  }
  EXPECT_NEAR(bl::one_minus_power_norm(1.0, 1.0), 0.5, 1e-15);
}

TEST(Interpolation, Examples) {
  const bl::HolderClass lip(1.0, 1.0);
  const auto zero = bl::interpolation_check(bl::BoundaryFunction::constant(0.0, lip), 2.0);
  EXPECT_EQ(zero.lhs, 0.0);
  EXPECT_EQ(zero.rhs, 0.0);
  EXPECT_TRUE(zero.holds);

  for (double r : {0.5, 1.0, 3.0}) {
    const bl::HolderClass h(1.0, r);
    const auto res = bl::interpolation_check(bl::BoundaryFunction::scaled_power(h), 1.0);
    EXPECT_NEAR(res.lhs, r / 2.0, 1e-12);
    EXPECT_NEAR(res.rhs, r / 2.0, 1e-12);
    EXPECT_TRUE(res.holds);
  }

  // single bump c R h K(x/h), c = h = 1/4, beta = 1, p = 2: peak 1/8 on [0, 1/4]
  const auto bump = bl::BoundaryFunction::bump_sum({1, 0, 0, 0}, 0.25, lip);
  const auto res = bl::interpolation_check(bump, 2.0, 8193);  // 1/8 is a node
  const double peak = 0.125;
  const double exact_lhs = std::sqrt(peak * peak * 0.25 / 3.0);
  const double exact_rhs = peak * std::pow(peak, 0.5) * std::sqrt(1.0 / 3.0);
  EXPECT_NEAR(res.lhs, exact_lhs, 1e-6);
  EXPECT_NEAR(res.rhs, exact_rhs, 1e-12);
  EXPECT_TRUE(res.holds);
  EXPECT_GE(exact_lhs, exact_rhs);
}

TEST(Interpolation, CertifiedCorpusHasNoViolations) {
  const auto corpus = bl::interpolation_corpus(300, 2024);
  ASSERT_EQ(corpus.size(), 300u);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    ASSERT_TRUE(bl::holder_membership_check(corpus[i].f, 129)) << i << " " << corpus[i].f.describe();
    const auto res = bl::interpolation_check(corpus[i].f, corpus[i].p, 4097);
    EXPECT_TRUE(res.holds) << i << " " << corpus[i].f.describe() << " lhs=" << res.lhs
                           << " rhs=" << res.rhs;
  }
}

TEST(RateExponents, Examples) {
  const auto t = bl::rate_exponents(1.0, 2.0);
  EXPECT_DOUBLE_EQ(t.ppp_estimation, 0.75);
  EXPECT_DOUBLE_EQ(t.ppp_lp_norm_and_testing, 0.625);
  EXPECT_DOUBLE_EQ(t.gwn_testing, 0.4);
  for (double p : {1.0, 2.0, 5.0}) {
    const auto small = bl::rate_exponents(1e-9, p);
    EXPECT_NEAR(small.ppp_lp_norm_and_testing, 1.0 / (2.0 * p), 1e-8);
    EXPECT_NEAR(small.ppp_estimation, 0.5, 1e-8);
  }
  for (double beta : {0.1, 0.5, 1.0}) {
    for (double p : {1.0, 3.0}) {
      const auto e = bl::rate_exponents(beta, p);
      for (double v : {e.ppp_estimation, e.ppp_lp_norm_and_testing, e.gwn_testing}) {
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      EXPECT_GT(e.ppp_estimation, 0.5);
      EXPECT_GT(e.ppp_lp_norm_and_testing, 1.0 / (2.0 * p));
    }
  }
  EXPECT_THROW(bl::rate_exponents(1.5, 1.0), std::invalid_argument);
  EXPECT_THROW(bl::rate_exponents(1.0, 0.5), std::invalid_argument);
  EXPECT_NEAR(bl::separation_rate(1.0, 1.0, 1024.0), std::pow(1024.0, -0.75), 1e-15);
}
