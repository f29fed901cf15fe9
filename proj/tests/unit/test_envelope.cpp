#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "boundary_lab/bounds.hpp"
#include "boundary_lab/envelope.hpp"

namespace bl = boundary_lab;

namespace {

bl::PppSample make_sample(std::vector<bl::Point> pts, long n = 1, double cap = 10.0) {
  bl::PppSample s;
  s.points = std::move(pts);
  s.n = n;
  s.y_cap = cap;
  return s;
}

}  // namespace

TEST(EnvelopeEvaluate, Examples) {
  const bl::HolderClass lip(1.0, 1.0);
  EXPECT_DOUBLE_EQ(bl::envelope_evaluate(bl::Envelope(make_sample({{0.5, 1.0}}), lip), 0.0), 1.5);
  EXPECT_NEAR(
      bl::envelope_evaluate(bl::Envelope(make_sample({{0.2, 0.5}, {0.8, 0.3}}), lip), 0.5), 0.6,
      1e-15);
  EXPECT_DOUBLE_EQ(
      bl::envelope_evaluate(bl::Envelope(make_sample({{0.5, 1.0}}), bl::HolderClass(0.5, 2.0)), 0.25),
      2.0);
}

TEST(EnvelopeEvaluate, Errors) {
  const bl::HolderClass lip(1.0, 1.0);
  EXPECT_THROW(bl::Envelope(make_sample({}), lip), bl::NoObservations);
  const bl::Envelope env(make_sample({{0.5, 1.0}}), lip);
  EXPECT_THROW(bl::envelope_evaluate(env, 1.5), std::invalid_argument);
  EXPECT_THROW(bl::envelope_evaluate(env, -0.1), std::invalid_argument);
}

TEST(Envelope, MatchesDirectMinimum) {
  for (double beta : {0.3, 0.7, 1.0}) {
    const bl::HolderClass h(beta, 0.8);
    const bl::ModelConfig cfg(400, bl::BoundaryFunction::bump_sum({1, 0, 1, 1}, 0.25, h), h);
    const bl::PppSampler sampler(cfg, bl::default_cap(cfg));
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto s = sampler.sample(seed);
      const bl::Envelope env(s, h);
      bl::CounterRng rng(seed + 1000);
      for (int i = 0; i < 200; ++i) {
        const double x = rng.uniform();
        ASSERT_EQ(env(x), bl::envelope_evaluate_direct(s.points, h, x)) << beta << " " << x;
      }
      const auto grid = env.evaluate_grid(129);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        ASSERT_EQ(grid[i], bl::envelope_evaluate_direct(s.points, h, bl::grid_node(i, 129)));
      }
    }
  }
}

TEST(Envelope, IndicatorsMatchDirectEvaluation) {
  const bl::HolderClass h(0.6, 1.0);
  const bl::ModelConfig cfg(30, bl::BoundaryFunction::scaled_power(h), h);
  const bl::PppSampler sampler(cfg, bl::default_cap(cfg));
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    const auto s = sampler.sample(seed);
    if (s.empty()) continue;
    const bl::Envelope env(s, h);
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double direct = bl::envelope_evaluate_direct(s.points, h, s.points[j].x);
      const bool attains = std::abs(direct - s.points[j].y) <= 1e-12;
      ASSERT_EQ(env.on_envelope(j), attains) << "seed " << seed << " j " << j;
    }
  }
}

TEST(Envelope, SinglePointIsOnEnvelope) {
  const bl::Envelope env(make_sample({{0.3, 2.0}}), bl::HolderClass(1.0, 1.0));
  EXPECT_EQ(env.count_on_envelope(), 1u);
  EXPECT_TRUE(env.on_envelope(0));
}

TEST(Envelope, TiedPointsBothCount) {
  const bl::Envelope env(make_sample({{0.3, 2.0}, {0.3, 2.0}, {0.3, 2.5}}), bl::HolderClass(1.0, 1.0));
  EXPECT_TRUE(env.on_envelope(0));
  EXPECT_TRUE(env.on_envelope(1));
  EXPECT_FALSE(env.on_envelope(2));
}

TEST(Envelope, UpperBoundSelfConsistencyAndHolder) {
  for (double beta : {0.4, 1.0}) {
    const bl::HolderClass h(beta, 1.0);
    const std::vector<bl::BoundaryFunction> curves = {
        bl::BoundaryFunction::constant(0.0, h), bl::BoundaryFunction::scaled_power(h),
        bl::BoundaryFunction::bump_sum({0, 1, 1}, 0.25, h)};
    for (const auto& g : curves) {
      const bl::ModelConfig cfg(200, g, h);
      const bl::PppSampler sampler(cfg, bl::default_cap(cfg));
      for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto s = sampler.sample(seed);
        const bl::Envelope env(s, h);
        const auto ghat = env.evaluate_grid(257);
        for (std::size_t i = 0; i < ghat.size(); ++i) {
          ASSERT_GE(ghat[i], g(bl::grid_node(i, 257)));
        }
        std::size_t argmin = 0;
        for (std::size_t j = 0; j < s.size(); ++j) {
          ASSERT_LE(env(s.points[j].x), s.points[j].y);
          if (s.points[j].y < s.points[argmin].y) argmin = j;
        }
        EXPECT_EQ(env(s.points[argmin].x), s.points[argmin].y);
        EXPECT_TRUE(bl::holder_check(env, h, 129));
      }
    }
  }
}

TEST(EnvelopeExceedance, Examples) {
  const bl::HolderClass lip(1.0, 1.0);
  const bl::ModelConfig cfg(50, bl::BoundaryFunction::constant(0.0, lip), lip);
  const auto est = bl::envelope_exceedance(cfg, 0.5, {0.0, 0.3, 10.0}, 4000, 17);
  ASSERT_EQ(est.size(), 3u);
  EXPECT_EQ(est[0].p_hat, 1.0);
  const double bound = std::exp(-50.0 * 0.5 * 0.09 / 2.0);
  EXPECT_NEAR(bl::deviation_bound({lip, 50.0, 0.3}), 0.3247, 1e-4);
  EXPECT_LE(est[1].p_hat, bound + 3.0 * est[1].stderr);
  EXPECT_EQ(est[2].p_hat, 0.0);
}

TEST(EnvelopeExceedance, UnsortedGridKeepsOrder) {
  const bl::HolderClass lip(1.0, 1.0);
  const bl::ModelConfig cfg(50, bl::BoundaryFunction::constant(0.0, lip), lip);
  const auto a = bl::envelope_exceedance(cfg, 0.2, {0.4, 0.1, 0.2}, 500, 3);
  const auto b = bl::envelope_exceedance(cfg, 0.2, {0.1, 0.2, 0.4}, 500, 3);
  EXPECT_EQ(a[0].p_hat, b[2].p_hat);
  EXPECT_EQ(a[1].p_hat, b[0].p_hat);
  EXPECT_EQ(a[2].p_hat, b[1].p_hat);
  EXPECT_GE(b[0].p_hat, b[1].p_hat);
  EXPECT_GE(b[1].p_hat, b[2].p_hat);
}

TEST(EnvelopeExceedance, TableAgreesWithDirectCounting) {
  const bl::HolderClass h(0.5, 1.0);
  const bl::ModelConfig cfg(40, bl::BoundaryFunction::scaled_power(h), h);
  const std::vector<double> xs = {0.0, 0.5, 1.0};
  const std::vector<double> us = {0.0, 0.05, 0.1, 0.3};
  const long reps = 300;
  const auto table = bl::exceedance_table(cfg, xs, us, reps, 5, 1);
  const bl::PppSampler sampler(cfg, bl::default_cap(cfg));
  std::vector<double> counts(xs.size() * us.size(), 0.0);
  long valid = 0;
  for (long r = 0; r < reps; ++r) {
    const auto s = sampler.sample(bl::derive_stream(5, {40, static_cast<std::uint64_t>(r)}));
    if (s.empty() || !s.cap_valid) continue;
    ++valid;
    const bl::Envelope env(s, h);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = 0; j < us.size(); ++j) {
        counts[i * us.size() + j] += env(xs[i]) - cfg.boundary(xs[i]) >= us[j] ? 1.0 : 0.0;
      }
    }
  }
  ASSERT_EQ(table.reps, valid);
  for (std::size_t k = 0; k < counts.size(); ++k) EXPECT_EQ(table.p_hat[k], counts[k] / valid);
}
