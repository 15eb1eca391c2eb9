#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "efe/diagnostics.hpp"
#include "efe/env/sandbox.hpp"
#include "efe/rng.hpp"

using namespace efe;

TEST(SampleComplexity, Examples) {
  EXPECT_EQ(sample_complexity(std::log(6.0), 0.5, 2.0, 0.05), 144u);
  EXPECT_EQ(sample_complexity(std::log(6.0), 0.5, 2.0, 2.0 * std::log(6.0) / 0.5), 1u);
  EXPECT_EQ(sample_complexity(1.0, 0.2, 4.0, 0.1), 2 * sample_complexity(1.0, 0.2, 2.0, 0.1));
  try {
    sample_complexity(1.0, 0.0, 1.0, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonpositiveDiscriminability);
  }
}

TEST(RegretBound, Constants) {
  EXPECT_NEAR(regret_constant(0.0025), 2.0 / std::log(401.0), 1e-15);
  EXPECT_NEAR(regret_constant(0.0025), 0.33367, 1e-5);
  RegretBoundTerms zero;
  zero.lipschitz = 0.0;
  zero.noise_var = 0.0025;
  zero.horizon = 50;
  zero.rho = 10.0;
  EXPECT_EQ(regret_bound(zero), 0.0);
  RegretBoundTerms b{1.0, 10.0, 1.0, 2.0, 50, 0.0025, 3.0};
  const double expect = 10.0 + (2.0 + std::sqrt(2.0 / std::numbers::pi)) * std::sqrt(regret_constant(0.0025) * 50 * 10.0) + 3.0;
  EXPECT_NEAR(regret_bound(b), expect, 1e-12);
}

TEST(Lipschitz, Examples) {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(-1.0 + 0.02 * i);
  EXPECT_NEAR(lipschitz_estimate(grid, [](double y) { return std::abs(y - 0.31); }), 1.0, 1e-12);
  EXPECT_EQ(lipschitz_estimate(grid, [](double) { return 4.0; }), 0.0);
  EXPECT_NEAR(lipschitz_estimate(grid, [](double y) { return 2.0 * std::abs(y - 0.31); }), 2.0, 1e-12);
}

TEST(GreedyInformationGain, AtLeastAnyRealizedDesign) {
  const KernelSpec k(0.08, 1.0);
  std::vector<double> grid;
  for (int i = 0; i < 200; ++i) grid.push_back(i / 199.0);
  const double rho = greedy_max_information_gain(k, grid, 0.0025, 20);
  // A clustered design gains less than the greedy spread-out one.
  std::vector<double> xs, ys, pre;
  for (int t = 0; t < 20; ++t) {
    const double x = 0.5 + 0.001 * t;
    pre.push_back(GaussianSurrogate::fit_1d(xs, ys, k, 0.0025).predict(x).variance);
    xs.push_back(x);
    ys.push_back(0.0);
  }
  EXPECT_GT(rho, total_information_gain(pre, 0.0025));
  EXPECT_NEAR(greedy_max_information_gain(k, grid, 0.0025, 1), 0.5 * std::log(401.0), 1e-12);
}

TEST(ObservationGap, TrivialCases) {
  const auto spec = env::SandboxSpec::standard();
  const auto obs = spec.model();
  const auto b = DiscreteBelief::uniform(spec.state_ids());
  const std::vector<double> zero(6, 0.0);
  const auto g = observation_gap(zero, b, 2);
  for (double d : g.delta) EXPECT_EQ(d, 0.0);
  // On actions 1..3, states of equal parity share a conditional.
  const auto g1 = observation_gap(obs, QuadraticEnergy{}, 1, b, 2);
  EXPECT_EQ(g1.delta[0], 0.0);
  EXPECT_EQ(g1.delta[4], 0.0);
  EXPECT_NE(g1.delta[1], 0.0);
  const DiscreteBelief dirac(spec.state_ids(), {0, 0, 1, 0, 0, 0});
  try {
    observation_gap(obs, QuadraticEnergy{}, 0, dirac, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateMass);
  }
}

TEST(ObservationGap, MatchesMonteCarlo) {
  const auto spec = env::SandboxSpec::standard();
  const auto obs = spec.model();
  const auto b = DiscreteBelief::uniform(spec.state_ids());
  const auto g = observation_gap(obs, QuadraticEnergy{0.25, 0.0}, 0, b, 2);
  Rng rng(31);
  constexpr int n = 1'000'000;
  for (std::size_t s : {0u, 5u}) {
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double ys = env::sandbox_observe(spec, s, 0, rng), yt = env::sandbox_observe(spec, 2, 0, rng);
      const double v = 0.25 * ys * ys - 0.25 * yt * yt;
      acc += v;
      acc2 += v * v;
    }
    const double m = acc / n, se = std::sqrt((acc2 / n - m * m) / n);
    EXPECT_NEAR(g.delta[s], m, 3.0 * se) << s;
  }
}

TEST(InstantRegret, IdentityAndDirac) {
  const auto spec = env::SandboxSpec::standard();
  const auto obs = spec.model();
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(6);
    double z = 0.0;
    for (double& v : p) z += (v = rng.uniform());
    for (double& v : p) v /= z;
    const DiscreteBelief b(spec.state_ids(), p);
    const std::size_t truth = static_cast<std::size_t>(rng.uniform() * 6);
    for (std::size_t x = 0; x < 4; ++x) {
      const auto g = observation_gap(obs, QuadraticEnergy{}, x, b, truth);
      double ident = 0.0;
      for (std::size_t s = 0; s < 6; ++s) ident += g.delta[s] * b.prob(s);
      const double r = instant_expected_regret(b, obs, QuadraticEnergy{}, x, truth);
      EXPECT_NEAR(r, ident, 1e-9);
      // r_t = A_t w_t, so r_t >= A_t w_t holds with equality.
      EXPECT_NEAR(r, g.weighted_average * error_mass(b, truth), 1e-9);
    }
  }
  const DiscreteBelief dirac(spec.state_ids(), {0, 0, 1, 0, 0, 0});
  EXPECT_EQ(instant_expected_regret(dirac, obs, QuadraticEnergy{}, 0, 2), 0.0);
}

TEST(Sandbox, DistinguishabilityPositiveOnInformativeAction) {
  const auto spec = env::SandboxSpec::standard();
  const auto obs = spec.model();
  const auto b = DiscreteBelief::uniform(spec.state_ids());
  const auto informative = observation_gap(obs, QuadraticEnergy{}, 0, b, 2);
  EXPECT_GT(informative.weighted_average, 0.0);
  for (std::size_t x = 1; x < 4; ++x) {
    EXPECT_LE(std::abs(observation_gap(obs, QuadraticEnergy{}, x, b, 2).weighted_average), 0.05);
  }
}
