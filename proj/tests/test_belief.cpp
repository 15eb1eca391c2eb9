#include <gtest/gtest.h>

#include <cmath>

#include "efe/belief.hpp"
#include "efe/env/sandbox.hpp"
#include "efe/rng.hpp"

using namespace efe;

namespace {

std::vector<std::string> ids(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("h" + std::to_string(i));
  return out;
}

// Update with explicit likelihood values.
DiscreteBelief update_with(const DiscreteBelief& b, std::vector<double> lik) {
  std::vector<double> ll;
  for (double l : lik) ll.push_back(std::log(l));
  return b.reweighted(ll);
}

// I(s; y) = E_{s, y}[log p(y|s) - log p(y)] by simulation.
std::pair<double, double> mc_information(const DiscreteBelief& b, const DiscreteObservationModel& obs, std::size_t x,
                                         int n, std::uint64_t seed) {
  Rng rng(seed);
  double acc = 0.0, acc2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform(), c = 0.0;
    std::size_t s = 0;
    for (; s + 1 < b.size(); ++s) {
      c += b.prob(s);
      if (u < c) break;
    }
    const double y = obs.location(s, x) + obs.sd() * rng.normal();
    const auto ll = obs.log_likelihoods(x, y);
    double mix = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) mix += b.prob(k) * std::exp(ll[k]);
    const double v = ll[s] - std::log(mix);
    acc += v;
    acc2 += v * v;
  }
  const double m = acc / n;
  return {m, std::sqrt((acc2 / n - m * m) / n)};
}

}  // namespace

TEST(Entropy, Examples) {
  EXPECT_NEAR(entropy(DiscreteBelief::uniform(ids(6))), std::log(6.0), 1e-15);
  EXPECT_EQ(entropy(DiscreteBelief(ids(3), {0.0, 1.0, 0.0})), 0.0);
  EXPECT_NEAR(entropy(DiscreteBelief(ids(2), {0.25, 0.75})), -0.25 * std::log(0.25) - 0.75 * std::log(0.75), 1e-15);
}

TEST(BayesUpdate, Examples) {
  auto b = update_with(DiscreteBelief(ids(2), {0.5, 0.5}), {0.8, 0.2});
  EXPECT_NEAR(b.prob(0), 0.8, 1e-15);
  b = update_with(DiscreteBelief(ids(3), {0.2, 0.3, 0.5}), {1.0, 2.0, 4.0});
  EXPECT_NEAR(b.prob(0), 0.2 / 2.8, 1e-15);
  EXPECT_NEAR(b.prob(1), 0.6 / 2.8, 1e-15);
  EXPECT_NEAR(b.prob(2), 2.0 / 2.8, 1e-15);
  const DiscreteBelief p(ids(3), {0.1, 0.6, 0.3});
  b = update_with(p, {0.4, 0.4, 0.4});
  for (std::size_t s = 0; s < 3; ++s) EXPECT_NEAR(b.prob(s), p.prob(s), 1e-15);
}

TEST(BayesUpdate, AllZeroLikelihoodThrows) {
  const auto obs = DiscreteObservationModel::poisson(2, 1, {0.0, 0.0});
  try {
    bayes_update(DiscreteBelief::uniform(ids(2)), obs, 0, 3.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::AllZeroLikelihood);
  }
}

TEST(BayesUpdate, SupportNeverGrowsAndDiracIsFixed) {
  const auto obs = env::SandboxSpec::standard().model();
  const DiscreteBelief dirac(env::SandboxSpec::standard().state_ids(), {0, 0, 1, 0, 0, 0});
  Rng rng(5);
  auto b = dirac;
  for (int i = 0; i < 20; ++i) b = bayes_update(b, obs, 0, rng.normal(0.0, 2.0));
  for (std::size_t s = 0; s < 6; ++s) EXPECT_EQ(b.prob(s), dirac.prob(s));
}

TEST(BayesUpdate, OrderIndependent) {
  const auto spec = env::SandboxSpec::standard();
  const auto obs = spec.model();
  Rng rng(9);
  std::vector<std::pair<std::size_t, double>> data;
  for (int i = 0; i < 12; ++i) data.push_back({static_cast<std::size_t>(i % 4), rng.normal(0.0, 1.0)});
  auto fwd = DiscreteBelief::uniform(spec.state_ids());
  for (auto [x, y] : data) fwd = bayes_update(fwd, obs, x, y);
  auto rev = DiscreteBelief::uniform(spec.state_ids());
  for (auto it = data.rbegin(); it != data.rend(); ++it) rev = bayes_update(rev, obs, it->first, it->second);
  // Batch: one update with summed log-likelihoods.
  std::vector<double> total(6, 0.0);
  for (auto [x, y] : data) {
    const auto ll = obs.log_likelihoods(x, y);
    for (std::size_t s = 0; s < 6; ++s) total[s] += ll[s];
  }
  const auto batch = DiscreteBelief::uniform(spec.state_ids()).reweighted(total);
  double sum = 0.0;
  for (std::size_t s = 0; s < 6; ++s) {
    EXPECT_NEAR(fwd.prob(s), rev.prob(s), 1e-10);
    EXPECT_NEAR(fwd.prob(s), batch.prob(s), 1e-10);
    sum += fwd.prob(s);
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(ErrorMass, Examples) {
  EXPECT_EQ(error_mass(DiscreteBelief(ids(3), {1.0, 0.0, 0.0}), "h0"), 0.0);
  EXPECT_NEAR(error_mass(DiscreteBelief::uniform(ids(6)), "h4"), 5.0 / 6.0, 1e-15);
  EXPECT_NEAR(error_mass(DiscreteBelief(ids(3), {0.7, 0.2, 0.1}), "h0"), 0.3, 1e-15);
  try {
    error_mass(DiscreteBelief::uniform(ids(2)), "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::UnknownHypothesis);
  }
}

TEST(ErrorMass, SupermartingaleOnAverage) {
  const auto spec = env::SandboxSpec::standard();
  const auto obs = spec.model();
  const auto prior = DiscreteBelief::uniform(spec.state_ids());
  Rng rng(17);
  double acc = 0.0;
  constexpr int n = 2000;
  for (int i = 0; i < n; ++i) acc += error_mass(bayes_update(prior, obs, 0, sandbox_observe(spec, 2, 0, rng)), 2);
  EXPECT_LE(acc / n, error_mass(prior, 2));
}

TEST(MutualInformation, IdenticalConditionalsGiveZero) {
  const auto obs = DiscreteObservationModel::gaussian(2, 1, {0.3, 0.3}, 0.2);
  EXPECT_NEAR(discrete_mutual_information(DiscreteBelief::uniform(ids(2)), obs, 0), 0.0, 1e-12);
  const auto pois = DiscreteObservationModel::poisson(2, 1, {7.0, 7.0});
  EXPECT_NEAR(discrete_mutual_information(DiscreteBelief::uniform(ids(2)), pois, 0), 0.0, 1e-12);
}

TEST(MutualInformation, SeparableLimit) {
  const auto obs = DiscreteObservationModel::gaussian(2, 1, {-10.0, 10.0}, 0.2);
  EXPECT_NEAR(discrete_mutual_information(DiscreteBelief::uniform(ids(2)), obs, 0), std::log(2.0), 1e-4);
}

TEST(MutualInformation, SandboxMatchesMonteCarlo) {
  const auto spec = env::SandboxSpec::standard();
  const auto obs = spec.model();
  const auto b = DiscreteBelief::uniform(spec.state_ids());
  const auto [mc, se] = mc_information(b, obs, 0, 1'000'000, 23);
  EXPECT_NEAR(discrete_mutual_information(b, obs, 0), mc, 3.0 * se);
}

TEST(MutualInformation, PoissonMatchesDirectSum) {
  const auto obs = DiscreteObservationModel::poisson(3, 1, {2.0, 9.0, 30.0});
  const DiscreteBelief b(ids(3), {0.2, 0.5, 0.3});
  double mi = 0.0;
  for (int y = 0; y < 200; ++y) {
    double mix = 0.0;
    std::vector<double> p(3);
    for (std::size_t s = 0; s < 3; ++s) {
      p[s] = std::exp(stats::poisson_log_pmf(y, obs.location(s, 0)));
      mix += b.prob(s) * p[s];
    }
    for (std::size_t s = 0; s < 3; ++s) {
      if (p[s] > 0.0) mi += b.prob(s) * p[s] * std::log(p[s] / mix);
    }
  }
  EXPECT_NEAR(discrete_mutual_information(b, obs, 0), mi, 1e-9);
}

TEST(MutualInformation, BoundedByEntropy) {
  const auto spec = env::SandboxSpec::standard(0.05);
  const auto obs = spec.model();
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(6);
    double z = 0.0;
    for (double& v : p) z += (v = rng.uniform() + 1e-3);
    for (double& v : p) v /= z;
    const DiscreteBelief b(spec.state_ids(), p);
    for (std::size_t x = 0; x < 4; ++x) {
      const double mi = discrete_mutual_information(b, obs, x);
      EXPECT_GE(mi, 0.0);
      EXPECT_LE(mi, entropy(b) + 1e-9);
    }
  }
}

TEST(ObservationModel, ConditionalsNormalized) {
  const auto obs = DiscreteObservationModel::poisson(3, 1, {0.5, 40.0, 250.0});
  for (std::size_t s = 0; s < 3; ++s) EXPECT_GE(obs.window(s, 0).mass(), 1.0 - 1e-10);
}

TEST(DiscreteBeliefType, RejectsBadInput) {
  EXPECT_THROW(DiscreteBelief(ids(2), {0.5, 0.6}), Error);
  EXPECT_THROW(DiscreteBelief({"a", "a"}, {0.5, 0.5}), Error);
  EXPECT_THROW(DiscreteBelief(ids(2), {-0.1, 1.1}), Error);
}
