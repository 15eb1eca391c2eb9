#include <gtest/gtest.h>

#include <cmath>

#include "efe/energy.hpp"
#include "efe/rng.hpp"

using namespace efe;

TEST(Quadratic, Examples) {
  EXPECT_EQ(quadratic_energy(1.5, 0.25, 1.5), 0.0);
  EXPECT_DOUBLE_EQ(quadratic_energy(2.0, 0.25, 0.0), 1.0);
  EXPECT_NEAR(expected_quadratic({1.0, 0.04}, 0.2, 0.0), 0.208, 1e-15);
  EXPECT_NEAR(expected_quadratic({0.7, 0.3}, 0.25, 0.7), 0.25 * 0.3, 1e-15);
}

TEST(Saturation, GaussianExamples) {
  EXPECT_EQ(expected_saturation_indicator(PredictiveDistribution{5.0, 4.0}, INFINITY), 0.0);
  EXPECT_NEAR(expected_saturation_indicator(PredictiveDistribution{60.0, 9.0}, 60.0), 0.5, 1e-15);
}

TEST(Saturation, PoissonMixtureMatchesSummation) {
  const auto obs = DiscreteObservationModel::poisson(2, 1, {60.0, 20.0});
  const DiscreteBelief b({"a", "b"}, {0.7, 0.3});
  auto tail = [](double lambda, int k) {
    long double below = 0.0L;
    for (int y = 0; y <= k; ++y) {
      below += std::exp(y * std::log(static_cast<long double>(lambda)) - lambda - std::lgamma(y + 1.0L));
    }
    return static_cast<double>(1.0L - below);
  };
  EXPECT_NEAR(expected_saturation_indicator(b, obs, 0, 60.0), 0.7 * tail(60.0, 60) + 0.3 * tail(20.0, 60), 1e-12);
  EXPECT_NEAR(stats::poisson_upper_tail(60.0, 60.0), tail(60.0, 60), 1e-12);
}

TEST(BiasedRegret, Examples) {
  EXPECT_EQ(biased_regret(0.7, 0.7, BiasSchedule::aligned(), 3.0), 0.0);
  EXPECT_DOUBLE_EQ(biased_regret(0.5, 1.0, BiasSchedule::constant(2.0), 1.0), -0.5);
  const auto slow = BiasSchedule::named("slow");
  EXPECT_EQ(slow.at(0.0), 2.0);
  EXPECT_NEAR(slow.at(10.0), 2.0 * std::exp(-0.2), 1e-15);
  EXPECT_NEAR(BiasSchedule::named("fast").at(4.0), 2.0 * std::exp(-1.0), 1e-15);
  EXPECT_EQ(BiasSchedule::named("constant").at(100.0), 2.0);
  EXPECT_THROW(BiasSchedule::named("sideways"), Error);
}

TEST(BiasedRegret, AlignedExpectation) {
  const PredictiveDistribution p{1.2, 0.09};
  EXPECT_NEAR(expected_biased_regret(p, 1.2, BiasSchedule::aligned(), 1.0), 0.3 * stats::kSqrt2OverPi, 1e-15);
}

TEST(BiasedRegret, MonotoneInBias) {
  const PredictiveDistribution p{2.0, 0.25};
  double last = -INFINITY;
  for (double b = 0.0; b <= 5.0; b += 0.5) {
    const double v = expected_biased_regret(p, 0.0, BiasSchedule::constant(b), 1.0);
    EXPECT_GT(v, last);
    last = v;
  }
}

TEST(BiasedRegret, AlignmentBoundAndDecay) {
  const auto fast = BiasSchedule::named("fast");
  for (double t = 0.0; t < 50.0; t += 1.0) {
    EXPECT_LE(fast.at(t + 1.0), fast.at(t));
    for (double y = -1.0; y <= 1.0; y += 0.1) {
      const double gap = std::abs(biased_regret(y, 0.3, fast, t) - std::abs(y - 0.3));
      EXPECT_LE(gap, alignment_bound(fast, t, 2.0) + 1e-15);
    }
  }
}

TEST(ExpectedEnergy, ClosedFormsMatchQuadrature) {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const double mu = rng.normal(0.0, 2.0), sd = 0.05 + 2.0 * rng.uniform(), t = 1.0 + 50.0 * rng.uniform();
    const PredictiveDistribution pred{mu, sd * sd};
    const stats::GaussianParams g{mu, sd};
    const QuadraticEnergy q{0.15 + 0.2 * rng.uniform(), rng.normal()};
    EXPECT_NEAR(expected_energy(q, pred, t),
                stats::gaussian_expectation(g, [&](double y) { return quadratic_energy(y, q.a, q.c); }), 1e-9);
    // The kink in |y - y*| defeats Gauss-Hermite, so the bias part (linear)
    // is checked by quadrature and the absolute part by the 1-D integral
    // split at the kink.
    const BiasedRegretEnergy br{rng.normal(), BiasSchedule::exponential(2.0, 0.02)};
    const double lin = stats::gaussian_expectation(g, [&](double y) { return br.schedule.at(t) * (y - br.y_star); });
    EXPECT_NEAR(expected_energy(br, pred, t) - stats::shifted_abs_expectation(g, br.y_star), lin, 1e-9);
  }
}

TEST(ExpectedEnergy, ShiftedAbsMatchesSplitIntegral) {
  // Composite Simpson on each side of the kink, +-12 sd.
  auto integral = [](double mu, double sd, double c) {
    auto piece = [&](double a, double b) {
      constexpr int n = 20000;
      const double h = (b - a) / n;
      double acc = 0.0;
      for (int i = 0; i <= n; ++i) {
        const double y = a + i * h;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * std::abs(y - c) * stats::normal_pdf((y - mu) / sd) / sd;
      }
      return acc * h / 3.0;
    };
    const double lo = mu - 12.0 * sd, hi = mu + 12.0 * sd;
    if (c <= lo || c >= hi) return piece(lo, hi);
    return piece(lo, c) + piece(c, hi);
  };
  Rng rng(5);
  for (int i = 0; i < 40; ++i) {
    const double mu = rng.normal(), sd = 0.1 + rng.uniform(), c = rng.normal();
    EXPECT_NEAR(stats::shifted_abs_expectation({mu, sd}, c), integral(mu, sd, c), 1e-9);
  }
}

TEST(ExpectedEnergy, NonnegativeExceptBiased) {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    const PredictiveDistribution p{rng.normal(0.0, 3.0), 0.01 + rng.uniform()};
    EXPECT_GE(expected_energy(QuadraticEnergy{}, p, 1.0), 0.0);
    EXPECT_GE(expected_energy(SaturationEnergy{0.5}, p, 1.0), 0.0);
    EXPECT_GE(expected_energy(BiasedRegretEnergy{0.2, BiasSchedule::aligned()}, p, 1.0), 0.0);
  }
}

TEST(ConditionalEnergy, TableMatchesDirect) {
  const auto obs = DiscreteObservationModel::gaussian(2, 2, {0.0, 1.0, -1.0, 2.0}, 0.2);
  const EnergySpec e = QuadraticEnergy{0.25, 0.0};
  const ConditionalEnergyTable table(e, obs);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t x = 0; x < 2; ++x) {
      EXPECT_NEAR(table(s, x), 0.25 * (std::pow(obs.location(s, x), 2) + 0.04), 1e-15);
    }
  }
}
