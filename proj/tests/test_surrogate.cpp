#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "efe/rng.hpp"
#include "efe/surrogate.hpp"

using namespace efe;

namespace {

const KernelSpec kBandit(0.08, 1.0);

Eigen::MatrixXd gram(const KernelSpec& k, const std::vector<double>& xs) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = k.output_scale * std::exp(-0.5 * std::pow(xs[i] - xs[j], 2) / (k.lengthscale * k.lengthscale));
    }
  }
  return m;
}

}  // namespace

TEST(Kernel, BoundedAndSymmetric) {
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    Eigen::Vector3d a(rng.uniform(), rng.uniform(), rng.uniform()), b(rng.uniform(), rng.uniform(), rng.uniform());
    EXPECT_LE(kBandit(a, b), 1.0);
    EXPECT_EQ(kBandit(a, b), kBandit(b, a));
  }
  EXPECT_THROW(KernelSpec(0.1, 1.5), Error);
  EXPECT_THROW(KernelSpec(-1.0, 1.0), Error);
}

TEST(Fit, EmptyIsPrior) {
  const auto gp = GaussianSurrogate::fit_1d({}, {}, kBandit, 0.0025);
  const auto p = gp.predict(0.3);
  EXPECT_EQ(p.mean, 0.0);
  EXPECT_EQ(p.variance, 1.0);
}

TEST(Fit, OnePointClosedForm) {
  const std::vector<double> xs{0.4}, ys{1.3};
  const double noise = 0.0025;
  const auto gp = GaussianSurrogate::fit_1d(xs, ys, kBandit, noise);
  const auto p = gp.predict(0.4);
  EXPECT_NEAR(p.mean, 1.3 / (1.0 + noise), 1e-9);
  EXPECT_NEAR(p.variance, 1.0 - 1.0 / (1.0 + noise), 1e-9);
}

TEST(Fit, DuplicateInputs) {
  const std::vector<double> xs{0.5, 0.5}, ys{1.0, 2.0};
  const auto gp = GaussianSurrogate::fit_1d(xs, ys, kBandit, 0.01);
  const double m = gp.predict(0.5).mean;
  EXPECT_GT(m, 1.0);
  EXPECT_LT(m, 2.0);
  // 2x2 closed form: mean = k^T (K + s I)^-1 y with K all ones.
  EXPECT_NEAR(m, 3.0 / (2.0 + 0.01), 1e-8);
}

TEST(Predict, RevertsToPriorFarAway) {
  const std::vector<double> xs{0.1, 0.2}, ys{0.5, -0.3};
  const auto gp = GaussianSurrogate::fit_1d(xs, ys, kBandit, 0.0025);
  const auto p = gp.predict(0.2 + 10.0 * 0.08 + 0.1);
  EXPECT_NEAR(p.mean, 0.0, 1e-6);
  EXPECT_NEAR(p.variance, 1.0, 1e-6);
}

TEST(Predict, InterpolatesWithTinyNoise) {
  const std::vector<double> xs{0.1, 0.35, 0.8}, ys{0.5, -0.3, 0.9};
  const auto gp = GaussianSurrogate::fit_1d(xs, ys, kBandit, 1e-12);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(gp.predict(xs[i]).mean, ys[i], 1e-6);
}

TEST(Predict, MatchesDenseSolve) {
  const std::vector<double> xs{0.1, 0.15, 0.3}, ys{0.2, 0.4, -0.1};
  const double noise = 0.0025;
  const auto gp = GaussianSurrogate::fit_1d(xs, ys, kBandit, noise);
  Eigen::MatrixXd a = gram(kBandit, xs);
  a.diagonal().array() += noise + gp.jitter();
  const Eigen::Vector3d y(ys[0], ys[1], ys[2]);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  for (double x = 0.0; x <= 0.5; x += 0.01) {
    Eigen::Vector3d k;
    for (int i = 0; i < 3; ++i) k(i) = std::exp(-0.5 * std::pow(x - xs[i], 2) / (0.08 * 0.08));
    const auto p = gp.predict(x);
    EXPECT_NEAR(p.mean, k.dot(lu.solve(y)), 1e-10);
    EXPECT_NEAR(p.variance, 1.0 - k.dot(lu.solve(k)), 1e-10);
  }
}

TEST(Predict, BatchMatchesSingle) {
  Rng rng(4);
  std::vector<double> xs, ys;
  for (int i = 0; i < 15; ++i) {
    xs.push_back(rng.uniform());
    ys.push_back(rng.normal());
  }
  const auto gp = GaussianSurrogate::fit_1d(xs, ys, kBandit, 0.0025);
  Eigen::MatrixXd pts(50, 1);
  for (int i = 0; i < 50; ++i) pts(i, 0) = i / 49.0;
  const auto many = gp.predict_many(pts);
  for (int i = 0; i < 50; ++i) {
    const auto one = gp.predict(i / 49.0);
    EXPECT_NEAR(many[i].mean, one.mean, 1e-12);
    EXPECT_NEAR(many[i].variance, one.variance, 1e-12);
  }
}

TEST(Predict, VarianceBoundedAndNonincreasing) {
  Rng rng(8);
  std::vector<double> xs, ys;
  std::vector<double> prev(101, 1.0);
  for (int n = 0; n < 25; ++n) {
    xs.push_back(rng.uniform());
    ys.push_back(rng.normal());
    const auto gp = GaussianSurrogate::fit_1d(xs, ys, kBandit, 0.0025);
    for (int i = 0; i <= 100; ++i) {
      const double v = gp.predict(i / 100.0).variance;
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-8);
      EXPECT_LE(v, prev[i] + 1e-9);
      prev[i] = v;
    }
  }
}

TEST(Fit, RefitIsBitIdentical) {
  const std::vector<double> xs{0.1, 0.4, 0.45}, ys{1.0, 0.2, 0.3};
  const auto a = GaussianSurrogate::fit_1d(xs, ys, kBandit, 0.0025);
  const auto b = GaussianSurrogate::fit_1d(xs, ys, kBandit, 0.0025);
  for (double x = 0.0; x <= 1.0; x += 0.05) {
    EXPECT_EQ(a.predict(x).mean, b.predict(x).mean);
    EXPECT_EQ(a.predict(x).variance, b.predict(x).variance);
  }
}

TEST(PointMI, Examples) {
  EXPECT_EQ(point_mutual_information(0.0, 0.0025), 0.0);
  EXPECT_NEAR(point_mutual_information(1.0, 0.0025), 0.5 * std::log(401.0), 1e-12);
  EXPECT_NEAR(point_mutual_information(1.0, 0.0025), 2.99698, 1e-5);
  double last = -1.0;
  for (double v = 0.0; v <= 1.0; v += 0.01) {
    const double mi = point_mutual_information(v, 0.0025);
    EXPECT_GT(mi, last);
    EXPECT_LE(mi, 0.5 * std::log1p(1.0 / 0.0025) + 1e-12);
    last = mi;
  }
}

TEST(TotalInformationGain, Examples) {
  EXPECT_EQ(total_information_gain({}, 0.0025), 0.0);
  const std::vector<double> one{1.0};
  EXPECT_NEAR(total_information_gain(one, 0.0025), 2.99698, 1e-5);
}

TEST(TotalInformationGain, MatchesLogDet) {
  Rng rng(12);
  const double noise = 0.0025;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> xs, ys, pre;
    for (int t = 0; t < 5; ++t) {
      const double x = rng.uniform();
      pre.push_back(GaussianSurrogate::fit_1d(xs, ys, kBandit, noise).predict(x).variance);
      xs.push_back(x);
      ys.push_back(rng.normal());
    }
    Eigen::MatrixXd a = gram(kBandit, xs) / noise;
    a.diagonal().array() += 1.0;
    const double logdet = 0.5 * std::log(a.determinant());
    // The fits add 1e-10 jitter to the noise, far below this tolerance.
    EXPECT_NEAR(total_information_gain(pre, noise), logdet, 1e-6);
  }
}

TEST(ConfidenceWidth, Values) {
  // sqrt(2 ln(pi^2 / 6)) = 0.997697...
  EXPECT_NEAR(confidence_width(1, 1.0), std::sqrt(2.0 * std::log(std::numbers::pi * std::numbers::pi / 6.0)), 1e-15);
  EXPECT_NEAR(confidence_width(1, 1.0), 0.997697, 1e-6);
  EXPECT_NEAR(confidence_width(10, 0.05),
              std::sqrt(2.0 * std::log(100.0 * std::numbers::pi * std::numbers::pi / (6.0 * 0.05))), 1e-15);
  for (std::size_t t = 1; t < 100; ++t) EXPECT_LE(confidence_width(t, 0.05), confidence_width(t + 1, 0.05));
  EXPECT_THROW(confidence_width(0, 0.05), Error);
}
