#pragma once

// Exact Gaussian-process regression and the information-gain quantities
// used by the cumulative-regret analysis.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "efe/error.hpp"

namespace efe {

/// Squared-exponential kernel k(x,x') = s * exp(-|x-x'|^2 / (2 l^2)), s in (0, 1].
struct KernelSpec {
  double lengthscale = 0.08;
  double output_scale = 1.0;

  KernelSpec() = default;
  KernelSpec(double l, double s) : lengthscale(l), output_scale(s) { validate(); }

  void validate() const {
    require(lengthscale > 0.0 && std::isfinite(lengthscale), Errc::InvalidArgument, "lengthscale must be > 0");
    require(output_scale > 0.0 && output_scale <= 1.0, Errc::InvalidArgument, "output_scale must lie in (0, 1]");
  }

  template <class A, class B>
  double operator()(const A& x, const B& y) const {
    const double d2 = (x.reshaped() - y.reshaped()).squaredNorm();
    return output_scale * std::exp(-0.5 * d2 / (lengthscale * lengthscale));
  }

  double at_zero() const { return output_scale; }
};

struct PredictiveDistribution {
  double mean = 0.0;
  double variance = 0.0;

  double sd() const { return std::sqrt(variance); }
};

inline constexpr std::array<double, 3> kJitterLadder{1e-10, 1e-8, 1e-6};

/// GP posterior given (inputs, targets). Inputs are rows of an n x d matrix.
/// Immutable after construction; refits build a new value.
class GaussianSurrogate {
 public:
  static GaussianSurrogate fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets, KernelSpec kernel,
                               double noise_var) {
    kernel.validate();
    require(noise_var >= 0.0 && std::isfinite(noise_var), Errc::InvalidArgument, "noise variance must be >= 0");
    require(inputs.rows() == targets.size(), Errc::InvalidArgument, "inputs/targets length mismatch");
    GaussianSurrogate s;
    s.kernel_ = kernel;
    s.noise_var_ = noise_var;
    s.inputs_ = std::move(inputs);
    s.targets_ = std::move(targets);
    const Eigen::Index n = s.inputs_.rows();
    if (n == 0) return s;

    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        k(i, j) = kernel(s.inputs_.row(i), s.inputs_.row(j));
        k(j, i) = k(i, j);
      }
    }
    for (double jitter : kJitterLadder) {
      Eigen::MatrixXd a = k;
      a.diagonal().array() += noise_var + jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(a);
      if (llt.info() == Eigen::Success) {
        s.jitter_ = jitter;
        s.chol_ = llt.matrixL();
        s.alpha_ = llt.solve(s.targets_);
        return s;
      }
    }
    throw Error(Errc::FactorizationFailure, "kernel matrix not positive definite after jitter 1e-6");
  }

  /// Convenience for one-dimensional inputs.
  static GaussianSurrogate fit_1d(std::span<const double> xs, std::span<const double> ys, KernelSpec kernel,
                                  double noise_var) {
    Eigen::MatrixXd in(static_cast<Eigen::Index>(xs.size()), 1);
    for (std::size_t i = 0; i < xs.size(); ++i) in(static_cast<Eigen::Index>(i), 0) = xs[i];
    Eigen::VectorXd out(static_cast<Eigen::Index>(ys.size()));
    for (std::size_t i = 0; i < ys.size(); ++i) out(static_cast<Eigen::Index>(i)) = ys[i];
    return fit(std::move(in), std::move(out), kernel, noise_var);
  }

  /// Latent-function posterior at x (a row/column vector of input dim).
  template <class V>
  PredictiveDistribution predict(const V& x) const {
    const double prior = kernel_.at_zero();
    const Eigen::Index n = inputs_.rows();
    if (n == 0) return {0.0, prior};
    Eigen::VectorXd kx(n);
    for (Eigen::Index i = 0; i < n; ++i) kx(i) = kernel_(inputs_.row(i), x);
    const double mean = kx.dot(alpha_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(kx);
    const double var = std::max(0.0, prior - v.squaredNorm());
    return {mean, var};
  }

  PredictiveDistribution predict(double x) const {
    Eigen::Matrix<double, 1, 1> v;
    v(0) = x;
    return predict(v);
  }

  /// Posterior at every row of `points`, batched through one triangular solve.
  std::vector<PredictiveDistribution> predict_many(const Eigen::MatrixXd& points) const {
    const Eigen::Index m = points.rows();
    const Eigen::Index n = inputs_.rows();
    std::vector<PredictiveDistribution> out(static_cast<std::size_t>(m));
    const double prior = kernel_.at_zero();
    if (n == 0) {
      for (auto& p : out) p = {0.0, prior};
      return out;
    }
    Eigen::MatrixXd kx(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) kx(i, j) = kernel_(inputs_.row(i), points.row(j));
    }
    const Eigen::VectorXd means = kx.transpose() * alpha_;
    const Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(kx);
    for (Eigen::Index j = 0; j < m; ++j) {
      out[static_cast<std::size_t>(j)] = {means(j), std::max(0.0, prior - v.col(j).squaredNorm())};
    }
    return out;
  }

  /// Outcome predictive p(y | x, D): latent posterior plus observation noise.
  template <class V>
  PredictiveDistribution predict_outcome(const V& x) const {
    auto p = predict(x);
    p.variance += noise_var_;
    return p;
  }

  const KernelSpec& kernel() const { return kernel_; }
  double noise_var() const { return noise_var_; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return inputs_.rows(); }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }

 private:
  GaussianSurrogate() = default;

  KernelSpec kernel_;
  double noise_var_ = 0.0;
  double jitter_ = 0.0;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd alpha_;
};

/// 1/2 ln(1 + sigma_pred^2 / noise_var) for a predictive variance.
inline double point_mutual_information(double predictive_variance, double noise_var) {
  require(noise_var > 0.0, Errc::InvalidArgument, "point mutual information needs noise_var > 0");
  return 0.5 * std::log1p(std::max(0.0, predictive_variance) / noise_var);
}

template <class V>
double point_mutual_information(const GaussianSurrogate& s, const V& x) {
  return point_mutual_information(s.predict(x).variance, s.noise_var());
}

inline double point_mutual_information(const GaussianSurrogate& s, double x) {
  return point_mutual_information(s.predict(x).variance, s.noise_var());
}

/// 1/2 sum_t ln(1 + sigma^-2 sigma_{t-1}^2(x_t)) over recorded pre-query variances.
inline double total_information_gain(std::span<const double> pre_query_variances, double noise_var) {
  double total = 0.0;
  for (double v : pre_query_variances) total += point_mutual_information(v, noise_var);
  return total;
}

/// sqrt(zeta_t) with zeta_t = 2 ln(m_t / delta) and m_t = pi^2 t^2 / 6.
inline double confidence_width(std::size_t t, double delta) {
  require(t >= 1, Errc::InvalidArgument, "confidence width needs t >= 1");
  require(delta > 0.0 && delta <= 1.0, Errc::InvalidArgument, "delta must lie in (0, 1]");
  const double td = static_cast<double>(t);
  const double m_t = std::numbers::pi * std::numbers::pi * td * td / 6.0;
  return std::sqrt(2.0 * std::log(m_t / delta));
}

}  // namespace efe
