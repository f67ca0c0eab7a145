#include "whim/gaussian_process.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "whim/error.hpp"

namespace whim {

double matern52(double distance, double length_scale, double signal_std) {
  const double r = std::sqrt(5.0) * std::abs(distance) / length_scale;
  return signal_std * signal_std * (1.0 + r + r * r / 3.0) * std::exp(-r);
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

GaussianProcess::GaussianProcess(std::vector<double> x, std::vector<double> y, GpHyperparameters params,
                                 std::vector<double> extra_noise)
    : x_(std::move(x)), y_(std::move(y)), params_(params) {
  const auto n = static_cast<Eigen::Index>(x_.size());
  if (n == 0) fail(ErrorCode::InvalidArgument, "Gaussian process needs at least one observation");
  if (y_.size() != x_.size()) fail(ErrorCode::InvalidArgument, "inputs and targets differ in length");
  if (!extra_noise.empty() && extra_noise.size() != x_.size())
    fail(ErrorCode::InvalidArgument, "per-observation noise has the wrong length");
  if (!(params_.length_scale > 0.0) || !(params_.signal_std > 0.0) || !(params_.noise_variance >= 0.0))
    fail(ErrorCode::InvalidArgument, "kernel hyperparameters must be positive");

  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = matern52(x_[i] - x_[j], params_.length_scale, params_.signal_std);
    }
    k(i, i) += params_.noise_variance + (extra_noise.empty() ? 0.0 : extra_noise[static_cast<std::size_t>(i)]);
  }

  for (double jitter : {0.0, 1e-6, 1e-5, 1e-4, 1e-3}) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    llt_.compute(kj);
    if (llt_.info() == Eigen::Success) {
      jitter_ = jitter;
      alpha_ = llt_.solve(Eigen::Map<const Eigen::VectorXd>(y_.data(), n));
      return;
    }
  }
  fail(ErrorCode::NumericalFailure, "kernel matrix is not positive definite even with 1e-3 jitter");
}

Posterior GaussianProcess::predict(double x) const {
  const auto n = static_cast<Eigen::Index>(x_.size());
  Eigen::VectorXd ks(n);
  for (Eigen::Index i = 0; i < n; ++i) ks(i) = matern52(x - x_[i], params_.length_scale, params_.signal_std);
  const double mean = ks.dot(alpha_);
  const Eigen::VectorXd v = llt_.matrixL().solve(ks);
  const double var = params_.signal_std * params_.signal_std - v.squaredNorm();
  return {mean, std::sqrt(std::max(var, 0.0))};
}

double GaussianProcess::log_marginal_likelihood() const {
  const auto n = static_cast<Eigen::Index>(x_.size());
  const Eigen::Map<const Eigen::VectorXd> y(y_.data(), n);
  const double log_det = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  return -0.5 * y.dot(alpha_) - 0.5 * log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

double expected_improvement(double mu, double sigma, double f_best, double xi) {
  const double improvement = f_best - mu - xi;
  if (sigma < 1e-12) return std::max(0.0, improvement);
  const double z = improvement / sigma;
  return std::max(0.0, improvement * normal_cdf(z) + sigma * normal_pdf(z));
}

double expected_improvement(const GaussianProcess& model, double x, double f_best, double xi) {
  const Posterior p = model.predict(x);
  return expected_improvement(p.mean, p.std, f_best, xi);
}

GaussianProcess fit_gaussian_process(std::span<const double> x, std::span<const double> y,
                                     std::span<const double> extra_noise, const HyperparameterGrid& grid) {
  std::optional<GaussianProcess> best;
  double best_lml = -std::numeric_limits<double>::infinity();
  const std::vector<double> xs(x.begin(), x.end());
  const std::vector<double> ys(y.begin(), y.end());
  const std::vector<double> noise(extra_noise.begin(), extra_noise.end());
  for (double length_scale : grid.length_scales) {
    for (double noise_variance : grid.noise_variances) {
      try {
        GaussianProcess gp(xs, ys, {length_scale, grid.signal_std, noise_variance}, noise);
        const double lml = gp.log_marginal_likelihood();
        if (lml > best_lml) {
          best_lml = lml;
          best.emplace(std::move(gp));
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NumericalFailure) throw;
      }
    }
  }
  if (!best) fail(ErrorCode::NumericalFailure, "no hyperparameter candidate yields a usable kernel matrix");
  return std::move(*best);
}

}  // namespace whim
