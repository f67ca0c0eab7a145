#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace whim {

/// Matern-5/2 covariance with length-scale and signal std, plus the
/// homoscedastic observation noise variance.
struct GpHyperparameters {
  double length_scale = 0.2;
  double signal_std = 1.0;
  double noise_variance = 1e-2;
};

double matern52(double distance, double length_scale, double signal_std);

struct Posterior {
  double mean = 0.0;
  double std = 0.0;
};

/// Zero-mean 1-D Gaussian-process regression. Targets are used as given;
/// callers standardize them. The Cholesky factor is computed once; if it
/// fails, a diagonal jitter starting at 1e-6 is escalated tenfold up to 1e-3.
class GaussianProcess {
 public:
  /// extra_noise, when non-empty, adds a per-observation variance to the
  /// diagonal on top of noise_variance.
  GaussianProcess(std::vector<double> x, std::vector<double> y, GpHyperparameters params,
                  std::vector<double> extra_noise = {});

  Posterior predict(double x) const;
  double log_marginal_likelihood() const;

  const GpHyperparameters& hyperparameters() const noexcept { return params_; }
  double jitter() const noexcept { return jitter_; }
  std::span<const double> inputs() const noexcept { return x_; }
  std::span<const double> targets() const noexcept { return y_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  GpHyperparameters params_;
  double jitter_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
};

/// Minimization-form EI at a posterior (mu, sigma).
double expected_improvement(double mu, double sigma, double f_best, double xi);
double expected_improvement(const GaussianProcess& model, double x, double f_best, double xi);

double normal_pdf(double z);
double normal_cdf(double z);

/// Hyperparameter grid searched by maximum log marginal likelihood.
struct HyperparameterGrid {
  std::vector<double> length_scales{0.05, 0.1, 0.2, 0.5, 1.0};
  std::vector<double> noise_variances{1e-4, 1e-2, 1e-1};
  double signal_std = 1.0;
};

/// Fits on the grid and returns the best model. Candidates whose kernel
/// matrix cannot be factorized are skipped; NumericalFailure if none can.
GaussianProcess fit_gaussian_process(std::span<const double> x, std::span<const double> y,
                                     std::span<const double> extra_noise = {},
                                     const HyperparameterGrid& grid = {});

}  // namespace whim
