#pragma once

// Exact Gaussian-process regression with an ARD squared-exponential kernel.
//
// Inputs are standardized per dimension with the training-set mean and
// standard deviation before the kernel is evaluated, and targets are
// centered on their mean (the prior mean). Hyperparameters therefore live
// in standardized input units.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace pskill::gp {

// Jitter added to the noise variance; escalated x10 up to kMaxJitter when the
// Cholesky factorization fails.
inline constexpr double kMinJitter = 1e-6;
inline constexpr double kMaxJitter = 1e-2;

struct Hyperparams {
  double signal_variance = 1.0;   // sigma_k^2
  Eigen::VectorXd length_scales;  // one per input dimension, > 0
  double noise_variance = kMinJitter;
};

struct AcquisitionConfig {
  double beta = 0.1;
};

struct Posterior {
  double mean = 0.0;
  double std = 0.0;
};

class GpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// k(a, b) = s2 * exp(-0.5 * sum_j ((a_j - b_j) / l_j)^2)
double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double signal_variance,
              const Eigen::VectorXd& length_scales);

class GpModel {
 public:
  // Zero-data model: the posterior is the prior N(0, signal_variance).
  static GpModel prior(std::size_t dim, const Hyperparams& hyper);

  // Fits with the given hyperparameters, or defaults when none are given.
  // With optimize_hyperparams the starting point is refined by multi-start
  // coordinate ascent on the log marginal likelihood.
  static GpModel fit(const std::vector<Eigen::VectorXd>& inputs, const Eigen::VectorXd& targets,
                     bool optimize_hyperparams, const std::optional<Hyperparams>& init = std::nullopt);

  // Default hyperparameters for a data set: unit length scales, signal
  // variance = target variance, small noise.
  static Hyperparams default_hyperparams(std::size_t dim, const Eigen::VectorXd& targets);

  Posterior posterior(const Eigen::VectorXd& w) const;

  std::size_t dim() const { return static_cast<std::size_t>(input_mean_.size()); }
  std::size_t size() const { return static_cast<std::size_t>(train_.rows()); }
  const Hyperparams& hyperparams() const { return hyper_; }
  // Noise variance actually used in the factorization (after jitter).
  double effective_noise() const { return effective_noise_; }
  double prior_mean() const { return prior_mean_; }
  const Eigen::VectorXd& input_mean() const { return input_mean_; }
  const Eigen::VectorXd& input_scale() const { return input_scale_; }
  double log_marginal_likelihood() const { return lml_; }

  Eigen::VectorXd standardize(const Eigen::VectorXd& w) const;

 private:
  void factorize();

  Hyperparams hyper_;
  Eigen::VectorXd input_mean_;
  Eigen::VectorXd input_scale_;
  Eigen::MatrixXd train_;  // standardized, one row per point
  Eigen::VectorXd centered_;
  double prior_mean_ = 0.0;
  double effective_noise_ = kMinJitter;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
  double lml_ = 0.0;
};

// Log marginal likelihood of centered targets under the given
// hyperparameters on already standardized inputs.
double log_marginal_likelihood(const Eigen::MatrixXd& standardized_inputs, const Eigen::VectorXd& centered_targets,
                               const Hyperparams& hyper);

double ucb(const GpModel& model, const Eigen::VectorXd& w, const AcquisitionConfig& cfg);

}  // namespace pskill::gp
