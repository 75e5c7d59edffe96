#include "pskill/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pskill::gp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Per-dimension squared differences, reused across hyperparameter trials.
struct SquaredDiffs {
  std::vector<Eigen::MatrixXd> per_dim;

  explicit SquaredDiffs(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows();
    per_dim.resize(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      auto& m = per_dim[static_cast<std::size_t>(j)];
      m.resize(n, n);
      for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b < n; ++b) {
          const double d = x(a, j) - x(b, j);
          m(a, b) = d * d;
        }
      }
    }
  }

  Eigen::MatrixXd gram(const Hyperparams& h) const {
    const Eigen::Index n = per_dim.empty() ? 0 : per_dim.front().rows();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < per_dim.size(); ++j) {
      const double l = h.length_scales[static_cast<Eigen::Index>(j)];
      q += per_dim[j] / (l * l);
    }
    return h.signal_variance * (-0.5 * q.array()).exp().matrix();
  }
};

// Cholesky of K + noise I with jitter escalation. Returns the noise used.
double factorize_gram(const Eigen::MatrixXd& gram, double noise, Eigen::LLT<Eigen::MatrixXd>& llt) {
  const Eigen::Index n = gram.rows();
  for (double jitter = kMinJitter; jitter <= kMaxJitter * 1.0000001; jitter *= 10.0) {
    const double eff = std::max(noise, jitter);
    llt.compute(gram + eff * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success && (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) {
      return eff;
    }
  }
  throw GpError("gp: kernel matrix not positive definite after jitter escalation");
}

double lml_from(const SquaredDiffs& diffs, const Eigen::VectorXd& y, const Hyperparams& h) {
  Eigen::LLT<Eigen::MatrixXd> llt;
  try {
    factorize_gram(diffs.gram(h), h.noise_variance, llt);
  } catch (const GpError&) {
    return -std::numeric_limits<double>::infinity();
  }
  const Eigen::VectorXd alpha = llt.solve(y);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * y.dot(alpha) - 0.5 * logdet - 0.5 * static_cast<double>(y.size()) * kLog2Pi;
}

// Log-space parameter vector: [log s2, log l_1..l_D, log noise].
Eigen::VectorXd pack(const Hyperparams& h) {
  const Eigen::Index d = h.length_scales.size();
  Eigen::VectorXd t(d + 2);
  t[0] = std::log(h.signal_variance);
  t.segment(1, d) = h.length_scales.array().log();
  t[d + 1] = std::log(h.noise_variance);
  return t;
}

Hyperparams unpack(const Eigen::VectorXd& t) {
  const Eigen::Index d = t.size() - 2;
  Hyperparams h;
  h.signal_variance = std::exp(t[0]);
  h.length_scales = t.segment(1, d).array().exp();
  h.noise_variance = std::exp(t[d + 1]);
  return h;
}

Hyperparams optimize(const SquaredDiffs& diffs, const Eigen::VectorXd& y, const Hyperparams& init) {
  const Eigen::Index d = init.length_scales.size();
  const double var_y = std::max(y.squaredNorm() / static_cast<double>(std::max<Eigen::Index>(y.size(), 1)), 1e-8);
  Eigen::VectorXd lo(d + 2), hi(d + 2);
  lo[0] = std::log(1e-3 * var_y);
  hi[0] = std::log(1e2 * var_y);
  lo.segment(1, d).setConstant(std::log(0.05));
  hi.segment(1, d).setConstant(std::log(1e3));
  lo[d + 1] = std::log(kMinJitter);
  hi[d + 1] = std::log(std::max(var_y, 10.0 * kMinJitter));

  // Starts: the given point plus short/long isotropic length scales.
  const double root_d = std::sqrt(static_cast<double>(std::max<Eigen::Index>(d, 1)));
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(pack(init).cwiseMax(lo).cwiseMin(hi));
  for (double ls : {0.5 * root_d, 2.0 * root_d}) {
    Hyperparams h = init;
    h.length_scales = Eigen::VectorXd::Constant(d, ls);
    starts.push_back(pack(h).cwiseMax(lo).cwiseMin(hi));
  }

  const Eigen::VectorXd init_t = pack(init);
  Eigen::VectorXd best_t = init_t;
  double best = lml_from(diffs, y, init);

  static constexpr double kSteps[] = {1.0, 0.3, 0.1};
  static constexpr int kHalfGrid = 3;
  static constexpr int kSweeps = 2;
  for (const auto& start : starts) {
    Eigen::VectorXd t = start;
    double cur = lml_from(diffs, y, unpack(t));
    for (double step : kSteps) {
      for (int sweep = 0; sweep < kSweeps; ++sweep) {
        for (Eigen::Index j = 0; j < t.size(); ++j) {
          const double origin = t[j];
          double arg = origin;
          for (int g = -kHalfGrid; g <= kHalfGrid; ++g) {
            if (g == 0) continue;
            const double v = std::clamp(origin + step * g, lo[j], hi[j]);
            t[j] = v;
            const double val = lml_from(diffs, y, unpack(t));
            if (val > cur) {
              cur = val;
              arg = v;
            }
          }
          t[j] = arg;
        }
      }
    }
    if (cur > best) {
      best = cur;
      best_t = t;
    }
  }
  return unpack(best_t);
}

}  // namespace

double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double signal_variance,
              const Eigen::VectorXd& length_scales) {
  if (a.size() != b.size() || a.size() != length_scales.size()) {
    throw std::invalid_argument("gp::kernel: dimension mismatch");
  }
  if (!(length_scales.array() > 0.0).all()) throw std::invalid_argument("gp::kernel: length scales must be positive");
  const double q = ((a - b).array() / length_scales.array()).square().sum();
  return signal_variance * std::exp(-0.5 * q);
}

double log_marginal_likelihood(const Eigen::MatrixXd& standardized_inputs, const Eigen::VectorXd& centered_targets,
                               const Hyperparams& hyper) {
  return lml_from(SquaredDiffs(standardized_inputs), centered_targets, hyper);
}

Hyperparams GpModel::default_hyperparams(std::size_t dim, const Eigen::VectorXd& targets) {
  Hyperparams h;
  h.length_scales = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
  double var = 1.0;
  if (targets.size() > 1) {
    const double m = targets.mean();
    var = (targets.array() - m).square().mean();
  }
  h.signal_variance = std::max(var, 1e-6);
  h.noise_variance = std::max(1e-2 * h.signal_variance, kMinJitter);
  return h;
}

GpModel GpModel::prior(std::size_t dim, const Hyperparams& hyper) {
  GpModel m;
  m.hyper_ = hyper;
  if (m.hyper_.length_scales.size() == 0) m.hyper_.length_scales = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
  m.input_mean_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  m.input_scale_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
  m.train_.resize(0, static_cast<Eigen::Index>(dim));
  m.centered_.resize(0);
  m.alpha_.resize(0);
  return m;
}

GpModel GpModel::fit(const std::vector<Eigen::VectorXd>& inputs, const Eigen::VectorXd& targets,
                     bool optimize_hyperparams, const std::optional<Hyperparams>& init) {
  if (inputs.empty()) throw std::invalid_argument("gp::fit: need at least one training point");
  if (static_cast<Eigen::Index>(inputs.size()) != targets.size()) {
    throw std::invalid_argument("gp::fit: inputs and targets differ in length");
  }
  const Eigen::Index d = inputs.front().size();
  const auto n = static_cast<Eigen::Index>(inputs.size());
  for (const auto& x : inputs) {
    if (x.size() != d) throw std::invalid_argument("gp::fit: inputs differ in dimension");
  }
  if (!targets.allFinite()) throw std::invalid_argument("gp::fit: non-finite target");

  GpModel m;
  m.input_mean_ = Eigen::VectorXd::Zero(d);
  for (const auto& x : inputs) m.input_mean_ += x;
  m.input_mean_ /= static_cast<double>(n);
  m.input_scale_ = Eigen::VectorXd::Zero(d);
  for (const auto& x : inputs) m.input_scale_ += (x - m.input_mean_).array().square().matrix();
  m.input_scale_ = (m.input_scale_ / static_cast<double>(n)).array().sqrt();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(m.input_scale_[j] > 1e-12)) m.input_scale_[j] = 1.0;
  }
  m.train_.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) m.train_.row(i) = m.standardize(inputs[static_cast<std::size_t>(i)]).transpose();
  m.prior_mean_ = targets.mean();
  m.centered_ = targets.array() - m.prior_mean_;

  m.hyper_ = init ? *init : default_hyperparams(static_cast<std::size_t>(d), targets);
  if (m.hyper_.length_scales.size() != d) throw std::invalid_argument("gp::fit: length scale dimension mismatch");
  m.hyper_.noise_variance = std::max(m.hyper_.noise_variance, kMinJitter);
  if (optimize_hyperparams) m.hyper_ = optimize(SquaredDiffs(m.train_), m.centered_, m.hyper_);
  m.factorize();
  return m;
}

void GpModel::factorize() {
  const SquaredDiffs diffs(train_);
  effective_noise_ = factorize_gram(diffs.gram(hyper_), hyper_.noise_variance, chol_);
  alpha_ = chol_.solve(centered_);
  const double logdet = 2.0 * chol_.matrixLLT().diagonal().array().log().sum();
  lml_ = -0.5 * centered_.dot(alpha_) - 0.5 * logdet - 0.5 * static_cast<double>(centered_.size()) * kLog2Pi;
}

Eigen::VectorXd GpModel::standardize(const Eigen::VectorXd& w) const {
  return (w - input_mean_).array() / input_scale_.array();
}

Posterior GpModel::posterior(const Eigen::VectorXd& w) const {
  if (w.size() != input_mean_.size()) throw std::invalid_argument("gp::posterior: dimension mismatch");
  const Eigen::VectorXd ws = standardize(w);
  if (train_.rows() == 0) return {prior_mean_, std::sqrt(hyper_.signal_variance)};
  Eigen::VectorXd k(train_.rows());
  for (Eigen::Index i = 0; i < train_.rows(); ++i) {
    const double q = ((train_.row(i).transpose() - ws).array() / hyper_.length_scales.array()).square().sum();
    k[i] = hyper_.signal_variance * std::exp(-0.5 * q);
  }
  const Eigen::VectorXd v = chol_.matrixL().solve(k);
  const double var = hyper_.signal_variance - v.squaredNorm();
  return {prior_mean_ + k.dot(alpha_), std::sqrt(std::max(var, 0.0))};
}

double ucb(const GpModel& model, const Eigen::VectorXd& w, const AcquisitionConfig& cfg) {
  if (cfg.beta < 0.0) throw std::invalid_argument("ucb: beta must be non-negative");
  const Posterior p = model.posterior(w);
  return p.mean + cfg.beta * p.std;
}

}  // namespace pskill::gp
