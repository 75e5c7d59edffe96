#include "pskill/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

namespace pskill::metrics {

namespace {

// Local maxima closer than this fraction of the global peak are treated as
// the same peak; the shortest such lag wins so period multiples lose.
constexpr double kPeakRatio = 0.9;

std::vector<double> pearson_autocorrelation(const Eigen::VectorXd& s, std::size_t max_lag) {
  const auto n = static_cast<std::size_t>(s.size());
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag && k < n; ++k) {
    const std::size_t m = n - k;
    const auto a = s.head(static_cast<Eigen::Index>(m));
    const auto b = s.segment(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m));
    const double den = std::sqrt(a.squaredNorm() * b.squaredNorm());
    r[k] = den > 0.0 ? a.dot(b) / den : 0.0;
  }
  return r;
}

}  // namespace

KeypointVideo subsample(const KeypointVideo& video, std::size_t n_frames) {
  if (video.empty()) throw std::invalid_argument("subsample: empty video");
  if (n_frames == 0) throw std::invalid_argument("subsample: need at least one frame");
  KeypointVideo out;
  const std::size_t T = video.size();
  out.dt = n_frames > 1 ? video.dt * static_cast<double>(T - 1) / static_cast<double>(n_frames - 1) : video.dt;
  out.frames.reserve(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) out.frames.push_back(video.frames[even_index(i, n_frames, T)]);
  return out;
}

Trajectory subsample(const Trajectory& traj, std::size_t n_frames) {
  if (traj.empty()) throw std::invalid_argument("subsample: empty trajectory");
  if (n_frames == 0) throw std::invalid_argument("subsample: need at least one frame");
  Trajectory out;
  const std::size_t T = traj.size();
  out.dt = n_frames > 1 ? traj.dt * static_cast<double>(T - 1) / static_cast<double>(n_frames - 1) : traj.dt;
  out.points.reserve(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) out.points.push_back(traj.points[even_index(i, n_frames, T)]);
  return out;
}

double keypoint_distance(const KeypointVideo& demo, const KeypointVideo& execution, const DistanceConfig& cfg) {
  if (demo.empty() || execution.empty()) throw std::invalid_argument("keypoint_distance: empty video");
  demo.check_consistent();
  execution.check_consistent();
  const std::size_t nk = demo.num_keypoints();
  if (nk != execution.num_keypoints()) throw std::invalid_argument("keypoint_distance: keypoint count mismatch");
  if (cfg.n_keypoints != 0 && cfg.n_keypoints != nk) {
    throw std::invalid_argument("keypoint_distance: videos do not carry the configured keypoint count");
  }
  if (nk == 0) throw std::invalid_argument("keypoint_distance: frames carry no keypoints");
  const std::size_t ns = std::max<std::size_t>(cfg.n_subsample, 1);

  double total = 0.0;
  for (std::size_t i = 0; i < ns; ++i) {
    const auto& a = demo.frames[even_index(i, ns, demo.size())];
    const auto& b = execution.frames[even_index(i, ns, execution.size())];
    for (std::size_t k = 0; k < nk; ++k) total += (a[k] - b[k]).cwiseAbs().sum();
  }
  return total / static_cast<double>(ns * nk);
}

PeriodEstimate estimate_periods(const KeypointVideo& video) {
  video.check_consistent();
  const std::size_t T = video.size();
  const std::size_t nk = video.num_keypoints();
  if (T < 8 || nk == 0) throw NoPeriodicityError("estimate_periods: video too short");

  Eigen::MatrixXd X(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(2 * nk));
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t k = 0; k < nk; ++k) {
      X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(2 * k)) = video.frames[t][k].x();
      X(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(2 * k + 1)) = video.frames[t][k].y();
    }
  }
  X.rowwise() -= X.colwise().mean();
  const Eigen::MatrixXd cov = X.transpose() * X / static_cast<double>(T);
  if (cov.trace() < 1e-18) throw NoPeriodicityError("estimate_periods: no motion in video");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd dir = eig.eigenvectors().col(eig.eigenvectors().cols() - 1);
  const Eigen::VectorXd s = X * dir;

  const std::size_t lo = std::max<std::size_t>(1, (T + 9) / 10);
  const std::size_t hi = T / 2;
  if (hi <= lo) throw NoPeriodicityError("estimate_periods: video too short");
  const std::vector<double> r = pearson_autocorrelation(s, std::min(hi + 1, T - 2));

  std::size_t best = lo;
  for (std::size_t k = lo; k <= hi; ++k) {
    if (r[k] > r[best]) best = k;
  }
  const double peak = r[best];
  for (std::size_t k = lo; k < best; ++k) {
    const bool local_max = (k == 0 || r[k] >= r[k - 1]) && (k + 1 >= r.size() || r[k] >= r[k + 1]);
    if (local_max && r[k] >= kPeakRatio * peak) {
      best = k;
      break;
    }
  }

  double lag = static_cast<double>(best);
  if (best >= 1 && best + 1 < r.size()) {
    const double a = r[best - 1], b = r[best], c = r[best + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) lag += std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  }

  PeriodEstimate est;
  est.confidence = std::clamp(r[best], 0.0, 1.0);
  if (est.confidence < kMinPeriodConfidence) {
    throw NoPeriodicityError("estimate_periods: no reliable periodicity");
  }
  est.period_frames = lag;
  est.n_rep = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(T) / lag)));
  return est;
}

KeypointVideo split_single_period(const KeypointVideo& demo, const PeriodEstimate& estimate) {
  if (!(estimate.period_frames > 0.0)) throw std::invalid_argument("split_single_period: invalid estimate");
  const auto n = static_cast<std::size_t>(std::llround(estimate.period_frames));
  if (n == 0 || n > demo.size()) throw std::invalid_argument("split_single_period: period longer than demo");
  if (estimate.n_rep == 1) return demo;
  KeypointVideo out;
  out.dt = demo.dt;
  out.frames.assign(demo.frames.begin(), demo.frames.begin() + static_cast<std::ptrdiff_t>(n));
  return out;
}

double performance(const Trajectory& exemplar, const Trajectory& execution, const Box& workspace) {
  if (exemplar.empty() || execution.empty()) throw std::invalid_argument("performance: empty trajectory");
  const std::size_t te = exemplar.size();
  double err = 0.0;
  for (std::size_t i = 0; i < te; ++i) {
    err += (exemplar.points[i] - execution.points[even_index(i, te, execution.size())]).cwiseAbs().sum();
  }
  err /= static_cast<double>(te);
  return std::max(0.0, 1.0 - err / workspace.l1_diagonal());
}

}  // namespace pskill::metrics
