#include "pskill/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "pskill/metrics.hpp"
#include "pskill/rdmp.hpp"
#include "pskill/rng.hpp"

namespace pskill::baselines {

namespace {

enum Stream : std::uint64_t { kActions = 41 };

Eigen::VectorXd flatten(const KeypointFrame& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(2 * f.size()));
  for (std::size_t k = 0; k < f.size(); ++k) v.segment<2>(static_cast<Eigen::Index>(2 * k)) = f[k];
  return v;
}

KeypointFrame unflatten(const Eigen::VectorXd& v) {
  KeypointFrame f(static_cast<std::size_t>(v.size() / 2));
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = v.segment<2>(static_cast<Eigen::Index>(2 * k));
  return f;
}

Candidate waypoints_of(const Trajectory& traj, std::size_t L) {
  Candidate c;
  for (std::size_t i = 0; i < L; ++i) c.waypoints.push_back(traj.points[even_index(i, L, traj.size())]);
  return c;
}

BaselineResult summarize(std::vector<bo::TrialRecord> records, std::vector<Trajectory> executions) {
  BaselineResult out;
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].objective > records[best].objective) best = i;
  }
  out.performance = records[best].performance;
  out.best_execution = std::move(executions[best]);
  out.records = std::move(records);
  return out;
}

}  // namespace

void KeypointRegressor::fit(const std::vector<KeypointFrame>& frames, const std::vector<Vec3>& positions) {
  if (frames.empty()) throw std::invalid_argument("KeypointRegressor: empty training set");
  if (frames.size() != positions.size()) throw std::invalid_argument("KeypointRegressor: size mismatch");
  if (k_ == 0) throw std::invalid_argument("KeypointRegressor: k must be positive");
  const auto dim = static_cast<Eigen::Index>(2 * frames.front().size());
  features_.resize(static_cast<Eigen::Index>(frames.size()), dim);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (static_cast<Eigen::Index>(2 * frames[i].size()) != dim) {
      throw std::invalid_argument("KeypointRegressor: inconsistent keypoint count");
    }
    features_.row(static_cast<Eigen::Index>(i)) = flatten(frames[i]).transpose();
  }
  positions_ = positions;
}

Vec3 KeypointRegressor::predict(const KeypointFrame& frame) const {
  if (positions_.empty()) throw std::logic_error("KeypointRegressor: not fitted");
  const Eigen::VectorXd q = flatten(frame);
  if (q.size() != features_.cols()) throw std::invalid_argument("KeypointRegressor: keypoint count mismatch");
  const Eigen::VectorXd d = (features_.rowwise() - q.transpose()).rowwise().norm();

  Vec3 exact = Vec3::Zero();
  int n_exact = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d[i] <= 1e-12) {
      exact += positions_[static_cast<std::size_t>(i)];
      ++n_exact;
    }
  }
  if (n_exact > 0) return exact / n_exact;

  std::vector<std::size_t> idx(positions_.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t k = std::min(k_, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto da = d[static_cast<Eigen::Index>(a)], db = d[static_cast<Eigen::Index>(b)];
    return da < db || (da == db && a < b);
  });
  Vec3 acc = Vec3::Zero();
  double wsum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double w = 1.0 / d[static_cast<Eigen::Index>(idx[j])];
    acc += w * positions_[idx[j]];
    wsum += w;
  }
  return acc / wsum;
}

void KeypointDynamicsModel::fit(const std::vector<Transition>& data) {
  if (data.empty()) throw std::invalid_argument("KeypointDynamicsModel: no transitions");
  n_coords_ = 2 * data.front().before.size();
  const auto nc = static_cast<Eigen::Index>(n_coords_);
  const Eigen::Index nf = nc + 4;
  Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(nf, nf);
  Eigen::MatrixXd xty = Eigen::MatrixXd::Zero(nf, nc);
  Eigen::VectorXd x(nf);
  for (const auto& tr : data) {
    if (tr.before.size() * 2 != n_coords_ || tr.after.size() * 2 != n_coords_) {
      throw std::invalid_argument("KeypointDynamicsModel: inconsistent keypoint count");
    }
    const Eigen::VectorXd kp = flatten(tr.before);
    x << kp, tr.action, 1.0;
    xtx.noalias() += x * x.transpose();
    xty.noalias() += x * (flatten(tr.after) - kp).transpose();
  }
  // The bias is left unregularized.
  for (Eigen::Index i = 0; i + 1 < nf; ++i) xtx(i, i) += ridge_;
  weights_ = xtx.ldlt().solve(xty);
  if (!weights_.allFinite()) throw std::runtime_error("KeypointDynamicsModel: ill-conditioned fit");
  gain_ = weights_.middleRows(nc, 3);
}

Eigen::VectorXd KeypointDynamicsModel::predict_base(const KeypointFrame& kp) const {
  if (!fitted()) throw std::logic_error("KeypointDynamicsModel: not fitted");
  const Eigen::VectorXd v = flatten(kp);
  if (v.size() != static_cast<Eigen::Index>(n_coords_)) throw std::invalid_argument("KeypointDynamicsModel: size mismatch");
  const auto nc = static_cast<Eigen::Index>(n_coords_);
  return v + weights_.topRows(nc).transpose() * v + weights_.row(nc + 3).transpose();
}

KeypointFrame KeypointDynamicsModel::predict(const KeypointFrame& kp, const Vec3& action) const {
  return unflatten(predict_base(kp) + gain_.transpose() * action);
}

std::vector<Transition> play_transitions(const PlayDataset& play) {
  play.check_consistent();
  const double max_step = sim::kSpeedCap * play.dt * (1.0 + 1e-6);
  std::vector<Transition> out;
  for (std::size_t t = 0; t + 1 < play.size(); ++t) {
    const Vec3 a = play.robot_positions[t + 1] - play.robot_positions[t];
    if (a.norm() > max_step) continue;
    out.push_back({play.robot_keypoints.frames[t], a, play.robot_keypoints.frames[t + 1]});
  }
  return out;
}

BaselineResult direct_imitation(const PlayDataset& play, const KeypointVideo& demo, const sim::Environment& env,
                                const bo::PerformanceFn& performance, std::size_t n_waypoints) {
  play.check_consistent();
  if (play.size() == 0) throw std::invalid_argument("direct_imitation: empty play");
  if (demo.empty()) throw std::invalid_argument("direct_imitation: empty demo");
  KeypointRegressor reg;
  reg.fit(play.robot_keypoints.frames, play.robot_positions);

  Trajectory predicted;
  predicted.dt = demo.dt;
  for (const auto& f : demo.frames) predicted.points.push_back(reg.predict(f));

  const metrics::PeriodEstimate est = metrics::estimate_periods(demo);
  const rdmp::RdmpParams params = rdmp::fit_from_demo(predicted, rdmp::kDefaultBasis, est.period_frames * demo.dt);
  const Trajectory plan = rdmp::rollout_from(params, static_cast<double>(est.n_rep), predicted.points.front());
  const sim::Execution ex = env.execute(plan, demo.size());

  bo::TrialRecord r;
  r.trial = 1;
  r.provenance = bo::Provenance::kPolicy;
  r.candidate = waypoints_of(ex.effector, n_waypoints);
  r.objective = -metrics::keypoint_distance(demo, ex.video, metrics::DistanceConfig::for_repetitions(est.n_rep));
  r.performance = performance(ex.effector);
  return summarize({r}, {ex.effector});
}

std::size_t best_action(const KeypointDynamicsModel& model, const KeypointFrame& kp, const KeypointFrame& goal,
                        const std::vector<Vec3>& actions) {
  if (actions.empty()) throw std::invalid_argument("best_action: no actions");
  const Eigen::VectorXd base = model.predict_base(kp) - flatten(goal);
  const Eigen::MatrixXd& gain = model.action_gain();
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const double cost = (base + gain.transpose() * actions[i]).cwiseAbs().sum();
    if (cost < best_cost) {
      best_cost = cost;
      best = i;
    }
  }
  return best;
}

BaselineResult mbil(const PlayDataset& play, const KeypointVideo& demo, const sim::Environment& env,
                    const MbilConfig& cfg, const bo::PerformanceFn& performance, std::size_t n_waypoints) {
  play.check_consistent();
  if (play.size() < 2) throw std::invalid_argument("mbil: empty play");
  if (demo.empty()) throw std::invalid_argument("mbil: empty demo");
  if (cfg.episodes == 0 || cfg.n_action_samples == 0) throw std::invalid_argument("mbil: need episodes and samples");
  const metrics::PeriodEstimate est = metrics::estimate_periods(demo);
  const auto dist_cfg = metrics::DistanceConfig::for_repetitions(est.n_rep);
  const double bound = sim::kSpeedCap * sim::kFrameDt;

  std::vector<Transition> data = play_transitions(play);
  KeypointDynamicsModel model(cfg.ridge);
  model.fit(data);

  std::vector<bo::TrialRecord> records;
  std::vector<Trajectory> executions;
  std::vector<Vec3> actions(cfg.n_action_samples);
  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    Rng rng = make_rng(mix_seed(cfg.seed, kActions), ep);
    sim::EnvState s = env.reset();
    sim::Execution ex;
    ex.effector.dt = sim::kFrameDt;
    ex.video.dt = sim::kFrameDt;
    KeypointFrame kp = sim::observe_keypoints(s);
    for (std::size_t t = 0; t < demo.size(); ++t) {
      for (auto& a : actions) a = Vec3(uniform(rng, -bound, bound), uniform(rng, -bound, bound), uniform(rng, -bound, bound));
      const Vec3 a = actions[best_action(model, kp, demo.frames[t], actions)];
      const Vec3 before = s.effector;
      s = sim::env_step(s, before + a, sim::kFrameDt);
      KeypointFrame next = sim::observe_keypoints(s);
      data.push_back({kp, s.effector - before, next});
      kp = std::move(next);
      ex.effector.points.push_back(s.effector);
      ex.video.frames.push_back(kp);
    }
    model.fit(data);

    bo::TrialRecord r;
    r.trial = ep + 1;
    r.provenance = bo::Provenance::kPolicy;
    r.candidate = waypoints_of(ex.effector, n_waypoints);
    r.objective = -metrics::keypoint_distance(demo, ex.video, dist_cfg);
    r.performance = performance(ex.effector);
    records.push_back(std::move(r));
    executions.push_back(std::move(ex.effector));
  }
  return summarize(std::move(records), std::move(executions));
}

}  // namespace pskill::baselines
