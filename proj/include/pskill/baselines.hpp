#pragma once

// Comparison methods that learn from play data without BO: a keypoint to
// effector-position regressor replayed through a DMP (direct imitation), and
// sampling-based one-step MPC on a learned linear keypoint dynamics model.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "pskill/bo.hpp"
#include "pskill/sim.hpp"
#include "pskill/types.hpp"

namespace pskill::baselines {

// Distance-weighted k-nearest-neighbor map from a keypoint frame to an
// effector position. Exact matches short-circuit to their mean position.
class KeypointRegressor {
 public:
  explicit KeypointRegressor(std::size_t k = 5) : k_(k) {}

  void fit(const std::vector<KeypointFrame>& frames, const std::vector<Vec3>& positions);
  Vec3 predict(const KeypointFrame& frame) const;
  std::size_t size() const { return positions_.size(); }

 private:
  std::size_t k_;
  Eigen::MatrixXd features_;  // one flattened frame per row
  std::vector<Vec3> positions_;
};

struct Transition {
  KeypointFrame before;
  Vec3 action;
  KeypointFrame after;
};

// kp_{t+1} = kp_t + W^T [kp_t; a_t; 1], fitted by ridge regression.
class KeypointDynamicsModel {
 public:
  explicit KeypointDynamicsModel(double ridge = 1e-3) : ridge_(ridge) {}

  void fit(const std::vector<Transition>& data);
  KeypointFrame predict(const KeypointFrame& kp, const Vec3& action) const;
  // Splits the prediction into an action-free part and the action gain so a
  // large batch of actions can be scored cheaply: pred = base + gain^T a.
  Eigen::VectorXd predict_base(const KeypointFrame& kp) const;
  const Eigen::MatrixXd& action_gain() const { return gain_; }
  bool fitted() const { return weights_.size() > 0; }

 private:
  double ridge_;
  std::size_t n_coords_ = 0;
  Eigen::MatrixXd weights_;  // (n_coords + 4) x n_coords
  Eigen::MatrixXd gain_;     // 3 x n_coords
};

// Play transitions (kp_t, x_{t+1} - x_t, kp_{t+1}); steps longer than one
// frame of capped motion (episode resets) are dropped.
std::vector<Transition> play_transitions(const PlayDataset& play);

struct BaselineResult {
  std::vector<bo::TrialRecord> records;
  Trajectory best_execution;
  double performance = 0.0;  // of the best-objective record
};

BaselineResult direct_imitation(const PlayDataset& play, const KeypointVideo& demo, const sim::Environment& env,
                                const bo::PerformanceFn& performance, std::size_t n_waypoints);

struct MbilConfig {
  std::size_t episodes = 50;
  std::size_t n_action_samples = 5000;
  double ridge = 1e-3;
  std::uint64_t seed = 0;
};

// One greedy step: index of the sampled action whose predicted next frame is
// closest (mean per-keypoint L1) to `goal`; ties go to the lowest index.
std::size_t best_action(const KeypointDynamicsModel& model, const KeypointFrame& kp, const KeypointFrame& goal,
                        const std::vector<Vec3>& actions);

BaselineResult mbil(const PlayDataset& play, const KeypointVideo& demo, const sim::Environment& env,
                    const MbilConfig& cfg, const bo::PerformanceFn& performance, std::size_t n_waypoints);

}  // namespace pskill::baselines
