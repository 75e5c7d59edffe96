#pragma once

#include <cstddef>
#include <stdexcept>

#include "pskill/types.hpp"

namespace pskill::metrics {

struct DistanceConfig {
  std::size_t n_subsample = 10;  // N_s
  std::size_t n_keypoints = 0;   // N_k; 0 accepts whatever the videos carry

  // N_s = 10 * n_rep.
  static DistanceConfig for_repetitions(std::size_t n_rep) { return {10 * n_rep, 0}; }
};

struct PeriodEstimate {
  std::size_t n_rep = 1;
  double period_frames = 0.0;
  double confidence = 0.0;
};

// Raised when the autocorrelation peak falls below kMinPeriodConfidence.
class NoPeriodicityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMinPeriodConfidence = 0.3;

KeypointVideo subsample(const KeypointVideo& video, std::size_t n_frames);
Trajectory subsample(const Trajectory& traj, std::size_t n_frames);

// Mean per-keypoint L1 distance between the two videos after both are
// sub-sampled to cfg.n_subsample frames. Lies in [0, 2].
double keypoint_distance(const KeypointVideo& demo, const KeypointVideo& execution,
                         const DistanceConfig& cfg);

// Autocorrelation period estimate on the first principal component of the
// stacked keypoint coordinates.
PeriodEstimate estimate_periods(const KeypointVideo& video);

// Frames [0, round(period_frames)) of the demo.
KeypointVideo split_single_period(const KeypointVideo& demo, const PeriodEstimate& estimate);

// Clamped linear similarity between an exemplar and an execution:
// max(0, 1 - mean_t |x_E(t) - x_R'(t)|_1 / D_max), D_max = L1 diagonal of
// the workspace, x_R' the execution sub-sampled to the exemplar length.
double performance(const Trajectory& exemplar, const Trajectory& execution, const Box& workspace);

}  // namespace pskill::metrics
