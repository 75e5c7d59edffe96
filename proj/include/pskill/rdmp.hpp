#pragma once

// Rhythmic dynamic movement primitives: fitting, integration, multi-period
// rollout with per-period goal shifting, and runtime rescaling.
//
// Transformation system (per output dimension):
//   tau * dz/dt   = alpha_z * (beta_z * (g_cur - x) - z) + f(phi)
//   tau * dx/dt   = z
//   tau * dphi/dt = 1
// with the cyclic forcing term
//   f(phi) = r * sum_i psi_i(phi) w_i / sum_i psi_i(phi),
//   psi_i(phi) = exp(h_i * (cos(phi - c_i) - 1)).
//
// The goal follows a first-order filter toward a target that advances by
// goal_shift at every period boundary, so g_cur (and hence dz/dt) stays
// continuous while the limit cycle translates.

#include <cstddef>
#include <iosfwd>
#include <string>

#include <Eigen/Core>

#include "pskill/types.hpp"

namespace pskill::rdmp {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct RdmpParams {
  Eigen::MatrixXd weights;  // n_basis x dims
  Eigen::VectorXd centers;  // radians, strictly increasing in [0, 2pi)
  Eigen::VectorXd widths;   // > 0
  double amplitude = 1.0;   // r
  double tau = 1.0;         // seconds per radian of phase
  double alpha_z = 25.0;
  double beta_z = 25.0 / 4.0;
  Eigen::VectorXd goal;        // dims
  Eigen::VectorXd goal_shift;  // dims, per period

  std::size_t n_basis() const { return static_cast<std::size_t>(centers.size()); }
  std::size_t dims() const { return static_cast<std::size_t>(goal.size()); }
  double period() const { return kTwoPi * tau; }
  // Rate of the goal filter, in units of 1/tau.
  double goal_rate() const { return alpha_z / 2.0; }

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  // Evenly spaced centers, uniform widths 2.5 * n_basis, zero weights.
  static RdmpParams make(std::size_t n_basis, std::size_t dims, double period);
};

struct RdmpState {
  Eigen::VectorXd x;
  Eigen::VectorXd z;
  double phi = 0.0;
  Eigen::VectorXd goal;  // current (filtered) goal

  // At rest at `position` with the goal filter initialized to params.goal.
  static RdmpState at_rest(const Eigen::VectorXd& position, const RdmpParams& params);
};

// Default number of basis functions.
inline constexpr std::size_t kDefaultBasis = 25;
// Integration steps per period used by rollout helpers.
inline constexpr int kStepsPerPeriod = 200;

Eigen::VectorXd basis_activation(double phi, const RdmpParams& params);
Eigen::VectorXd forcing(double phi, const RdmpParams& params);

// Goal the filter is heading to at phase phi.
Eigen::VectorXd goal_target(double phi, const RdmpParams& params);

// One explicit Euler step. Requires 0 < dt <= tau / 10.
RdmpState step(const RdmpState& state, const RdmpParams& params, double dt);

// Locally weighted regression of the forcing weights from a demonstration
// spanning at least one period. The goal is the per-dimension demo mean.
RdmpParams fit_from_demo(const Trajectory& demo, std::size_t n_basis, double period);

// Densifies the waypoints with a natural cubic spline over one period and
// fits the drift-free part; goal_shift = v_L - v_1.
RdmpParams from_waypoints(const Candidate& waypoints, double period,
                          std::size_t n_basis = kDefaultBasis);

// The dense single-period path that from_waypoints fits, sampled at
// `samples` uniform times in [0, period]. Exposed for inspection and tests.
Trajectory waypoint_path(const Candidate& waypoints, double period, int samples);

// Integrates round(n_periods * 2 pi tau / dt) steps and returns the
// positions including the initial one.
Trajectory rollout(const RdmpParams& params, double n_periods, double dt, const RdmpState& init);

// Convenience: rollout from rest at `start` with dt = period / kStepsPerPeriod.
Trajectory rollout_from(const RdmpParams& params, double n_periods, const Vec3& start);

RdmpParams rescale(const RdmpParams& params, double speed_factor, double amplitude_factor);

// Flat key/value text document.
void write_params(std::ostream& out, const RdmpParams& params);
RdmpParams read_params(std::istream& in);

}  // namespace pskill::rdmp
