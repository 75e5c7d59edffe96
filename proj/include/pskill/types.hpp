#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pskill {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

// Axis-aligned box in meters.
struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Ones();

  Vec3 extent() const { return hi - lo; }
  Vec3 center() const { return 0.5 * (lo + hi); }
  bool contains(const Vec3& p, double tol = 0.0) const;
  Vec3 clamp(const Vec3& p) const;
  // Sum of the edge lengths, i.e. the L1 length of the diagonal.
  double l1_diagonal() const { return extent().sum(); }
};

// Uniformly sampled effector path.
struct Trajectory {
  double dt = 0.1;
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  double duration() const { return dt * static_cast<double>(points.size()); }
};

// One frame of normalized image-plane keypoints.
using KeypointFrame = std::vector<Vec2>;

struct KeypointVideo {
  double dt = 0.1;
  std::vector<KeypointFrame> frames;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  // Keypoints per frame; 0 for an empty video.
  std::size_t num_keypoints() const { return frames.empty() ? 0 : frames.front().size(); }
  // Throws std::invalid_argument if frames disagree on keypoint count.
  void check_consistent() const;
};

// Single-period BO search point: L waypoints in the workspace.
struct Candidate {
  std::vector<Vec3> waypoints;

  std::size_t size() const { return waypoints.size(); }
  Eigen::VectorXd flatten() const;
  static Candidate unflatten(const Eigen::VectorXd& flat);

  friend bool operator==(const Candidate& a, const Candidate& b);
};

// Unpaired robot and human play recordings.
struct PlayDataset {
  double dt = 0.1;
  std::vector<Vec3> robot_positions;
  KeypointVideo robot_keypoints;
  KeypointVideo human_keypoints;

  std::size_t size() const { return robot_positions.size(); }
  void check_consistent() const;
};

// Index of the i-th of `count` evenly spaced samples over [0, length-1],
// first and last included. Exact halves round down.
std::size_t even_index(std::size_t i, std::size_t count, std::size_t length);

}  // namespace pskill
