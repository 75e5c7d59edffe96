#include "pskill/types.hpp"

namespace pskill {

bool Box::contains(const Vec3& p, double tol) const {
  for (int d = 0; d < 3; ++d) {
    if (p[d] < lo[d] - tol || p[d] > hi[d] + tol) return false;
  }
  return true;
}

Vec3 Box::clamp(const Vec3& p) const { return p.cwiseMax(lo).cwiseMin(hi); }

void KeypointVideo::check_consistent() const {
  const std::size_t nk = num_keypoints();
  for (const auto& f : frames) {
    if (f.size() != nk) throw std::invalid_argument("keypoint video: inconsistent keypoint count");
  }
}

Eigen::VectorXd Candidate::flatten() const {
  Eigen::VectorXd flat(3 * waypoints.size());
  for (std::size_t i = 0; i < waypoints.size(); ++i) flat.segment<3>(3 * i) = waypoints[i];
  return flat;
}

Candidate Candidate::unflatten(const Eigen::VectorXd& flat) {
  if (flat.size() % 3 != 0) throw std::invalid_argument("candidate: flat size not a multiple of 3");
  Candidate c;
  c.waypoints.reserve(flat.size() / 3);
  for (Eigen::Index i = 0; i < flat.size(); i += 3) c.waypoints.emplace_back(flat.segment<3>(i));
  return c;
}

bool operator==(const Candidate& a, const Candidate& b) {
  if (a.waypoints.size() != b.waypoints.size()) return false;
  for (std::size_t i = 0; i < a.waypoints.size(); ++i) {
    if (a.waypoints[i] != b.waypoints[i]) return false;
  }
  return true;
}

void PlayDataset::check_consistent() const {
  if (robot_positions.size() != robot_keypoints.size()) {
    throw std::invalid_argument("play dataset: positions and robot keypoint frames differ in length");
  }
  robot_keypoints.check_consistent();
  human_keypoints.check_consistent();
}

std::size_t even_index(std::size_t i, std::size_t count, std::size_t length) {
  if (count <= 1 || length <= 1) return 0;
  const std::size_t num = i * (length - 1);
  const std::size_t den = count - 1;
  return (2 * num + den - 1) / (2 * den);
}

}  // namespace pskill
