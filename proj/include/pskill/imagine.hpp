#pragma once

// Warm-start candidates from robot play data: fixed-length play segments are
// chained into "imagined" trajectories whenever consecutive segments nearly
// meet, the chained keypoint streams are scored against the single-period
// demo, and the best chains are reduced to waypoint candidates.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pskill/types.hpp"

namespace pskill::imagine {

struct Segment {
  std::size_t start = 0;
  std::vector<Vec3> positions;
  std::vector<KeypointFrame> keypoints;

  std::size_t length() const { return positions.size(); }
  const Vec3& first() const { return positions.front(); }
  const Vec3& last() const { return positions.back(); }
};

struct ImaginedTrajectory {
  std::vector<std::size_t> segment_ids;
  std::vector<Vec3> positions;
  KeypointVideo keypoints;
  double score = 0.0;
};

struct InitialCandidate {
  Candidate candidate;
  double score = 0.0;
};

struct ImagineConfig {
  std::size_t n_segments = 2000;
  std::size_t segment_length = 10;  // T_s, frames
  std::size_t n_attempts = 5000;
  std::size_t top_n = 100;
  // Segments per imagined trajectory; 0 derives it from the demo period.
  std::size_t segments_per_trajectory = 0;
};

// Raised when no sequence satisfies the junction constraint.
class StitchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// `count` independent draws of uniformly random start indices.
std::vector<Segment> sample_segments(const PlayDataset& play, std::size_t count, std::size_t length,
                                     std::uint64_t seed);

// Largest start-to-end displacement over the segments; the junction
// threshold is one sixth of it.
double displacement_scale(const std::vector<Segment>& segments);
inline double junction_threshold(double displacement_scale) { return displacement_scale / 6.0; }

// Each attempt draws a first segment uniformly, then repeatedly a uniform
// successor among the segments whose start lies within max_gap of the
// current end; an attempt with no valid successor is rejected. Junction gaps
// are blended out over two frames in both positions and keypoints.
std::vector<ImaginedTrajectory> stitch_imagined(const std::vector<Segment>& segments, std::size_t per_trajectory,
                                                double max_gap, std::size_t n_attempts, std::uint64_t seed);

// Negated keypoint distance to the single-period demo (10 sub-sampled frames).
double score_imagined(const ImaginedTrajectory& imagined, const KeypointVideo& demo_single_period);

// Scores the pool, keeps the top_n in descending score order (stable) and
// sub-samples L evenly spaced positions from each.
std::vector<InitialCandidate> select_initial_candidates(std::vector<ImaginedTrajectory> pool,
                                                        const KeypointVideo& demo_single_period, std::size_t top_n,
                                                        std::size_t L);

struct WarmStart {
  std::vector<InitialCandidate> candidates;
  double displacement_scale = 0.0;
  double junction_threshold = 0.0;
  std::size_t per_trajectory = 0;
  std::size_t accepted = 0;
};

// Full pipeline from play data to ranked initial candidates.
WarmStart generate_initial_candidates(const PlayDataset& play, const KeypointVideo& demo_single_period,
                                      double period_frames, std::size_t L, const ImagineConfig& cfg,
                                      std::uint64_t seed);

}  // namespace pskill::imagine
