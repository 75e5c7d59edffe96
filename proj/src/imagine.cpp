#include "pskill/imagine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pskill/metrics.hpp"
#include "pskill/rng.hpp"

namespace pskill::imagine {

namespace {

enum Stream : std::uint64_t { kSegments = 11, kStitch = 12 };

constexpr std::size_t kBlendFrames = 2;

ImaginedTrajectory concatenate(const std::vector<Segment>& segments, const std::vector<std::size_t>& ids, double dt) {
  ImaginedTrajectory out;
  out.segment_ids = ids;
  out.keypoints.dt = dt;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const Segment& seg = segments[ids[k]];
    Vec3 gap = Vec3::Zero();
    KeypointFrame kp_gap(seg.keypoints.front().size(), Vec2::Zero());
    if (k > 0) {
      gap = out.positions.back() - seg.first();
      const auto& prev = out.keypoints.frames.back();
      for (std::size_t j = 0; j < kp_gap.size(); ++j) kp_gap[j] = prev[j] - seg.keypoints.front()[j];
    }
    for (std::size_t i = 0; i < seg.length(); ++i) {
      // Frames 0 and 1 of a joined segment absorb 2/3 and 1/3 of the gap.
      const double w = (k > 0 && i < kBlendFrames)
                           ? static_cast<double>(kBlendFrames - i) / static_cast<double>(kBlendFrames + 1)
                           : 0.0;
      out.positions.push_back(seg.positions[i] + w * gap);
      KeypointFrame f = seg.keypoints[i];
      if (w > 0.0) {
        for (std::size_t j = 0; j < f.size(); ++j) f[j] += w * kp_gap[j];
      }
      out.keypoints.frames.push_back(std::move(f));
    }
  }
  return out;
}

}  // namespace

std::vector<Segment> sample_segments(const PlayDataset& play, std::size_t count, std::size_t length,
                                     std::uint64_t seed) {
  play.check_consistent();
  if (count == 0) throw std::invalid_argument("sample_segments: count must be positive");
  if (length < 2) throw std::invalid_argument("sample_segments: segments need at least 2 frames");
  if (play.size() < length) throw std::invalid_argument("sample_segments: play shorter than segment length");
  Rng rng = make_rng(seed, kSegments);
  const std::size_t starts = play.size() - length + 1;
  std::vector<Segment> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    Segment s;
    s.start = uniform_index(rng, starts);
    const auto b = static_cast<std::ptrdiff_t>(s.start);
    const auto e = b + static_cast<std::ptrdiff_t>(length);
    s.positions.assign(play.robot_positions.begin() + b, play.robot_positions.begin() + e);
    s.keypoints.assign(play.robot_keypoints.frames.begin() + b, play.robot_keypoints.frames.begin() + e);
    out.push_back(std::move(s));
  }
  return out;
}

double displacement_scale(const std::vector<Segment>& segments) {
  double best = 0.0;
  for (const auto& s : segments) best = std::max(best, (s.last() - s.first()).norm());
  return best;
}

std::vector<ImaginedTrajectory> stitch_imagined(const std::vector<Segment>& segments, std::size_t per_trajectory,
                                                double max_gap, std::size_t n_attempts, std::uint64_t seed) {
  if (segments.empty()) throw std::invalid_argument("stitch_imagined: no segments");
  if (!(max_gap > 0.0)) throw std::invalid_argument("stitch_imagined: gap threshold must be positive");
  if (per_trajectory == 0) throw std::invalid_argument("stitch_imagined: need at least one segment per trajectory");
  const std::size_t n = segments.size();

  // Exhaustive successor lists: j may follow i iff |last(i) - first(j)| <= max_gap.
  std::vector<std::vector<std::size_t>> successors(n);
  if (per_trajectory > 1) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if ((segments[i].last() - segments[j].first()).norm() <= max_gap) successors[i].push_back(j);
      }
    }
  }

  std::vector<ImaginedTrajectory> out;
  for (std::size_t attempt = 0; attempt < n_attempts; ++attempt) {
    Rng rng = make_rng(mix_seed(seed, kStitch), attempt);
    std::vector<std::size_t> ids{uniform_index(rng, n)};
    bool ok = true;
    while (ids.size() < per_trajectory) {
      const auto& next = successors[ids.back()];
      if (next.empty()) {
        ok = false;
        break;
      }
      ids.push_back(next[uniform_index(rng, next.size())]);
    }
    if (ok) out.push_back(concatenate(segments, ids, 0.1));
  }
  if (out.empty()) throw StitchError("stitch_imagined: no sequence met the junction threshold");
  return out;
}

double score_imagined(const ImaginedTrajectory& imagined, const KeypointVideo& demo_single_period) {
  return -metrics::keypoint_distance(demo_single_period, imagined.keypoints, metrics::DistanceConfig::for_repetitions(1));
}

std::vector<InitialCandidate> select_initial_candidates(std::vector<ImaginedTrajectory> pool,
                                                        const KeypointVideo& demo_single_period, std::size_t top_n,
                                                        std::size_t L) {
  if (pool.empty()) throw std::invalid_argument("select_initial_candidates: empty pool");
  if (top_n > pool.size()) throw std::invalid_argument("select_initial_candidates: pool smaller than top_n");
  if (L < 3) throw std::invalid_argument("select_initial_candidates: need at least 3 waypoints");
  for (auto& t : pool) t.score = score_imagined(t, demo_single_period);

  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pool[a].score > pool[b].score; });

  std::vector<InitialCandidate> out;
  out.reserve(top_n);
  for (std::size_t r = 0; r < top_n; ++r) {
    const auto& t = pool[order[r]];
    InitialCandidate c;
    c.score = t.score;
    for (std::size_t i = 0; i < L; ++i) c.candidate.waypoints.push_back(t.positions[even_index(i, L, t.positions.size())]);
    out.push_back(std::move(c));
  }
  return out;
}

WarmStart generate_initial_candidates(const PlayDataset& play, const KeypointVideo& demo_single_period,
                                      double period_frames, std::size_t L, const ImagineConfig& cfg,
                                      std::uint64_t seed) {
  WarmStart ws;
  const auto segments = sample_segments(play, cfg.n_segments, cfg.segment_length, seed);
  ws.displacement_scale = displacement_scale(segments);
  ws.junction_threshold = junction_threshold(ws.displacement_scale);
  ws.per_trajectory = cfg.segments_per_trajectory > 0
                          ? cfg.segments_per_trajectory
                          : std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(
                                                         period_frames / static_cast<double>(cfg.segment_length))));
  auto pool = stitch_imagined(segments, ws.per_trajectory, ws.junction_threshold, cfg.n_attempts, seed);
  ws.accepted = pool.size();
  ws.candidates = select_initial_candidates(std::move(pool), demo_single_period, std::min(cfg.top_n, ws.accepted), L);
  return ws;
}

}  // namespace pskill::imagine
