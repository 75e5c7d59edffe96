#include <cmath>
#include <limits>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "pskill/imagine.hpp"
#include "pskill/metrics.hpp"
#include "pskill/sim.hpp"

using namespace pskill;

namespace {

PlayDataset ramp_play(std::size_t frames) {
  PlayDataset p;
  for (std::size_t t = 0; t < frames; ++t) {
    const double x = 0.001 * static_cast<double>(t);
    p.robot_positions.emplace_back(x, 0.1, 0.02);
    p.robot_keypoints.frames.push_back(KeypointFrame(8, Vec2(x, 0.5)));
    p.human_keypoints.frames.push_back(KeypointFrame(8, Vec2(0.5, x)));
  }
  return p;
}

// Short random walks confined to small balls around two centers 1 m apart.
std::vector<imagine::Segment> two_clusters(std::size_t per_cluster, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.02, 0.02);
  std::vector<imagine::Segment> out;
  for (int c = 0; c < 2; ++c) {
    const Vec3 center(0.2 + 1.0 * c, 0.2, 0.0);
    for (std::size_t i = 0; i < per_cluster; ++i) {
      imagine::Segment s;
      s.start = out.size() * 10;
      for (int t = 0; t < 10; ++t) {
        s.positions.push_back(center + Vec3(u(rng), u(rng), u(rng)));
        s.keypoints.push_back(KeypointFrame(8, Vec2(0.2 + 0.6 * c, 0.5)));
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

int cluster_of(const Vec3& p) { return p.x() > 0.7 ? 1 : 0; }

}  // namespace

TEST(Segments, CountAndLength) {
  const auto play = ramp_play(500);
  const auto segs = imagine::sample_segments(play, 10, 10, 3);
  ASSERT_EQ(segs.size(), 10u);
  for (const auto& s : segs) {
    EXPECT_EQ(s.length(), 10u);
    EXPECT_EQ(s.keypoints.size(), 10u);
    EXPECT_EQ(s.positions.front(), play.robot_positions[s.start]);
    EXPECT_EQ(s.keypoints.back(), play.robot_keypoints.frames[s.start + 9]);
  }
}

TEST(Segments, FullLengthCollapses) {
  const auto play = ramp_play(40);
  const auto segs = imagine::sample_segments(play, 7, 40, 1);
  for (const auto& s : segs) EXPECT_EQ(s.start, 0u);
}

TEST(Segments, SeedDeterminesStarts) {
  const auto play = ramp_play(1000);
  const auto a = imagine::sample_segments(play, 50, 10, 8), b = imagine::sample_segments(play, 50, 10, 8);
  const auto c = imagine::sample_segments(play, 50, 10, 9);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].start, b[i].start);
    differs = differs || a[i].start != c[i].start;
  }
  EXPECT_TRUE(differs);
}

TEST(Segments, PlayTooShortThrows) { EXPECT_THROW(imagine::sample_segments(ramp_play(5), 3, 10, 0), std::invalid_argument); }

TEST(Stitch, SingleSegmentAlwaysAccepted) {
  const auto segs = two_clusters(20, 1);
  const auto out = imagine::stitch_imagined(segs, 1, 1e-9, 300, 2);
  EXPECT_EQ(out.size(), 300u);
  for (const auto& t : out) EXPECT_EQ(t.positions.size(), 10u);
}

TEST(Stitch, InfiniteGapAcceptsAll) {
  const auto segs = two_clusters(20, 1);
  const auto out = imagine::stitch_imagined(segs, 4, std::numeric_limits<double>::infinity(), 250, 2);
  EXPECT_EQ(out.size(), 250u);
}

TEST(Stitch, NeverCrossesDistantClusters) {
  const auto segs = two_clusters(30, 4);
  const double gap = 0.05;
  std::set<std::pair<std::size_t, std::size_t>> allowed;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    for (std::size_t j = 0; j < segs.size(); ++j) {
      if ((segs[i].last() - segs[j].first()).norm() <= gap) {
        allowed.emplace(i, j);
        EXPECT_EQ(cluster_of(segs[i].last()), cluster_of(segs[j].first()));
      }
    }
  }
  const auto out = imagine::stitch_imagined(segs, 5, gap, 2000, 6);
  ASSERT_FALSE(out.empty());
  std::set<int> seen;
  for (const auto& t : out) {
    const int c = cluster_of(segs[t.segment_ids.front()].first());
    seen.insert(c);
    for (std::size_t k = 0; k + 1 < t.segment_ids.size(); ++k) {
      EXPECT_TRUE(allowed.count({t.segment_ids[k], t.segment_ids[k + 1]}));
      EXPECT_EQ(cluster_of(segs[t.segment_ids[k + 1]].first()), c);
    }
  }
  EXPECT_EQ(seen.size(), 2u);
}

TEST(Stitch, BlendsJunctionOverTwoFrames) {
  std::vector<imagine::Segment> segs(2);
  for (int s = 0; s < 2; ++s) {
    for (int t = 0; t < 4; ++t) {
      segs[static_cast<std::size_t>(s)].positions.emplace_back(s == 0 ? 0.0 : 0.03, 0, 0);
      segs[static_cast<std::size_t>(s)].keypoints.push_back(KeypointFrame(1, Vec2(s == 0 ? 0.0 : 0.3, 0)));
    }
  }
  const auto out = imagine::stitch_imagined(segs, 2, 0.05, 200, 0);
  for (const auto& t : out) {
    if (t.segment_ids != std::vector<std::size_t>{0, 1}) continue;
    ASSERT_EQ(t.positions.size(), 8u);
    EXPECT_NEAR(t.positions[4].x(), 0.01, 1e-15);
    EXPECT_NEAR(t.positions[5].x(), 0.02, 1e-15);
    EXPECT_NEAR(t.positions[6].x(), 0.03, 1e-15);
    EXPECT_NEAR(t.keypoints.frames[4][0].x(), 0.1, 1e-15);
    return;
  }
  FAIL() << "sequence 0,1 never drawn";
}

TEST(Stitch, TooTightThrows) {
  const auto segs = two_clusters(10, 2);
  EXPECT_THROW(imagine::stitch_imagined(segs, 3, 1e-12, 100, 0), imagine::StitchError);
}

TEST(Stitch, JunctionInvariantOnRealPlay) {
  const auto play = sim::collect_play(sim::Task::kWinding, 1, 300.0, 1);
  const auto segs = imagine::sample_segments(play, 1500, 10, 2);
  const double gap = imagine::junction_threshold(imagine::displacement_scale(segs));
  const auto out = imagine::stitch_imagined(segs, 5, gap, 3000, 3);
  ASSERT_FALSE(out.empty());
  for (const auto& t : out) {
    for (std::size_t k = 0; k + 1 < t.segment_ids.size(); ++k) {
      ASSERT_LE((segs[t.segment_ids[k]].last() - segs[t.segment_ids[k + 1]].first()).norm(), gap);
    }
  }
}

TEST(Score, IdentityAndOffset) {
  KeypointVideo demo;
  imagine::ImaginedTrajectory t;
  for (int f = 0; f < 30; ++f) {
    KeypointFrame kp;
    for (int k = 0; k < 8; ++k) kp.emplace_back(0.3 + 0.01 * f, 0.2 + 0.02 * k);
    demo.frames.push_back(kp);
    t.keypoints.frames.push_back(kp);
  }
  EXPECT_EQ(imagine::score_imagined(t, demo), 0.0);
  for (auto& f : t.keypoints.frames) {
    for (auto& k : f) k.y() += 0.1;
  }
  EXPECT_NEAR(imagine::score_imagined(t, demo), -0.1, 1e-12);
}

TEST(Score, ConstantStreamsIgnoreSubsampling) {
  KeypointVideo demo;
  demo.frames.assign(17, KeypointFrame(8, Vec2(0.4, 0.4)));
  imagine::ImaginedTrajectory t;
  t.keypoints.frames.assign(53, KeypointFrame(8, Vec2(0.45, 0.4)));
  EXPECT_NEAR(imagine::score_imagined(t, demo), -0.05, 1e-12);
  t.keypoints.frames.assign(11, KeypointFrame(8, Vec2(0.45, 0.4)));
  EXPECT_NEAR(imagine::score_imagined(t, demo), -0.05, 1e-12);
}

TEST(Select, TopCandidatesSortedWithEvenWaypoints) {
  KeypointVideo demo;
  demo.frames.assign(20, KeypointFrame(8, Vec2(0.5, 0.5)));
  std::vector<imagine::ImaginedTrajectory> pool;
  for (int i = 0; i < 30; ++i) {
    imagine::ImaginedTrajectory t;
    for (int f = 0; f < 70; ++f) t.positions.emplace_back(f, i, 0);
    t.keypoints.frames.assign(70, KeypointFrame(8, Vec2(0.5 + 0.01 * ((i * 7) % 30), 0.5)));
    pool.push_back(std::move(t));
  }
  const auto top = imagine::select_initial_candidates(pool, demo, 10, 7);
  ASSERT_EQ(top.size(), 10u);
  const std::vector<double> want{0, 11, 23, 34, 46, 57, 69};
  for (std::size_t i = 0; i < top.size(); ++i) {
    if (i > 0) EXPECT_LE(top[i].score, top[i - 1].score);
    ASSERT_EQ(top[i].candidate.size(), 7u);
    for (std::size_t w = 0; w < 7; ++w) EXPECT_EQ(top[i].candidate.waypoints[w].x(), want[w]);
  }
  EXPECT_EQ(top[0].score, 0.0);

  const auto all = imagine::select_initial_candidates(pool, demo, 30, 7);
  EXPECT_EQ(all.size(), 30u);
  EXPECT_THROW(imagine::select_initial_candidates(pool, demo, 31, 7), std::invalid_argument);
}

TEST(Pipeline, HundredCandidatesFromFiveThousand) {
  const auto play = sim::collect_play(sim::Task::kWiping, 0, 600.0, 0);
  const auto d = sim::scripted_demo(sim::Task::kWiping, 3, 0);
  const auto est = metrics::estimate_periods(d.demo);
  const auto single = metrics::split_single_period(d.demo, est);
  const imagine::ImagineConfig cfg;
  EXPECT_EQ(cfg.n_attempts, 5000u);
  EXPECT_EQ(cfg.top_n, 100u);
  EXPECT_EQ(cfg.segment_length, 10u);
  const auto ws = imagine::generate_initial_candidates(play, single, est.period_frames, 7, cfg, 1);
  EXPECT_EQ(ws.candidates.size(), 100u);
  EXPECT_NEAR(ws.junction_threshold, ws.displacement_scale / 6.0, 1e-15);
  EXPECT_EQ(ws.per_trajectory, 4u);  // 40-frame period / 10-frame segments
  for (std::size_t i = 1; i < ws.candidates.size(); ++i) EXPECT_LE(ws.candidates[i].score, ws.candidates[i - 1].score);
  const auto again = imagine::generate_initial_candidates(play, single, est.period_frames, 7, cfg, 1);
  for (std::size_t i = 0; i < ws.candidates.size(); ++i) EXPECT_EQ(again.candidates[i].candidate, ws.candidates[i].candidate);
}
