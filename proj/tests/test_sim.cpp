#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pskill/metrics.hpp"
#include "pskill/sim.hpp"

using namespace pskill;
using sim::Task;

namespace {

constexpr Task kTasks[] = {Task::kWiping, Task::kWinding, Task::kStirring};
constexpr double kTwoPi = 6.283185307179586476925286766559;

double positional_variance(const sim::EnvState& s) {
  Vec2 m = Vec2::Zero();
  for (const auto& p : s.particles) m += p;
  m /= static_cast<double>(s.particles.size());
  double v = 0.0;
  for (const auto& p : s.particles) v += (p - m).squaredNorm();
  return v / static_cast<double>(s.particles.size());
}

// Random targets, half of them low enough to touch the objects.
sim::EnvState random_walk(Task task, unsigned seed, int steps, auto&& check) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto s = sim::make_env(task, seed);
  const Vec2 focus = task == Task::kWiping ? s.particles[8] : (task == Task::kWinding ? s.particles.back() : s.anchor);
  for (int k = 0; k < steps; ++k) {
    Vec3 t;
    if (u(rng) < 0.5) {
      t = Vec3(focus.x() + 0.2 * (u(rng) - 0.5), focus.y() + 0.2 * (u(rng) - 0.5), 0.02 * u(rng));
    } else {
      t = Vec3(0.5 * u(rng), 0.43 * u(rng), 0.1 * u(rng));
    }
    s = sim::env_step(s, t, sim::kFrameDt);
    check(s);
  }
  return s;
}

}  // namespace

TEST(MakeEnv, Deterministic) {
  for (auto task : kTasks) {
    const auto a = sim::make_env(task, 11), b = sim::make_env(task, 11);
    EXPECT_EQ(a.particles, b.particles);
    EXPECT_EQ(a.effector, b.effector);
  }
}

TEST(MakeEnv, EightKeypointsInUnitSquare) {
  for (auto task : kTasks) {
    const auto f = sim::observe_keypoints(sim::make_env(task, 3));
    ASSERT_EQ(f.size(), sim::kNumKeypoints);
    for (const auto& k : f) {
      EXPECT_GE(k.minCoeff(), 0.0);
      EXPECT_LE(k.maxCoeff(), 1.0);
    }
  }
}

TEST(MakeEnv, UnknownTaskName) { EXPECT_THROW(sim::parse_task("folding"), std::invalid_argument); }

TEST(Keypoints, NormalizationCornersAndRoundTrip) {
  const auto& b = sim::kWorkspace;
  EXPECT_EQ(sim::normalize(b.lo.head<2>(), b), Vec2(0, 0));
  EXPECT_LT((sim::normalize(b.center().head<2>(), b) - Vec2(0.5, 0.5)).norm(), 1e-15);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-0.2, 0.7);
  for (int i = 0; i < 100; ++i) {
    const Vec2 p(u(rng), u(rng));
    EXPECT_LT((sim::denormalize(sim::normalize(p, b), b) - p).norm(), 1e-9);
  }
}

TEST(Keypoints, StirringUsesClusterCentroids) {
  auto s = random_walk(Task::kStirring, 4, 40, [](const sim::EnvState&) {});
  const auto c = sim::granule_cluster_centroids(s);
  const auto f = sim::observe_keypoints(s);
  ASSERT_EQ(c.size(), f.size());
  for (std::size_t k = 0; k < f.size(); ++k) EXPECT_LT((sim::normalize(c[k], s.bounds) - f[k]).norm(), 1e-12);
}

TEST(Step, RopeSpacingWithinTenPercent) {
  for (unsigned seed = 0; seed < 10; ++seed) {
    random_walk(Task::kWinding, seed, 100, [](const sim::EnvState& s) {
      for (std::size_t i = 0; i + 1 < s.particles.size(); ++i) {
        const double d = (s.particles[i + 1] - s.particles[i]).norm();
        ASSERT_LE(std::abs(d - sim::kRopeRest), 0.1 * sim::kRopeRest);
      }
    });
  }
}

TEST(Step, ClothStaysRigid) {
  const auto init = sim::make_env(Task::kWiping, 2);
  auto dists = [](const sim::EnvState& s) {
    std::vector<double> d;
    for (std::size_t i = 0; i < s.particles.size(); ++i) {
      for (std::size_t j = i + 1; j < s.particles.size(); ++j) d.push_back((s.particles[i] - s.particles[j]).norm());
    }
    return d;
  };
  const auto ref = dists(init);
  bool moved = false;
  const auto end = random_walk(Task::kWiping, 2, 300, [&](const sim::EnvState& s) {
    const auto d = dists(s);
    for (std::size_t i = 0; i < d.size(); ++i) ASSERT_NEAR(d[i], ref[i], 1e-9);
  });
  moved = (end.particles[8] - init.particles[8]).norm() > 1e-3;
  EXPECT_TRUE(moved);
}

TEST(Step, ParticlesStayInBounds) {
  for (auto task : kTasks) {
    random_walk(task, 5, 200, [](const sim::EnvState& s) {
      for (const auto& p : s.particles) {
        ASSERT_TRUE(s.bounds.contains(Vec3(p.x(), p.y(), 0.0), 1e-12));
      }
      ASSERT_TRUE(s.bounds.contains(s.effector, 1e-12));
    });
  }
}

TEST(Step, StationaryEffectorDissipates) {
  for (auto task : kTasks) {
    for (unsigned seed = 0; seed < 5; ++seed) {
      auto s = random_walk(task, seed, 60, [](const sim::EnvState&) {});
      const Vec3 here = s.effector;
      double speed = s.total_speed(), energy = s.kinetic_energy();
      for (int k = 0; k < 50; ++k) {
        s = sim::env_step(s, here, sim::kFrameDt);
        EXPECT_LE(s.total_speed(), speed + 1e-12) << sim::to_string(task) << " seed " << seed << " step " << k;
        EXPECT_LE(s.kinetic_energy(), energy + 1e-12);
        speed = s.total_speed();
        energy = s.kinetic_energy();
      }
    }
  }
}

TEST(Step, CirclingSpreadsGranules) {
  for (unsigned seed = 0; seed < 5; ++seed) {
    auto s = sim::make_env(Task::kStirring, seed);
    const double v0 = positional_variance(s);
    const std::size_t per = sim::demo_period_frames(Task::kStirring);
    for (std::size_t k = 0; k < 3 * per; ++k) {
      const double a = kTwoPi * static_cast<double>(k) / static_cast<double>(per);
      s = sim::env_step(s, Vec3(s.anchor.x() + 0.05 * std::cos(a), s.anchor.y() + 0.05 * std::sin(a), 0.01),
                        sim::kFrameDt);
    }
    EXPECT_GT(positional_variance(s), v0);
  }
}

TEST(Step, OutOfBoundsTargetIsClamped) {
  auto s = sim::make_env(Task::kWiping, 0);
  for (int k = 0; k < 50; ++k) s = sim::env_step(s, Vec3(-3, 9, 2), sim::kFrameDt);
  EXPECT_TRUE(s.bounds.contains(s.effector, 1e-12));
  EXPECT_THROW(sim::env_step(s, Vec3::Zero(), 0.0), std::invalid_argument);
}

TEST(Demo, DeterministicAndSelfScoring) {
  for (auto task : kTasks) {
    const auto a = sim::scripted_demo(task, 3, 7), b = sim::scripted_demo(task, 3, 7);
    EXPECT_EQ(a.demo.frames, b.demo.frames);
    EXPECT_EQ(a.exemplar.points, b.exemplar.points);
    EXPECT_EQ(a.demo.size(), 3 * sim::demo_period_frames(task));
    EXPECT_EQ(metrics::performance(a.exemplar, a.exemplar, sim::kWorkspace), 1.0);
  }
  EXPECT_THROW(sim::scripted_demo(Task::kWiping, 1, 0), std::invalid_argument);
}

TEST(Demo, ObjectsActuallyMove) {
  for (auto task : kTasks) {
    const auto d = sim::scripted_demo(task, 2, 0);
    double travel = 0.0;
    for (std::size_t k = 0; k < d.demo.frames.front().size(); ++k) {
      travel = std::max(travel, (d.demo.frames.back()[k] - d.demo.frames.front()[k]).norm());
      for (std::size_t t = 1; t < d.demo.size(); ++t) {
        travel = std::max(travel, (d.demo.frames[t][k] - d.demo.frames[0][k]).norm());
      }
    }
    EXPECT_GT(travel, 0.02) << sim::to_string(task);
  }
}

TEST(Play, TenMinutesAtFrameRate) {
  const auto play = sim::collect_play(Task::kWiping, 0, 600.0, 0);
  EXPECT_EQ(play.size(), 6000u);
  EXPECT_EQ(play.robot_keypoints.size(), 6000u);
  EXPECT_EQ(play.human_keypoints.size(), 6000u);
  for (const auto& p : play.robot_positions) ASSERT_TRUE(sim::kWorkspace.contains(p, 1e-12));
  EXPECT_EQ(play.robot_keypoints.num_keypoints(), play.human_keypoints.num_keypoints());
  std::size_t same = 0;
  for (std::size_t t = 0; t < play.size(); ++t) same += play.robot_keypoints.frames[t] == play.human_keypoints.frames[t];
  EXPECT_LT(same, play.size() / 2);
  EXPECT_THROW(sim::collect_play(Task::kWiping, 0, 0.0, 0), std::invalid_argument);
}

TEST(Environment, ExecutionIsDeterministic) {
  const sim::Environment env(Task::kStirring, 2);
  Trajectory plan;
  for (int k = 0; k < 40; ++k) plan.points.emplace_back(0.25 + 0.04 * std::cos(0.2 * k), 0.21 + 0.04 * std::sin(0.2 * k), 0.01);
  const auto a = env.execute(plan, 30), b = env.execute(plan, 30);
  EXPECT_EQ(a.video.frames, b.video.frames);
  EXPECT_EQ(a.effector.points, b.effector.points);
  EXPECT_EQ(a.video.size(), 30u);
}

TEST(Environment, SamplePlanHoldsEnds) {
  Trajectory plan;
  plan.dt = 0.5;
  plan.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  EXPECT_EQ(sim::sample_plan(plan, -1.0), plan.points[0]);
  EXPECT_EQ(sim::sample_plan(plan, 0.25), Vec3(0.5, 0, 0));
  EXPECT_EQ(sim::sample_plan(plan, 9.0), plan.points[1]);
}
