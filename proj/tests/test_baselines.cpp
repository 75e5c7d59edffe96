#include <random>

#include <gtest/gtest.h>

#include "pskill/baselines.hpp"

using namespace pskill;

namespace {

KeypointFrame frame_from(const Eigen::VectorXd& v) {
  KeypointFrame f;
  for (Eigen::Index i = 0; i + 1 < v.size(); i += 2) f.emplace_back(v[i], v[i + 1]);
  return f;
}

Eigen::VectorXd flat(const KeypointFrame& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(2 * f.size()));
  for (std::size_t k = 0; k < f.size(); ++k) v.segment<2>(static_cast<Eigen::Index>(2 * k)) = f[k];
  return v;
}

double l1_mean(const KeypointFrame& a, const KeypointFrame& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]).cwiseAbs().sum();
  return s / static_cast<double>(a.size());
}

// Exact linear dynamics kp' = kp + G^T a on 3 keypoints.
struct LinearWorld {
  Eigen::MatrixXd G = Eigen::MatrixXd::Random(3, 6);

  std::vector<baselines::Transition> sample(std::size_t n, unsigned seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<baselines::Transition> out;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd kp(6);
      for (int j = 0; j < 6; ++j) kp[j] = 0.5 + 0.3 * u(rng);
      const Vec3 a(0.05 * u(rng), 0.05 * u(rng), 0.05 * u(rng));
      out.push_back({frame_from(kp), a, frame_from(kp + G.transpose() * a)});
    }
    return out;
  }
};

}  // namespace

TEST(Regressor, ExactLookupWithOneNeighbor) {
  const auto play = sim::collect_play(sim::Task::kWinding, 2, 60.0, 2);
  baselines::KeypointRegressor reg(1);
  reg.fit(play.robot_keypoints.frames, play.robot_positions);
  EXPECT_EQ(reg.size(), play.size());
  for (std::size_t t = 0; t < play.size(); t += 37) {
    const Vec3 p = reg.predict(play.robot_keypoints.frames[t]);
    // Identical frames may repeat in play; the prediction is their mean.
    Vec3 mean = Vec3::Zero();
    int n = 0;
    for (std::size_t s = 0; s < play.size(); ++s) {
      if (play.robot_keypoints.frames[s] == play.robot_keypoints.frames[t]) {
        mean += play.robot_positions[s];
        ++n;
      }
    }
    EXPECT_LT((p - mean / n).norm(), 1e-12);
  }
}

TEST(Regressor, ErrorsAndRepeatability) {
  baselines::KeypointRegressor reg(5);
  EXPECT_THROW(reg.predict(KeypointFrame(8, Vec2::Zero())), std::logic_error);
  EXPECT_THROW(reg.fit({}, {}), std::invalid_argument);
  const auto play = sim::collect_play(sim::Task::kWiping, 1, 60.0, 1);
  reg.fit(play.robot_keypoints.frames, play.robot_positions);
  const KeypointFrame q(8, Vec2(0.4, 0.3));
  EXPECT_EQ(reg.predict(q), reg.predict(q));
  EXPECT_THROW(reg.predict(KeypointFrame(3, Vec2::Zero())), std::invalid_argument);
}

TEST(Dynamics, RecoversLinearWorld) {
  std::srand(3);
  const LinearWorld w;
  baselines::KeypointDynamicsModel model(1e-9);
  model.fit(w.sample(400, 1));
  for (const auto& t : w.sample(20, 2)) {
    EXPECT_LT((flat(model.predict(t.before, t.action)) - flat(t.after)).cwiseAbs().maxCoeff(), 1e-5);
  }
  const auto t = w.sample(1, 3).front();
  const Eigen::VectorXd split = model.predict_base(t.before) + model.action_gain().transpose() * t.action;
  EXPECT_LT((split - flat(model.predict(t.before, t.action))).norm(), 1e-12);
}

TEST(Dynamics, BestActionIsExhaustiveArgmin) {
  std::srand(4);
  const LinearWorld w;
  baselines::KeypointDynamicsModel model(1e-9);
  model.fit(w.sample(400, 5));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<Vec3> actions;
    for (int i = 0; i < 500; ++i) actions.emplace_back(u(rng), u(rng), u(rng));
    const auto start = w.sample(1, 10 + rep).front();
    // Reachable goal: the outcome of one of the sampled actions.
    const KeypointFrame goal = frame_from(flat(start.before) + w.G.transpose() * actions[123]);
    const std::size_t pick = baselines::best_action(model, start.before, goal, actions);
    double best = 1e300;
    for (const auto& a : actions) best = std::min(best, l1_mean(model.predict(start.before, a), goal));
    EXPECT_NEAR(l1_mean(model.predict(start.before, actions[pick]), goal), best, 1e-12);
    EXPECT_LT(l1_mean(model.predict(start.before, actions[pick]), goal), 1e-5);
  }
  EXPECT_EQ(baselines::best_action(model, w.sample(1, 0).front().before, frame_from(Eigen::VectorXd::Zero(6)),
                                   {Vec3(0.01, 0, 0)}),
            0u);
}

TEST(Play, TransitionsSkipResets) {
  const auto play = sim::collect_play(sim::Task::kWiping, 0, 120.0, 0);
  const auto tr = baselines::play_transitions(play);
  EXPECT_LT(tr.size(), play.size() - 1);
  for (const auto& t : tr) EXPECT_LE(t.action.norm(), sim::kSpeedCap * sim::kFrameDt + 1e-9);
}

TEST(DirectImitation, OnePolicyRecord) {
  const auto d = sim::scripted_demo(sim::Task::kWiping, 3, 1);
  const auto play = sim::collect_play(sim::Task::kWiping, 1, 300.0, 1);
  const sim::Environment env(sim::Task::kWiping, 1);
  const bo::PerformanceFn perf = [&](const Trajectory& t) { return metrics::performance(d.exemplar, t, env.workspace()); };
  const auto a = baselines::direct_imitation(play, d.demo, env, perf, 7);
  const auto b = baselines::direct_imitation(play, d.demo, env, perf, 7);
  ASSERT_EQ(a.records.size(), 1u);
  EXPECT_EQ(a.records[0].provenance, bo::Provenance::kPolicy);
  EXPECT_EQ(a.records[0].objective, b.records[0].objective);
  EXPECT_EQ(a.performance, a.records[0].performance);
  EXPECT_EQ(a.best_execution.points, b.best_execution.points);
}

TEST(Mbil, EpisodesAndDegenerateSampler) {
  const auto d = sim::scripted_demo(sim::Task::kWinding, 2, 0);
  const auto play = sim::collect_play(sim::Task::kWinding, 0, 120.0, 0);
  const sim::Environment env(sim::Task::kWinding, 0);
  const bo::PerformanceFn perf = [&](const Trajectory& t) { return metrics::performance(d.exemplar, t, env.workspace()); };
  baselines::MbilConfig cfg;
  cfg.episodes = 4;
  cfg.n_action_samples = 1;
  const auto r = baselines::mbil(play, d.demo, env, cfg, perf, 7);
  ASSERT_EQ(r.records.size(), 4u);
  for (std::size_t i = 0; i < r.records.size(); ++i) {
    EXPECT_EQ(r.records[i].trial, i + 1);
    EXPECT_EQ(r.records[i].provenance, bo::Provenance::kPolicy);
    EXPECT_TRUE(std::isfinite(r.records[i].objective));
  }
  const auto again = baselines::mbil(play, d.demo, env, cfg, perf, 7);
  EXPECT_EQ(again.records.back().objective, r.records.back().objective);
}
