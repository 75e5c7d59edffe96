#include "pskill/validate.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "pskill/bo.hpp"
#include "pskill/gp.hpp"
#include "pskill/harness.hpp"
#include "pskill/imagine.hpp"
#include "pskill/metrics.hpp"
#include "pskill/rdmp.hpp"
#include "pskill/rng.hpp"
#include "pskill/sim.hpp"

namespace pskill::validate {

namespace {

KeypointVideo constant_video(std::size_t frames, std::size_t nk, double value) {
  KeypointVideo v;
  v.frames.assign(frames, KeypointFrame(nk, Vec2::Constant(value)));
  return v;
}

Check distance_identities() {
  const auto a = constant_video(30, 8, 0.4);
  const auto b = constant_video(30, 8, 0.5);
  const metrics::DistanceConfig cfg;
  const double self = metrics::keypoint_distance(a, a, cfg);
  const double off = metrics::keypoint_distance(a, b, cfg);
  const double back = metrics::keypoint_distance(b, a, cfg);
  const bool ok = self == 0.0 && std::abs(off - 0.2) < 1e-12 && off == back;
  return {"keypoint distance identity/offset/symmetry", ok,
          "self=" + std::to_string(self) + " offset=" + std::to_string(off)};
}

Check index_rule() {
  const std::vector<std::size_t> want{0, 11, 23, 34, 46, 57, 69};
  bool ok = true;
  for (std::size_t i = 0; i < want.size(); ++i) ok = ok && even_index(i, 7, 70) == want[i];
  return {"even waypoint indices", ok, ""};
}

Check limit_cycle() {
  Trajectory demo;
  demo.dt = 0.01;
  for (int k = 0; k <= 400; ++k) {
    const double t = k * demo.dt;
    const double w = rdmp::kTwoPi * t / 2.0;
    demo.points.emplace_back(0.2 + 0.05 * std::sin(w) + 0.02 * std::sin(2 * w), 0.2 + 0.05 * std::cos(w), 0.05);
  }
  const auto p = rdmp::fit_from_demo(demo, rdmp::kDefaultBasis, 2.0);
  const auto roll = rdmp::rollout_from(p, 5.0, demo.points.front());
  const std::size_t per = static_cast<std::size_t>(rdmp::kStepsPerPeriod);
  double err = 0.0;
  for (std::size_t i = 3 * per; i + per < roll.size(); ++i) {
    err = std::max(err, (roll.points[i + per] - roll.points[i]).norm());
  }
  return {"rhythmic DMP converges to a limit cycle", err < 1e-4, "max period drift " + std::to_string(err)};
}

Check gp_interpolation() {
  Rng rng = make_rng(3, 0);
  std::vector<Eigen::VectorXd> x;
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) {
    x.push_back(Eigen::Vector2d(uniform(rng, 0, 1), uniform(rng, 0, 1)));
    y[i] = std::sin(3 * x.back()[0]) + x.back()[1];
  }
  gp::Hyperparams h;
  h.signal_variance = 1.0;
  h.length_scales = Eigen::VectorXd::Constant(2, 1.0);
  h.noise_variance = gp::kMinJitter;
  const auto m = gp::GpModel::fit(x, y, false, h);
  double err = 0.0;
  for (int i = 0; i < 8; ++i) err = std::max(err, std::abs(m.posterior(x[static_cast<std::size_t>(i)]).mean - y[i]));
  const auto post = m.posterior(Eigen::Vector2d(0.3, 0.7));
  const double u = gp::ucb(m, Eigen::Vector2d(0.3, 0.7), {0.1});
  const bool ok = err < 1e-3 && u == post.mean + 0.1 * post.std;
  return {"GP interpolates training data; ucb = mean + beta*std", ok, "max residual " + std::to_string(err)};
}

Check period_estimates() {
  int good = 0, total = 0;
  for (auto task : {sim::Task::kWiping, sim::Task::kWinding, sim::Task::kStirring}) {
    for (std::size_t n = 2; n <= 4; ++n) {
      ++total;
      const auto d = sim::scripted_demo(task, n, 0);
      try {
        if (metrics::estimate_periods(d.demo).n_rep == n) ++good;
      } catch (const metrics::NoPeriodicityError&) {
      }
    }
  }
  return {"period count on scripted demos", good == total, std::to_string(good) + "/" + std::to_string(total)};
}

Check junctions() {
  const auto play = sim::collect_play(sim::Task::kWiping, 0, 120.0, 0);
  const auto segs = imagine::sample_segments(play, 300, 10, 1);
  const double gap = imagine::junction_threshold(imagine::displacement_scale(segs));
  const auto out = imagine::stitch_imagined(segs, 4, gap, 500, 2);
  std::size_t bad = 0, checked = 0;
  for (const auto& t : out) {
    for (std::size_t k = 0; k + 1 < t.segment_ids.size(); ++k, ++checked) {
      if ((segs[t.segment_ids[k]].last() - segs[t.segment_ids[k + 1]].first()).norm() > gap) ++bad;
    }
  }
  return {"imagined junction gaps within threshold", bad == 0,
          std::to_string(checked) + " junctions, " + std::to_string(bad) + " violations"};
}

Check sim_determinism() {
  const sim::Environment env(sim::Task::kWinding, 4);
  Trajectory plan;
  plan.dt = 0.1;
  for (int k = 0; k < 50; ++k) {
    const double a = 0.3 * k;
    plan.points.emplace_back(0.25 + 0.11 * std::cos(a), 0.215 + 0.11 * std::sin(a), 0.01);
  }
  const auto a = env.execute(plan, 40);
  const auto b = env.execute(plan, 40);
  bool same = a.video.frames.size() == b.video.frames.size();
  for (std::size_t t = 0; same && t < a.video.frames.size(); ++t) {
    for (std::size_t k = 0; k < a.video.frames[t].size(); ++k) same = same && a.video.frames[t][k] == b.video.frames[t][k];
  }
  return {"environment executions are deterministic", same, ""};
}

Check config_round_trip() {
  harness::ExperimentConfig cfg;
  cfg.task = sim::Task::kStirring;
  cfg.method = harness::Method::kMbil;
  cfg.seeds = {4, 9};
  cfg.budget = 12;
  cfg.bo.imagine.n_segments = 333;
  std::stringstream s1;
  harness::write_config(s1, cfg);
  std::stringstream in(s1.str());
  std::stringstream s2;
  harness::write_config(s2, harness::read_config(in));
  return {"config snapshot round-trips", s1.str() == s2.str(), ""};
}

}  // namespace

std::vector<Check> run_all() {
  const std::vector<std::function<Check()>> checks = {distance_identities, index_rule,      limit_cycle,
                                                      gp_interpolation,    period_estimates, junctions,
                                                      sim_determinism,     config_round_trip};
  std::vector<Check> out;
  for (const auto& c : checks) {
    try {
      out.push_back(c());
    } catch (const std::exception& e) {
      out.push_back({"(check threw)", false, e.what()});
    }
  }
  return out;
}

}  // namespace pskill::validate
