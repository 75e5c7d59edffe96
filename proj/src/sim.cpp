#include "pskill/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pskill/rng.hpp"

namespace pskill::sim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = kTwoPi / 2.0;

// Streams for mix_seed.
enum Stream : std::uint64_t { kLayout = 1, kDemoStream = 2, kRobotPlay = 3, kHumanPlay = 4 };

constexpr double kLayoutJitter = 0.01;
constexpr double kGranuleRelax = 1.5;      // 1/s, overdamped pull toward rest
constexpr double kSpoonWake = 0.12;      // viscous coupling radius
constexpr double kWakeGain = 0.8;        // fraction of spoon velocity at its center
constexpr int kFabrikIterations = 8;
constexpr std::size_t kClothCenter = 8;  // index of the patch center particle
constexpr std::size_t kRopeFirstKeypoint = kRopeNodes - kNumKeypoints;

// Scripted program constants.
constexpr double kWipeAmplitude = 0.10;
constexpr double kWipeShift = 0.04;  // per period, +y
constexpr double kWindRadius = 0.11;
constexpr double kStirRadius = 0.05;
constexpr double kDemoHeight = 0.01;
constexpr double kDemoJitter = 0.05;  // relative amplitude per period

// Play program constants.
constexpr std::size_t kPlayEpisodeFrames = 300;
constexpr double kPlayObjectProbability = 0.6;
constexpr double kPlayObjectSpread = 0.05;
constexpr double kPlayMaxLowHeight = 0.05;

Vec2 xy(const Vec3& p) { return p.head<2>(); }

Vec2 unit_or(const Vec2& v, const Vec2& fallback) {
  const double n = v.norm();
  return n > 1e-12 ? Vec2(v / n) : fallback;
}

Vec2 clamp_xy(const Vec2& p, const Box& b) {
  return Vec2(std::clamp(p.x(), b.lo.x(), b.hi.x()), std::clamp(p.y(), b.lo.y(), b.hi.y()));
}

Vec2 object_centroid(const EnvState& s) {
  Vec2 c = Vec2::Zero();
  for (const auto& p : s.particles) c += p;
  return c / static_cast<double>(s.particles.size());
}

void step_cloth(EnvState& s, const Vec3& prev, const Vec3& next, double h) {
  const Vec2 center = s.particles[kClothCenter];
  const Vec2 rel = xy(prev) - center;
  const double reach = kClothHalf + 0.005;
  const bool on_cloth = std::abs(rel.x()) <= reach && std::abs(rel.y()) <= reach;
  if (next.z() > kContactHeight || !on_cloth) {
    for (auto& v : s.velocities) v.setZero();
    return;
  }
  Vec2 shift = xy(next) - xy(prev);
  Vec2 lo = s.particles.front(), hi = s.particles.front();
  for (const auto& p : s.particles) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  for (int d = 0; d < 2; ++d) shift[d] = std::clamp(shift[d], s.bounds.lo[d] - lo[d], s.bounds.hi[d] - hi[d]);
  for (auto& p : s.particles) p += shift;
  for (auto& v : s.velocities) v = shift / h;
}

void step_rope(EnvState& s, const Vec3& prev, const Vec3& next, double h) {
  const bool contact = next.z() <= kContactHeight;
  auto& p = s.particles;
  if (!s.grasped && contact && (xy(prev) - p.back()).norm() <= kGrabRadius) s.grasped = true;
  if (s.grasped && !contact) s.grasped = false;
  if (!s.grasped) {
    for (auto& v : s.velocities) v.setZero();
    return;
  }
  const std::vector<Vec2> before = p;
  const double length = kRopeRest * static_cast<double>(kRopeNodes - 1);
  Vec2 target = xy(next);
  const Vec2 from_anchor = target - s.anchor;
  if (from_anchor.norm() > 0.98 * length) target = s.anchor + unit_or(from_anchor, Vec2::UnitX()) * 0.98 * length;

  // FABRIK: alternate passes from the held end and from the anchor. The last
  // pass starts at the anchor, so every segment leaves at rest length.
  const std::size_t n = p.size();
  for (int it = 0; it < kFabrikIterations; ++it) {
    p[n - 1] = target;
    for (std::size_t i = n - 1; i-- > 0;) p[i] = p[i + 1] + kRopeRest * unit_or(p[i] - p[i + 1], -Vec2::UnitX());
    p[0] = s.anchor;
    for (std::size_t i = 1; i < n; ++i) p[i] = p[i - 1] + kRopeRest * unit_or(p[i] - p[i - 1], Vec2::UnitX());
  }
  for (std::size_t i = 0; i < n; ++i) s.velocities[i] = (p[i] - before[i]) / h;
}

// Overdamped granules: no inertia, so velocity is set each substep by the
// pull toward the rest spot plus the spoon's viscous wake.
void step_granules(EnvState& s, const Vec3& prev, const Vec3& next, double h) {
  auto& p = s.particles;
  auto& v = s.velocities;
  const std::vector<Vec2> before = p;
  // A resting spoon neither drags nor pushes.
  const bool contact = next.z() <= kContactHeight && (xy(next) - xy(prev)).norm() > 0.0;
  const Vec2 e = xy(next);
  const Vec2 u = (xy(next) - xy(prev)) / h;
  const double reach = kSpoonRadius + kGranuleRadius;
  for (std::size_t i = 0; i < p.size(); ++i) {
    Vec2 vel = -kGranuleRelax * (p[i] - s.rest[i]);
    if (contact) {
      const double dist = (p[i] - e).norm();
      if (dist < kSpoonWake) {
        vel += kWakeGain * (1.0 - dist / kSpoonWake) * u;
      }
    }
    p[i] += h * vel;
    if (contact) {
      const Vec2 d = p[i] - e;
      if (d.norm() < reach) p[i] = e + unit_or(d, unit_or(u, Vec2::UnitX())) * reach;
    }
  }
  const double wall = kTrayRadius - kGranuleRadius;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Vec2 d = p[i] - s.anchor;
    if (d.norm() > wall) p[i] = s.anchor + d.normalized() * wall;
    p[i] = clamp_xy(p[i], s.bounds);
    v[i] = (p[i] - before[i]) / h;
  }
}

// Smooth (C1) interpolation between successive random waypoints.
class WaypointProgram {
 public:
  WaypointProgram(Rng rng, Task task) : rng_(std::move(rng)), task_(task) {}

  Vec3 next_target(const EnvState& s, double dt) {
    if (elapsed_ >= duration_) {
      from_ = s.effector;
      to_ = draw(s);
      duration_ = uniform(rng_, 1.0, 3.0);
      elapsed_ = 0.0;
    }
    elapsed_ += dt;
    const double a = std::min(elapsed_ / duration_, 1.0);
    return from_ + (to_ - from_) * (0.5 - 0.5 * std::cos(kPi * a));
  }

  void restart() { elapsed_ = duration_ = 0.0; }

 private:
  Vec3 draw(const EnvState& s) {
    const Box& b = s.bounds;
    if (uniform(rng_, 0.0, 1.0) < kPlayObjectProbability) {
      const Vec2 c = task_ == Task::kWinding ? s.particles.back() : object_centroid(s);
      const Vec3 p(c.x() + gaussian(rng_, kPlayObjectSpread), c.y() + gaussian(rng_, kPlayObjectSpread),
                   uniform(rng_, b.lo.z(), kPlayMaxLowHeight));
      return b.clamp(p);
    }
    return Vec3(uniform(rng_, b.lo.x(), b.hi.x()), uniform(rng_, b.lo.y(), b.hi.y()),
                uniform(rng_, b.lo.z(), b.hi.z()));
  }

  Rng rng_;
  Task task_;
  Vec3 from_ = Vec3::Zero();
  Vec3 to_ = Vec3::Zero();
  double duration_ = 0.0;
  double elapsed_ = 0.0;
};

struct PlayStream {
  std::vector<Vec3> positions;
  KeypointVideo keypoints;
};

PlayStream run_play(Task task, std::uint64_t env_seed, std::size_t frames, Rng rng) {
  PlayStream out;
  out.keypoints.dt = kFrameDt;
  out.positions.reserve(frames);
  out.keypoints.frames.reserve(frames);
  WaypointProgram program(std::move(rng), task);
  EnvState s;
  for (std::size_t k = 0; k < frames; ++k) {
    if (k % kPlayEpisodeFrames == 0) {
      s = make_env(task, env_seed);
      program.restart();
    }
    s = env_step(s, program.next_target(s, kFrameDt), kFrameDt);
    out.positions.push_back(s.effector);
    out.keypoints.frames.push_back(observe_keypoints(s));
  }
  return out;
}

// Per-period amplitude factors, blended linearly across each period.
double jitter_factor(const std::vector<double>& factors, double periods) {
  const auto p = static_cast<std::size_t>(std::max(0.0, std::floor(periods)));
  const double frac = periods - static_cast<double>(p);
  const double a = factors[std::min(p, factors.size() - 1)];
  const double b = factors[std::min(p + 1, factors.size() - 1)];
  return a + (b - a) * frac;
}

Vec3 demo_program(const EnvState& init, Task task, const std::vector<double>& factors, double period, double t) {
  const double periods = t / period;
  const double phase = kTwoPi * periods;
  const double a = jitter_factor(factors, periods);
  switch (task) {
    case Task::kWiping: {
      const Vec2 c = init.particles[kClothCenter];
      return Vec3(c.x() + kWipeAmplitude * a * std::sin(phase), c.y() + kWipeShift * periods, kDemoHeight);
    }
    case Task::kWinding:
      return Vec3(init.anchor.x() + kWindRadius * a * std::cos(phase),
                  init.anchor.y() + kWindRadius * a * std::sin(phase), kDemoHeight);
    case Task::kStirring:
      return Vec3(init.anchor.x() + kStirRadius * a * std::cos(phase),
                  init.anchor.y() + kStirRadius * a * std::sin(phase), kDemoHeight);
  }
  throw std::logic_error("unreachable");
}

}  // namespace

std::string to_string(Task task) {
  switch (task) {
    case Task::kWiping: return "wiping";
    case Task::kWinding: return "winding";
    case Task::kStirring: return "stirring";
  }
  return "unknown";
}

Task parse_task(std::string_view name) {
  if (name == "wiping") return Task::kWiping;
  if (name == "winding") return Task::kWinding;
  if (name == "stirring") return Task::kStirring;
  throw std::invalid_argument("unknown task: " + std::string(name));
}

double EnvState::kinetic_energy() const {
  double e = 0.0;
  for (const auto& v : velocities) e += 0.5 * v.squaredNorm();
  return e;
}

double EnvState::total_speed() const {
  double e = 0.0;
  for (const auto& v : velocities) e += v.norm();
  return e;
}

Vec3 home_position() { return Vec3(0.25, 0.215, 0.08); }

std::size_t demo_period_frames(Task task) {
  switch (task) {
    case Task::kWiping: return 40;
    case Task::kWinding: return 50;
    case Task::kStirring: return 30;
  }
  return 40;
}

EnvState make_env(Task task, std::uint64_t seed) {
  Rng rng = make_rng(seed, kLayout + 16 * static_cast<std::uint64_t>(task));
  auto jitter = [&] { return Vec2(uniform(rng, -kLayoutJitter, kLayoutJitter), uniform(rng, -kLayoutJitter, kLayoutJitter)); };

  EnvState s;
  s.task = task;
  s.effector = home_position();
  switch (task) {
    case Task::kWiping: {
      const Vec2 c = Vec2(0.20, 0.09) + jitter();
      const double h = kClothHalf;
      // Corners and edge midpoints first (the keypoints), then the center.
      s.particles = {c + Vec2(-h, -h), c + Vec2(0, -h), c + Vec2(h, -h), c + Vec2(h, 0),
                     c + Vec2(h, h),   c + Vec2(0, h),  c + Vec2(-h, h), c + Vec2(-h, 0), c};
      break;
    }
    case Task::kWinding: {
      s.anchor = Vec2(0.25, 0.215) + jitter();
      for (std::size_t i = 0; i < kRopeNodes; ++i) {
        s.particles.push_back(s.anchor + Vec2(kRopeRest * static_cast<double>(i), 0.0));
      }
      break;
    }
    case Task::kStirring: {
      s.anchor = Vec2(0.25, 0.215) + jitter();
      s.particles.push_back(s.anchor);
      for (int ring = 1; ring <= 2; ++ring) {
        const int count = ring == 1 ? 6 : 13;
        const double r = 0.015 * ring;
        for (int i = 0; i < count; ++i) {
          const double a = kTwoPi * i / count + uniform(rng, -0.05, 0.05);
          s.particles.push_back(s.anchor + r * Vec2(std::cos(a), std::sin(a)));
        }
      }
      break;
    }
  }
  s.velocities.assign(s.particles.size(), Vec2::Zero());
  if (task == Task::kStirring) s.rest = s.particles;
  return s;
}

EnvState env_step(const EnvState& state, const Vec3& ee_target, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("env_step: dt must be positive");
  EnvState s = state;
  const Vec3 target = s.bounds.clamp(ee_target);
  const int substeps = std::max(1, static_cast<int>(std::ceil(dt / kSubstepDt - 1e-9)));
  const double h = dt / substeps;
  for (int i = 0; i < substeps; ++i) {
    const Vec3 prev = s.effector;
    Vec3 move = target - prev;
    const double cap = kSpeedCap * h;
    if (move.norm() > cap) move *= cap / move.norm();
    const Vec3 next = s.bounds.clamp(prev + move);
    switch (s.task) {
      case Task::kWiping: step_cloth(s, prev, next, h); break;
      case Task::kWinding: step_rope(s, prev, next, h); break;
      case Task::kStirring: step_granules(s, prev, next, h); break;
    }
    s.effector = next;
    s.time += h;
  }
  return s;
}

Vec2 normalize(const Vec2& p, const Box& bounds) {
  const Vec2 lo = bounds.lo.head<2>();
  const Vec2 ext = bounds.extent().head<2>();
  return ((p - lo).array() / ext.array()).matrix();
}

Vec2 denormalize(const Vec2& k, const Box& bounds) {
  return bounds.lo.head<2>() + (k.array() * bounds.extent().head<2>().array()).matrix();
}

std::vector<Vec2> granule_cluster_centroids(const EnvState& s) {
  // Clusters are the eight angular sectors of the rest layout around the
  // tray center; the central granule belongs to none.
  std::vector<Vec2> sum(kNumKeypoints, Vec2::Zero());
  std::vector<int> count(kNumKeypoints, 0);
  for (std::size_t i = 0; i < s.particles.size(); ++i) {
    const Vec2 d = s.rest[i] - s.anchor;
    if (d.norm() < 1e-9) continue;
    const double a = std::atan2(d.y(), d.x()) + kPi;
    const auto k = std::min(kNumKeypoints - 1, static_cast<std::size_t>(a / kTwoPi * kNumKeypoints));
    sum[k] += s.particles[i];
    ++count[k];
  }
  for (std::size_t k = 0; k < kNumKeypoints; ++k) {
    if (count[k] == 0) throw std::logic_error("granule_cluster_centroids: empty cluster");
    sum[k] /= count[k];
  }
  return sum;
}

KeypointFrame observe_keypoints(const EnvState& s) {
  KeypointFrame f;
  f.reserve(kNumKeypoints);
  auto add = [&](const Vec2& p) { f.push_back(normalize(p, s.bounds).cwiseMax(0.0).cwiseMin(1.0)); };
  switch (s.task) {
    case Task::kWiping:
      for (std::size_t i = 0; i < kNumKeypoints; ++i) add(s.particles[i]);
      break;
    case Task::kWinding:
      for (std::size_t i = kRopeFirstKeypoint; i < kRopeNodes; ++i) add(s.particles[i]);
      break;
    case Task::kStirring:
      for (const auto& c : granule_cluster_centroids(s)) add(c);
      break;
  }
  return f;
}

ScriptedDemo scripted_demo(Task task, std::size_t n_rep, std::uint64_t seed) {
  if (n_rep < 2) throw std::invalid_argument("scripted_demo: need at least 2 repetitions");
  Rng rng = make_rng(seed, kDemoStream + 16 * static_cast<std::uint64_t>(task));
  std::vector<double> factors(n_rep + 1);
  for (auto& f : factors) f = 1.0 + uniform(rng, -kDemoJitter, kDemoJitter);

  ScriptedDemo out;
  out.period_frames = demo_period_frames(task);
  const double period = static_cast<double>(out.period_frames) * kFrameDt;
  const std::size_t frames = n_rep * out.period_frames;

  const EnvState init = make_env(task, seed);
  EnvState s = init;
  s.effector = demo_program(init, task, factors, period, 0.0);
  out.demo.dt = kFrameDt;
  out.exemplar.dt = kFrameDt;
  for (std::size_t k = 0; k < frames; ++k) {
    const double t = static_cast<double>(k + 1) * kFrameDt;
    s = env_step(s, demo_program(init, task, factors, period, t), kFrameDt);
    out.exemplar.points.push_back(s.effector);
    out.demo.frames.push_back(observe_keypoints(s));
  }
  return out;
}

PlayDataset collect_play(Task task, std::uint64_t env_seed, double duration, std::uint64_t seed) {
  if (!(duration > 0.0)) throw std::invalid_argument("collect_play: duration must be positive");
  const auto frames = static_cast<std::size_t>(std::llround(duration / kFrameDt));
  PlayStream robot = run_play(task, env_seed, frames, make_rng(seed, kRobotPlay));
  PlayStream human = run_play(task, env_seed, frames, make_rng(seed, kHumanPlay));
  PlayDataset play;
  play.dt = kFrameDt;
  play.robot_positions = std::move(robot.positions);
  play.robot_keypoints = std::move(robot.keypoints);
  play.human_keypoints = std::move(human.keypoints);
  return play;
}

Vec3 sample_plan(const Trajectory& plan, double t) {
  if (plan.empty()) throw std::invalid_argument("sample_plan: empty plan");
  const double u = t / plan.dt;
  if (u <= 0.0) return plan.points.front();
  const auto i = static_cast<std::size_t>(std::floor(u));
  if (i + 1 >= plan.size()) return plan.points.back();
  const double a = u - static_cast<double>(i);
  return (1.0 - a) * plan.points[i] + a * plan.points[i + 1];
}

Execution Environment::execute(const Trajectory& plan, std::size_t n_frames) const {
  std::vector<Vec3> targets;
  targets.reserve(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) targets.push_back(sample_plan(plan, static_cast<double>(k + 1) * kFrameDt));
  return execute_targets(targets, sample_plan(plan, 0.0));
}

Execution Environment::execute_targets(const std::vector<Vec3>& targets, const std::optional<Vec3>& start) const {
  Execution ex;
  ex.effector.dt = kFrameDt;
  ex.video.dt = kFrameDt;
  EnvState s = reset();
  if (start) s.effector = s.bounds.clamp(*start);
  for (const auto& target : targets) {
    s = env_step(s, target, kFrameDt);
    ex.effector.points.push_back(s.effector);
    ex.video.frames.push_back(observe_keypoints(s));
  }
  return ex;
}

}  // namespace pskill::sim
