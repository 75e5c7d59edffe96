#pragma once

// Seeded particle environments for three periodic manipulation tasks.
//
// The table is viewed from above: objects live in the table plane and the
// keypoint oracle reports eight designated object points normalized by the
// workspace extent. The effector is a 3D point that moves toward its target
// with a capped speed and touches objects only below kContactHeight.
//
//   wiping    rigid cloth patch, dragged while the effector presses on it
//   winding   12-node rope anchored at a spool, end held while in contact
//   stirring  20 overdamped granules in a round tray, pushed by the spoon disk

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pskill/types.hpp"

namespace pskill::sim {

enum class Task { kWiping, kWinding, kStirring };

std::string to_string(Task task);
Task parse_task(std::string_view name);  // throws std::invalid_argument

inline const Box kWorkspace{Vec3(0.0, 0.0, 0.0), Vec3(0.50, 0.43, 0.10)};
inline constexpr double kContactHeight = 0.03;
inline constexpr double kSpeedCap = 0.5;     // m/s
inline constexpr double kFrameDt = 0.1;      // s
inline constexpr double kSubstepDt = 0.01;   // s
inline constexpr std::size_t kNumKeypoints = 8;

// Rope.
inline constexpr std::size_t kRopeNodes = 12;
inline constexpr double kRopeRest = 0.0115;
inline constexpr double kGrabRadius = 0.05;
// Cloth.
inline constexpr double kClothHalf = 0.05;
// Granules.
inline constexpr std::size_t kGranules = 20;
inline constexpr double kGranuleRadius = 0.007;
inline constexpr double kSpoonRadius = 0.03;
inline constexpr double kTrayRadius = 0.09;

struct EnvState {
  Task task = Task::kWiping;
  Box bounds = kWorkspace;
  double time = 0.0;
  Vec3 effector = Vec3::Zero();
  std::vector<Vec2> particles;
  std::vector<Vec2> velocities;
  Vec2 anchor = Vec2::Zero();  // spool (winding) or tray center (stirring)
  bool grasped = false;        // winding: rope end held
  std::vector<Vec2> rest;      // stirring: granule rest spots

  double kinetic_energy() const;  // 0.5 * sum |v|^2, unit masses
  double total_speed() const;
};

struct Execution {
  Trajectory effector;
  KeypointVideo video;
};

// A task-level demonstration: keypoint video plus the effector path that
// produced it (withheld from learners).
struct ScriptedDemo {
  KeypointVideo demo;
  Trajectory exemplar;
  std::size_t period_frames = 0;
};

EnvState make_env(Task task, std::uint64_t seed);
EnvState env_step(const EnvState& state, const Vec3& ee_target, double dt);
KeypointFrame observe_keypoints(const EnvState& state);
// Stirring keypoints in meters: centroids of eight angular granule sectors.
std::vector<Vec2> granule_cluster_centroids(const EnvState& state);

Vec2 normalize(const Vec2& p, const Box& bounds);
Vec2 denormalize(const Vec2& k, const Box& bounds);

// Frames per period of the scripted program for each task.
std::size_t demo_period_frames(Task task);
// Home pose of the effector at reset.
Vec3 home_position();

ScriptedDemo scripted_demo(Task task, std::size_t n_rep, std::uint64_t seed);

// Random-waypoint play in `task`'s scene; the human-surrogate stream comes
// from an independently seeded program in a separate scene instance.
PlayDataset collect_play(Task task, std::uint64_t env_seed, double duration, std::uint64_t seed);

// Steps a fresh environment through `n_frames` frames, targeting the plan
// position at the end of each frame.
class Environment {
 public:
  Environment(Task task, std::uint64_t seed) : task_(task), seed_(seed) {}

  Task task() const { return task_; }
  std::uint64_t seed() const { return seed_; }
  const Box& workspace() const { return kWorkspace; }
  EnvState reset() const { return make_env(task_, seed_); }

  // The effector starts at the plan's first point, as in the scripted demos.
  Execution execute(const Trajectory& plan, std::size_t n_frames) const;
  // Per-frame targets, already at frame rate; starts at home unless given.
  Execution execute_targets(const std::vector<Vec3>& targets, const std::optional<Vec3>& start = std::nullopt) const;

 private:
  Task task_;
  std::uint64_t seed_;
};

// Position of `plan` at time t, linearly interpolated and held at the ends.
Vec3 sample_plan(const Trajectory& plan, double t);

}  // namespace pskill::sim
