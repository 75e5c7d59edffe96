#pragma once

// Text formats shared by the tools:
//   trajectory CSV  header `t,x,y,z`, one row per sample, SI units
//   keypoint CSV    header `t,k0x,k0y,k1x,k1y,...`, normalized coordinates
// Numbers are written in shortest round-trip form, so re-reading a file
// reproduces the in-memory values exactly.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pskill/types.hpp"

namespace pskill {

std::string format_double(double v);
double parse_double(std::string_view text);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);

void write_keypoints_csv(std::ostream& out, const KeypointVideo& video);
KeypointVideo read_keypoints_csv(std::istream& in);

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj);
Trajectory load_trajectory(const std::filesystem::path& path);
void save_keypoints(const std::filesystem::path& path, const KeypointVideo& video);
KeypointVideo load_keypoints(const std::filesystem::path& path);

// Writes `<stem>_positions.csv`, `<stem>_robot_keypoints.csv` and
// `<stem>_human_keypoints.csv` under `dir`.
void save_play(const std::filesystem::path& dir, const std::string& stem, const PlayDataset& play);
PlayDataset load_play(const std::filesystem::path& dir, const std::string& stem);

}  // namespace pskill
