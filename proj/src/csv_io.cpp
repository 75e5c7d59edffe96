#include "pskill/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace pskill {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

// Rows after the header, split on commas. Returns the header separately.
std::vector<std::vector<std::string>> read_rows(std::istream& in, std::string& header) {
  if (!std::getline(in, header)) throw std::invalid_argument("csv: missing header");
  header = trim(header);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    rows.push_back(split(line, ','));
  }
  return rows;
}

double infer_dt(const std::vector<std::vector<std::string>>& rows) {
  if (rows.size() < 2) return 0.1;
  return parse_double(rows[1][0]) - parse_double(rows[0][0]);
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  const std::string s = trim(text);
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  return v;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,x,y,z\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto& p = traj.points[i];
    out << format_double(traj.dt * static_cast<double>(i)) << ',' << format_double(p.x()) << ','
        << format_double(p.y()) << ',' << format_double(p.z()) << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string header;
  const auto rows = read_rows(in, header);
  if (header != "t,x,y,z") throw std::invalid_argument("trajectory csv: expected header t,x,y,z");
  Trajectory traj;
  traj.dt = infer_dt(rows);
  for (const auto& r : rows) {
    if (r.size() != 4) throw std::invalid_argument("trajectory csv: expected 4 columns");
    traj.points.emplace_back(parse_double(r[1]), parse_double(r[2]), parse_double(r[3]));
  }
  return traj;
}

void write_keypoints_csv(std::ostream& out, const KeypointVideo& video) {
  video.check_consistent();
  const std::size_t nk = video.num_keypoints();
  out << 't';
  for (std::size_t k = 0; k < nk; ++k) out << ",k" << k << "x,k" << k << 'y';
  out << '\n';
  for (std::size_t i = 0; i < video.size(); ++i) {
    out << format_double(video.dt * static_cast<double>(i));
    for (const auto& kp : video.frames[i]) out << ',' << format_double(kp.x()) << ',' << format_double(kp.y());
    out << '\n';
  }
}

KeypointVideo read_keypoints_csv(std::istream& in) {
  std::string header;
  const auto rows = read_rows(in, header);
  const auto cols = split(header, ',');
  if (cols.empty() || cols[0] != "t" || cols.size() % 2 != 1) {
    throw std::invalid_argument("keypoint csv: expected header t,k0x,k0y,...");
  }
  KeypointVideo video;
  video.dt = infer_dt(rows);
  for (const auto& r : rows) {
    if (r.size() != cols.size()) throw std::invalid_argument("keypoint csv: ragged row");
    KeypointFrame f;
    for (std::size_t c = 1; c + 1 < r.size(); c += 2) f.emplace_back(parse_double(r[c]), parse_double(r[c + 1]));
    video.frames.push_back(std::move(f));
  }
  return video;
}

void save_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  auto out = open_out(path);
  write_trajectory_csv(out, traj);
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_trajectory_csv(in);
}

void save_keypoints(const std::filesystem::path& path, const KeypointVideo& video) {
  auto out = open_out(path);
  write_keypoints_csv(out, video);
}

KeypointVideo load_keypoints(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_keypoints_csv(in);
}

void save_play(const std::filesystem::path& dir, const std::string& stem, const PlayDataset& play) {
  play.check_consistent();
  save_trajectory(dir / (stem + "_positions.csv"), Trajectory{play.dt, play.robot_positions});
  save_keypoints(dir / (stem + "_robot_keypoints.csv"), play.robot_keypoints);
  save_keypoints(dir / (stem + "_human_keypoints.csv"), play.human_keypoints);
}

PlayDataset load_play(const std::filesystem::path& dir, const std::string& stem) {
  PlayDataset play;
  const Trajectory pos = load_trajectory(dir / (stem + "_positions.csv"));
  play.dt = pos.dt;
  play.robot_positions = pos.points;
  play.robot_keypoints = load_keypoints(dir / (stem + "_robot_keypoints.csv"));
  play.human_keypoints = load_keypoints(dir / (stem + "_human_keypoints.csv"));
  play.check_consistent();
  return play;
}

}  // namespace pskill
