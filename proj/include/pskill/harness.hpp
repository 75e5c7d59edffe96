#pragma once

// Experiment orchestration: config files, per-seed runs of a method on a
// task, run logs on disk and aggregate best-so-far curves.
//
// Layout under <output>/<task>_<method>/:
//   config.ini         snapshot that reproduces the run
//   seed_<s>.csv       trial,provenance,objective,performance,w0x,...
//   aggregate.csv      trial,mean,std of best-so-far performance over seeds
//   timings.csv        seed,seconds (the only non-deterministic file)

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pskill/baselines.hpp"
#include "pskill/bo.hpp"
#include "pskill/sim.hpp"

namespace pskill::harness {

enum class Method { kViptl, kRandomBo, kDirectImitation, kMbil };

std::string to_string(Method m);
Method parse_method(std::string_view name);

// Waypoints per candidate: 5 for stirring, 7 otherwise.
std::size_t default_waypoints(sim::Task task);

struct ExperimentConfig {
  sim::Task task = sim::Task::kWiping;
  Method method = Method::kViptl;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::size_t budget = 50;
  std::size_t n_waypoints = 0;  // 0: task default
  double beta = 0.1;
  double play_duration = 600.0;  // seconds
  std::size_t demo_reps = 3;
  bo::BoConfig bo;
  baselines::MbilConfig mbil;

  std::size_t waypoints() const { return n_waypoints > 0 ? n_waypoints : default_waypoints(task); }
  void validate() const;  // throws std::invalid_argument
};

// Sectioned key/value text ([experiment], [bo], [imagine], [mbil]).
void write_config(std::ostream& out, const ExperimentConfig& cfg);
ExperimentConfig read_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

std::vector<std::uint64_t> parse_seeds(std::string_view text);

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<bo::TrialRecord> records;
  std::vector<double> best_so_far;  // one entry per trial index 1..budget
  double seconds = 0.0;
  std::optional<std::string> error;  // set when the run aborted early
};

struct Aggregate {
  std::vector<double> mean;
  std::vector<double> std;  // population standard deviation
};

// Runs one seed in memory: play, demo, environment, method.
SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed);

// Trial-wise mean/std over the seeds that reached each index.
Aggregate aggregate(const std::vector<std::vector<double>>& curves);

void write_aggregate_csv(std::ostream& out, const Aggregate& agg);

struct ExperimentResult {
  std::vector<SeedRun> runs;
  Aggregate aggregate;
  std::filesystem::path directory;  // empty when nothing was written
};

std::filesystem::path run_directory(const std::filesystem::path& root, const ExperimentConfig& cfg);

// Runs every seed and, if output_root is non-empty, writes the run files.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& output_root);

// Tidy long-format rows (task,method,seed,trial,best_so_far) for every run
// directory under root.
void write_plot_data(std::ostream& out, const std::filesystem::path& root);

}  // namespace pskill::harness
