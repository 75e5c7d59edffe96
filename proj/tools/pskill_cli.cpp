#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pskill/csv_io.hpp"
#include "pskill/harness.hpp"
#include "pskill/sim.hpp"
#include "pskill/validate.hpp"

namespace fs = std::filesystem;
using namespace pskill;

namespace {

fs::path default_output_root() {
  if (const char* env = std::getenv("PSKILL_OUTPUT_ROOT"); env && *env) return env;
  return "runs";
}

int cmd_run(const std::string& config_path, const std::optional<std::string>& task,
            const std::optional<std::string>& method, const std::optional<std::string>& seeds,
            const std::optional<std::size_t>& budget, const fs::path& output) {
  harness::ExperimentConfig cfg = config_path.empty() ? harness::ExperimentConfig{} : harness::load_config(config_path);
  if (task) cfg.task = sim::parse_task(*task);
  if (method) cfg.method = harness::parse_method(*method);
  if (seeds) cfg.seeds = harness::parse_seeds(*seeds);
  if (budget) cfg.budget = *budget;
  if (cfg.bo.n_initial > cfg.budget) cfg.bo.n_initial = cfg.budget;
  cfg.validate();

  const auto result = harness::run_experiment(cfg, output);
  for (const auto& r : result.runs) {
    const double final = r.best_so_far.empty() ? 0.0 : r.best_so_far.back();
    std::cout << "seed " << r.seed << ": " << r.records.size() << " trials, final best-so-far performance "
              << format_double(final) << '\n';
  }
  if (!result.aggregate.mean.empty()) {
    std::cout << "mean final performance " << format_double(result.aggregate.mean.back()) << " (std "
              << format_double(result.aggregate.std.back()) << ")\n";
  }
  std::cout << "wrote " << result.directory.string() << '\n';
  return 0;
}

int cmd_demo(const std::string& task, std::size_t reps, std::uint64_t seed, const fs::path& output) {
  const auto t = sim::parse_task(task);
  const auto demo = sim::scripted_demo(t, reps, seed);
  fs::create_directories(output);
  const std::string stem = task + "_demo_seed" + std::to_string(seed);
  save_keypoints(output / (stem + "_keypoints.csv"), demo.demo);
  save_trajectory(output / (stem + "_exemplar.csv"), demo.exemplar);
  std::cout << "wrote " << (output / stem).string() << "_{keypoints,exemplar}.csv (" << demo.demo.size()
            << " frames)\n";
  return 0;
}

int cmd_play(const std::string& task, std::uint64_t seed, double duration, const fs::path& output) {
  const auto t = sim::parse_task(task);
  const auto play = sim::collect_play(t, seed, duration, seed);
  fs::create_directories(output);
  const std::string stem = task + "_play_seed" + std::to_string(seed);
  save_play(output, stem, play);
  std::cout << "wrote " << (output / stem).string() << "_*.csv (" << play.size() << " frames)\n";
  return 0;
}

int cmd_plot_data(const fs::path& root, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    harness::write_plot_data(std::cout, root);
    return 0;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write " + out_path);
  harness::write_plot_data(out, root);
  return 0;
}

int cmd_validate() {
  int failed = 0;
  for (const auto& c : validate::run_all()) {
    std::cout << (c.passed ? "ok   " : "FAIL ") << c.name;
    if (!c.detail.empty()) std::cout << " (" << c.detail << ')';
    std::cout << '\n';
    failed += c.passed ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Periodic skill learning from a keypoint video demo"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment (methods: viptl, random-bo, direct-imitation, mbil)");
  std::string config_path;
  std::optional<std::string> task, method, seeds;
  std::optional<std::size_t> budget;
  std::string output_root = default_output_root().string();
  run->add_option("config", config_path, "Experiment config file")->check(CLI::ExistingFile);
  run->add_option("--task", task, "wiping | winding | stirring");
  run->add_option("--method", method, "viptl | random-bo | direct-imitation | mbil");
  run->add_option("--seeds", seeds, "Comma-separated seeds");
  run->add_option("--budget", budget, "Trials per seed");
  run->add_option("--output", output_root, "Output root (default $PSKILL_OUTPUT_ROOT or ./runs)");

  auto* demo = app.add_subcommand("demo", "Record a scripted demonstration");
  std::string demo_task = "wiping";
  std::size_t reps = 3;
  std::uint64_t demo_seed = 0;
  std::string demo_out = ".";
  demo->add_option("--task", demo_task)->required();
  demo->add_option("--reps", reps, "Repetitions (>= 2)");
  demo->add_option("--seed", demo_seed);
  demo->add_option("--output", demo_out, "Output directory");

  auto* play = app.add_subcommand("play", "Record robot and human play data");
  std::string play_task = "wiping";
  std::uint64_t play_seed = 0;
  double duration = 600.0;
  std::string play_out = ".";
  play->add_option("--task", play_task)->required();
  play->add_option("--seed", play_seed);
  play->add_option("--duration", duration, "Seconds of play");
  play->add_option("--output", play_out, "Output directory");

  auto* plot = app.add_subcommand("plot-data", "Emit tidy best-so-far curves for plotting");
  std::string plot_root = default_output_root().string();
  std::string plot_out = "-";
  plot->add_option("--root", plot_root, "Directory holding run directories");
  plot->add_option("--out", plot_out, "Output CSV (default stdout)");

  auto* val = app.add_subcommand("validate", "Run the invariant self-checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*run) return cmd_run(config_path, task, method, seeds, budget, output_root);
    if (*demo) return cmd_demo(demo_task, reps, demo_seed, demo_out);
    if (*play) return cmd_play(play_task, play_seed, duration, play_out);
    if (*plot) return cmd_plot_data(plot_root, plot_out);
    if (*val) return cmd_validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
