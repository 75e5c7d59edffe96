#include "pskill/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pskill/csv_io.hpp"
#include "pskill/metrics.hpp"

namespace pskill::harness {

namespace pt = boost::property_tree;

std::string to_string(Method m) {
  switch (m) {
    case Method::kViptl: return "viptl";
    case Method::kRandomBo: return "random-bo";
    case Method::kDirectImitation: return "direct-imitation";
    case Method::kMbil: return "mbil";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "viptl") return Method::kViptl;
  if (name == "random-bo") return Method::kRandomBo;
  if (name == "direct-imitation") return Method::kDirectImitation;
  if (name == "mbil") return Method::kMbil;
  throw std::invalid_argument("unknown method: " + std::string(name));
}

std::size_t default_waypoints(sim::Task task) { return task == sim::Task::kStirring ? 5 : 7; }

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("config: no seeds");
  if (budget == 0) throw std::invalid_argument("config: budget must be positive");
  if (waypoints() < 3) throw std::invalid_argument("config: need at least 3 waypoints");
  if (!(play_duration > 0.0)) throw std::invalid_argument("config: play_duration must be positive");
  if (demo_reps < 2) throw std::invalid_argument("config: demo_reps must be at least 2");
  if (!(beta >= 0.0)) throw std::invalid_argument("config: beta must be non-negative");
  if (bo.n_initial > budget) throw std::invalid_argument("config: n_initial exceeds budget");
}

std::vector<std::uint64_t> parse_seeds(std::string_view text) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(text, ',')) {
    const std::string s = trim(part);
    if (s.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.front() == '-') throw std::invalid_argument("bad seed: " + s);
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("no seeds given");
  return out;
}

void write_config(std::ostream& out, const ExperimentConfig& cfg) {
  std::string seeds;
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) seeds += (i ? "," : "") + std::to_string(cfg.seeds[i]);
  out << "[experiment]\n"
      << "task=" << sim::to_string(cfg.task) << '\n'
      << "method=" << to_string(cfg.method) << '\n'
      << "seeds=" << seeds << '\n'
      << "budget=" << cfg.budget << '\n'
      << "waypoints=" << cfg.waypoints() << '\n'
      << "beta=" << format_double(cfg.beta) << '\n'
      << "play_duration=" << format_double(cfg.play_duration) << '\n'
      << "demo_reps=" << cfg.demo_reps << '\n'
      << "\n[bo]\n"
      << "n_initial=" << cfg.bo.n_initial << '\n'
      << "pool_random=" << cfg.bo.pool_random << '\n'
      << "pool_local=" << cfg.bo.pool_local << '\n'
      << "local_scale=" << format_double(cfg.bo.local_scale) << '\n'
      << "refit_every=" << cfg.bo.refit_every << '\n'
      << "n_basis=" << cfg.bo.n_basis << '\n'
      << "\n[imagine]\n"
      << "n_segments=" << cfg.bo.imagine.n_segments << '\n'
      << "segment_length=" << cfg.bo.imagine.segment_length << '\n'
      << "n_attempts=" << cfg.bo.imagine.n_attempts << '\n'
      << "top_n=" << cfg.bo.imagine.top_n << '\n'
      << "segments_per_trajectory=" << cfg.bo.imagine.segments_per_trajectory << '\n'
      << "\n[mbil]\n"
      << "n_action_samples=" << cfg.mbil.n_action_samples << '\n'
      << "ridge=" << format_double(cfg.mbil.ridge) << '\n';
}

ExperimentConfig read_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  static const std::vector<std::string> known = {
      "experiment.task", "experiment.method", "experiment.seeds", "experiment.budget", "experiment.waypoints",
      "experiment.beta", "experiment.play_duration", "experiment.demo_reps", "bo.n_initial", "bo.pool_random",
      "bo.pool_local", "bo.local_scale", "bo.refit_every", "bo.n_basis", "imagine.n_segments",
      "imagine.segment_length", "imagine.n_attempts", "imagine.top_n", "imagine.segments_per_trajectory",
      "mbil.n_action_samples", "mbil.ridge"};
  for (const auto& [section, body] : tree) {
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      if (std::find(known.begin(), known.end(), full) == known.end()) {
        throw std::invalid_argument("config: unknown key " + full);
      }
    }
  }
  auto size = [&](const std::string& key, std::size_t fallback) -> std::size_t {
    const auto v = tree.get_optional<std::string>(key);
    if (!v) return fallback;
    const double d = parse_double(trim(*v));
    if (d < 0.0 || d != std::floor(d)) throw std::invalid_argument("config: " + key + " must be a count");
    return static_cast<std::size_t>(d);
  };
  auto real = [&](const std::string& key, double fallback) {
    const auto v = tree.get_optional<std::string>(key);
    return v ? parse_double(trim(*v)) : fallback;
  };

  ExperimentConfig cfg;
  if (const auto v = tree.get_optional<std::string>("experiment.task")) cfg.task = sim::parse_task(trim(*v));
  if (const auto v = tree.get_optional<std::string>("experiment.method")) cfg.method = parse_method(trim(*v));
  if (const auto v = tree.get_optional<std::string>("experiment.seeds")) cfg.seeds = parse_seeds(*v);
  cfg.budget = size("experiment.budget", cfg.budget);
  cfg.n_waypoints = size("experiment.waypoints", cfg.n_waypoints);
  cfg.beta = real("experiment.beta", cfg.beta);
  cfg.play_duration = real("experiment.play_duration", cfg.play_duration);
  cfg.demo_reps = size("experiment.demo_reps", cfg.demo_reps);
  cfg.bo.n_initial = size("bo.n_initial", cfg.bo.n_initial);
  cfg.bo.pool_random = size("bo.pool_random", cfg.bo.pool_random);
  cfg.bo.pool_local = size("bo.pool_local", cfg.bo.pool_local);
  cfg.bo.local_scale = real("bo.local_scale", cfg.bo.local_scale);
  cfg.bo.refit_every = size("bo.refit_every", cfg.bo.refit_every);
  cfg.bo.n_basis = size("bo.n_basis", cfg.bo.n_basis);
  cfg.bo.imagine.n_segments = size("imagine.n_segments", cfg.bo.imagine.n_segments);
  cfg.bo.imagine.segment_length = size("imagine.segment_length", cfg.bo.imagine.segment_length);
  cfg.bo.imagine.n_attempts = size("imagine.n_attempts", cfg.bo.imagine.n_attempts);
  cfg.bo.imagine.top_n = size("imagine.top_n", cfg.bo.imagine.top_n);
  cfg.bo.imagine.segments_per_trajectory =
      size("imagine.segments_per_trajectory", cfg.bo.imagine.segments_per_trajectory);
  cfg.mbil.n_action_samples = size("mbil.n_action_samples", cfg.mbil.n_action_samples);
  cfg.mbil.ridge = real("mbil.ridge", cfg.mbil.ridge);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return read_config(in);
}

SeedRun run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  SeedRun run;
  run.seed = seed;

  const PlayDataset play = sim::collect_play(cfg.task, seed, cfg.play_duration, seed);
  const sim::ScriptedDemo demo = sim::scripted_demo(cfg.task, cfg.demo_reps, seed);
  const sim::Environment env(cfg.task, seed);
  // The exemplar stays inside this closure; learners only see scores.
  const bo::PerformanceFn perf = [&demo, &env](const Trajectory& executed) {
    return metrics::performance(demo.exemplar, executed, env.workspace());
  };

  try {
    switch (cfg.method) {
      case Method::kViptl:
      case Method::kRandomBo: {
        bo::BoConfig bc = cfg.bo;
        bc.budget = cfg.budget;
        bc.n_waypoints = cfg.waypoints();
        bc.beta = cfg.beta;
        bc.seed = seed;
        bc.warm_start = cfg.method == Method::kViptl;
        run.records = bo::run(env, demo.demo, play, bc, perf).records;
        break;
      }
      case Method::kDirectImitation:
        run.records = baselines::direct_imitation(play, demo.demo, env, perf, cfg.waypoints()).records;
        break;
      case Method::kMbil: {
        baselines::MbilConfig mc = cfg.mbil;
        mc.episodes = cfg.budget;
        mc.seed = seed;
        run.records = baselines::mbil(play, demo.demo, env, mc, perf, cfg.waypoints()).records;
        break;
      }
    }
  } catch (const bo::RunAborted& e) {
    run.records = e.partial();
    run.error = e.what();
  }

  run.best_so_far = bo::best_so_far_performance(run.records);
  // Direct imitation executes once; its score holds for every trial index.
  if (cfg.method == Method::kDirectImitation && !run.best_so_far.empty()) {
    run.best_so_far.resize(cfg.budget, run.best_so_far.back());
  }
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

Aggregate aggregate(const std::vector<std::vector<double>>& curves) {
  Aggregate agg;
  std::size_t n = 0;
  for (const auto& c : curves) n = std::max(n, c.size());
  for (std::size_t t = 0; t < n; ++t) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& c : curves) {
      if (t < c.size()) {
        sum += c[t];
        ++count;
      }
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& c : curves) {
      if (t < c.size()) ss += (c[t] - mean) * (c[t] - mean);
    }
    agg.mean.push_back(mean);
    agg.std.push_back(std::sqrt(ss / static_cast<double>(count)));
  }
  return agg;
}

void write_aggregate_csv(std::ostream& out, const Aggregate& agg) {
  out << "trial,mean,std\n";
  for (std::size_t t = 0; t < agg.mean.size(); ++t) {
    out << t + 1 << ',' << format_double(agg.mean[t]) << ',' << format_double(agg.std[t]) << '\n';
  }
}

std::filesystem::path run_directory(const std::filesystem::path& root, const ExperimentConfig& cfg) {
  return root / (sim::to_string(cfg.task) + "_" + to_string(cfg.method));
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

template <class F>
std::string render(F&& f) {
  std::ostringstream s;
  f(s);
  return s.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& output_root) {
  cfg.validate();
  ExperimentResult result;
  if (!output_root.empty()) {
    result.directory = run_directory(output_root, cfg);
    std::filesystem::create_directories(result.directory);
    write_file(result.directory / "config.ini", render([&](std::ostream& o) { write_config(o, cfg); }));
  }
  std::vector<std::vector<double>> curves;
  for (const auto seed : cfg.seeds) {
    SeedRun run = run_seed(cfg, seed);
    if (!result.directory.empty()) {
      write_file(result.directory / ("seed_" + std::to_string(seed) + ".csv"),
                 render([&](std::ostream& o) { bo::write_trials_csv(o, run.records); }));
    }
    curves.push_back(run.best_so_far);
    const bool failed = run.error.has_value();
    const std::string error = failed ? *run.error : std::string();
    result.runs.push_back(std::move(run));
    if (failed) throw std::runtime_error("seed " + std::to_string(seed) + " aborted: " + error);
  }
  result.aggregate = aggregate(curves);
  if (!result.directory.empty()) {
    write_file(result.directory / "aggregate.csv",
               render([&](std::ostream& o) { write_aggregate_csv(o, result.aggregate); }));
    write_file(result.directory / "timings.csv", render([&](std::ostream& o) {
                 o << "seed,seconds\n";
                 for (const auto& r : result.runs) o << r.seed << ',' << format_double(r.seconds) << '\n';
               }));
  }
  return result;
}

void write_plot_data(std::ostream& out, const std::filesystem::path& root) {
  if (!std::filesystem::is_directory(root)) throw std::runtime_error("not a directory: " + root.string());
  std::vector<std::filesystem::path> dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_directory() && std::filesystem::exists(entry.path() / "config.ini")) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  out << "task,method,seed,trial,best_so_far\n";
  for (const auto& dir : dirs) {
    const ExperimentConfig cfg = load_config(dir / "config.ini");
    for (const auto seed : cfg.seeds) {
      const auto path = dir / ("seed_" + std::to_string(seed) + ".csv");
      if (!std::filesystem::exists(path)) continue;
      std::ifstream in(path);
      auto curve = bo::best_so_far_performance(bo::read_trials_csv(in));
      if (cfg.method == Method::kDirectImitation && !curve.empty()) curve.resize(cfg.budget, curve.back());
      for (std::size_t t = 0; t < curve.size(); ++t) {
        out << sim::to_string(cfg.task) << ',' << to_string(cfg.method) << ',' << seed << ',' << t + 1 << ','
            << format_double(curve[t]) << '\n';
      }
    }
  }
}

}  // namespace pskill::harness
