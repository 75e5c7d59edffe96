#include "pskill/bo.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>

#include "pskill/csv_io.hpp"
#include "pskill/rdmp.hpp"

namespace pskill::bo {

namespace {

enum Stream : std::uint64_t { kInitial = 21, kPool = 22, kImagine = 23 };

bool contains(const std::vector<Candidate>& set, const Candidate& c) {
  return std::find(set.begin(), set.end(), c) != set.end();
}

}  // namespace

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::kWarmStart: return "warm-start";
    case Provenance::kRandom: return "random";
    case Provenance::kAcquisition: return "acquisition-argmax";
    case Provenance::kPolicy: return "policy";
  }
  return "?";
}

Provenance parse_provenance(std::string_view name) {
  if (name == "warm-start") return Provenance::kWarmStart;
  if (name == "random") return Provenance::kRandom;
  if (name == "acquisition-argmax") return Provenance::kAcquisition;
  if (name == "policy") return Provenance::kPolicy;
  throw std::invalid_argument("unknown provenance: " + std::string(name));
}

const TrialRecord& RunResult::best() const {
  if (records.empty()) throw std::logic_error("RunResult::best: no trials");
  const TrialRecord* best = &records.front();
  for (const auto& r : records) {
    if (r.objective > best->objective) best = &r;
  }
  return *best;
}

Candidate random_candidate(std::size_t L, const Box& bounds, Rng& rng) {
  Candidate c;
  c.waypoints.reserve(L);
  for (std::size_t i = 0; i < L; ++i) {
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = uniform(rng, bounds.lo[a], bounds.hi[a]);
    c.waypoints.push_back(p);
  }
  return c;
}

std::vector<Candidate> build_pool(const std::vector<Candidate>& initial, std::size_t L, const Box& bounds,
                                  std::size_t n_random, std::size_t n_local, double local_scale,
                                  std::uint64_t seed) {
  if (L < 3) throw std::invalid_argument("build_pool: need at least 3 waypoints");
  Rng rng = make_rng(seed, kPool);
  std::vector<Candidate> pool = initial;
  pool.reserve(initial.size() + n_random + n_local);
  for (std::size_t i = 0; i < n_random; ++i) pool.push_back(random_candidate(L, bounds, rng));
  if (!initial.empty() && n_local > 0) {
    if (!(local_scale >= 0.0)) throw std::invalid_argument("build_pool: local scale must be non-negative");
    for (std::size_t i = 0; i < n_local; ++i) {
      Candidate c = initial[uniform_index(rng, initial.size())];
      for (auto& w : c.waypoints) {
        if (local_scale > 0.0) {
          for (int a = 0; a < 3; ++a) w[a] += gaussian(rng, local_scale);
        }
        w = bounds.clamp(w);
      }
      pool.push_back(std::move(c));
    }
  }
  return pool;
}

std::size_t propose_index(const gp::GpModel& model, const std::vector<Candidate>& pool,
                          const gp::AcquisitionConfig& acq) {
  if (pool.empty()) throw std::invalid_argument("propose_index: empty pool");
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const double v = gp::ucb(model, pool[i].flatten(), acq);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

Evaluation evaluate(const Candidate& candidate, const sim::Environment& env, const KeypointVideo& demo,
                    const metrics::PeriodEstimate& period, std::size_t n_basis) {
  const double period_s = period.period_frames * demo.dt;
  const auto n_rep = static_cast<double>(period.n_rep);
  const rdmp::RdmpParams params = rdmp::from_waypoints(candidate, period_s, n_basis);
  const Trajectory plan = rdmp::rollout_from(params, n_rep, candidate.waypoints.front());
  const auto n_frames = static_cast<std::size_t>(std::llround(n_rep * period.period_frames));
  Evaluation ev;
  ev.execution = env.execute(plan, n_frames);
  ev.objective = -metrics::keypoint_distance(demo, ev.execution.video,
                                             metrics::DistanceConfig::for_repetitions(period.n_rep));
  return ev;
}

RunResult run(const sim::Environment& env, const KeypointVideo& demo, const PlayDataset& play, const BoConfig& cfg,
              const PerformanceFn& performance) {
  if (cfg.budget == 0) throw std::invalid_argument("bo::run: budget must be positive");
  if (cfg.n_waypoints < 3) throw std::invalid_argument("bo::run: need at least 3 waypoints");
  const Box& bounds = env.workspace();

  RunResult result;
  result.period = metrics::estimate_periods(demo);
  const KeypointVideo single = metrics::split_single_period(demo, result.period);

  std::vector<Candidate> initial;
  if (cfg.warm_start) {
    const auto ws = imagine::generate_initial_candidates(play, single, result.period.period_frames, cfg.n_waypoints,
                                                         cfg.imagine, mix_seed(cfg.seed, kImagine));
    for (const auto& c : ws.candidates) initial.push_back(c.candidate);
    result.local_scale = cfg.local_scale > 0.0 ? cfg.local_scale : ws.junction_threshold;
  }
  result.n_initial_available = initial.size();

  std::vector<Candidate> executed;
  std::vector<Eigen::VectorXd> inputs;
  std::vector<double> targets;
  auto record = [&](std::size_t trial, Provenance prov, const Candidate& c) {
    TrialRecord r;
    r.trial = trial;
    r.provenance = prov;
    r.candidate = c;
    try {
      const Evaluation ev = evaluate(c, env, demo, result.period, cfg.n_basis);
      r.objective = ev.objective;
      r.performance = performance(ev.execution.effector);
    } catch (const std::exception& e) {
      throw RunAborted("trial " + std::to_string(trial) + ": " + e.what(), result.records);
    }
    executed.push_back(c);
    inputs.push_back(c.flatten());
    targets.push_back(r.objective);
    result.records.push_back(std::move(r));
  };

  Rng init_rng = make_rng(cfg.seed, kInitial);
  const std::size_t n_init = std::min(cfg.n_initial, cfg.budget);
  for (std::size_t t = 1; t <= n_init; ++t) {
    if (cfg.warm_start && t <= initial.size()) {
      record(t, Provenance::kWarmStart, initial[t - 1]);
    } else {
      record(t, Provenance::kRandom, random_candidate(cfg.n_waypoints, bounds, init_rng));
    }
  }

  std::optional<gp::Hyperparams> hyper;
  std::size_t fitted_at = 0;
  const gp::AcquisitionConfig acq{cfg.beta};
  for (std::size_t t = n_init + 1; t <= cfg.budget; ++t) {
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
    const bool refit = !hyper || inputs.size() >= fitted_at + std::max<std::size_t>(1, cfg.refit_every);
    const gp::GpModel model = gp::GpModel::fit(inputs, y, refit, hyper);
    if (refit) {
      hyper = model.hyperparams();
      fitted_at = inputs.size();
    }

    const std::size_t n_local = cfg.warm_start ? cfg.pool_local : 0;
    std::vector<Candidate> pool = build_pool(initial, cfg.n_waypoints, bounds, cfg.pool_random, n_local,
                                             result.local_scale, mix_seed(cfg.seed, t));
    std::erase_if(pool, [&](const Candidate& c) { return contains(executed, c); });
    if (pool.empty()) {
      Rng rng = make_rng(cfg.seed, 1000 + t);
      pool.push_back(random_candidate(cfg.n_waypoints, bounds, rng));
    }
    const std::size_t idx = propose_index(model, pool, acq);
    record(t, Provenance::kAcquisition, pool[idx]);
  }
  return result;
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  const std::size_t L = records.empty() ? 0 : records.front().candidate.size();
  out << "trial,provenance,objective,performance";
  for (std::size_t i = 0; i < L; ++i) out << ",w" << i << "x,w" << i << "y,w" << i << "z";
  out << '\n';
  for (const auto& r : records) {
    if (r.candidate.size() != L) throw std::invalid_argument("write_trials_csv: mixed waypoint counts");
    out << r.trial << ',' << to_string(r.provenance) << ',' << format_double(r.objective) << ','
        << format_double(r.performance);
    for (const auto& w : r.candidate.waypoints) {
      out << ',' << format_double(w.x()) << ',' << format_double(w.y()) << ',' << format_double(w.z());
    }
    out << '\n';
  }
}

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_trials_csv: missing header");
  const auto header = split(trim(line), ',');
  if (header.size() < 4 || (header.size() - 4) % 3 != 0 || header[0] != "trial") {
    throw std::runtime_error("read_trials_csv: bad header");
  }
  const std::size_t L = (header.size() - 4) / 3;
  std::vector<TrialRecord> out;
  while (std::getline(in, line)) {
    const std::string row = trim(line);
    if (row.empty()) continue;
    const auto f = split(row, ',');
    if (f.size() != header.size()) throw std::runtime_error("read_trials_csv: ragged row");
    TrialRecord r;
    r.trial = static_cast<std::size_t>(parse_double(f[0]));
    r.provenance = parse_provenance(f[1]);
    r.objective = parse_double(f[2]);
    r.performance = parse_double(f[3]);
    for (std::size_t i = 0; i < L; ++i) {
      r.candidate.waypoints.emplace_back(parse_double(f[4 + 3 * i]), parse_double(f[5 + 3 * i]),
                                         parse_double(f[6 + 3 * i]));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<double> best_so_far_performance(const std::vector<TrialRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  const TrialRecord* best = nullptr;
  for (const auto& r : records) {
    if (!best || r.objective > best->objective) best = &r;
    out.push_back(best->performance);
  }
  return out;
}

}  // namespace pskill::bo
