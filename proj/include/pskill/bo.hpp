#pragma once

// Bayesian optimization over single-period waypoint candidates with a GP
// surrogate and a UCB acquisition maximized over a finite candidate pool.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pskill/gp.hpp"
#include "pskill/imagine.hpp"
#include "pskill/metrics.hpp"
#include "pskill/rng.hpp"
#include "pskill/sim.hpp"
#include "pskill/types.hpp"

namespace pskill::bo {

// kPolicy marks executions produced by the baselines' own policies.
enum class Provenance { kWarmStart, kRandom, kAcquisition, kPolicy };

std::string to_string(Provenance p);
Provenance parse_provenance(std::string_view name);

struct TrialRecord {
  std::size_t trial = 0;  // 1-based
  Provenance provenance = Provenance::kAcquisition;
  Candidate candidate;
  double objective = 0.0;
  double performance = 0.0;
};

struct BoConfig {
  std::size_t budget = 50;
  std::size_t n_initial = 10;  // trials spent on initial candidates
  std::size_t n_waypoints = 7;  // L
  double beta = 0.1;
  std::size_t pool_random = 1000;
  std::size_t pool_local = 1000;
  double local_scale = 0.0;  // perturbation std; 0 uses the junction threshold
  std::size_t refit_every = 5;
  std::size_t n_basis = 25;
  bool warm_start = true;  // false: random initial candidates and pool only
  imagine::ImagineConfig imagine;
  std::uint64_t seed = 0;
};

// Scores an executed effector path against the hidden exemplar.
using PerformanceFn = std::function<double(const Trajectory&)>;

struct RunResult {
  std::vector<TrialRecord> records;
  metrics::PeriodEstimate period;
  double local_scale = 0.0;
  std::size_t n_initial_available = 0;

  const TrialRecord& best() const;  // highest objective, earliest on ties
};

// Raised when an execution fails mid-run; carries the trials completed so far.
class RunAborted : public std::runtime_error {
 public:
  RunAborted(const std::string& what, std::vector<TrialRecord> partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const std::vector<TrialRecord>& partial() const { return partial_; }

 private:
  std::vector<TrialRecord> partial_;
};

Candidate random_candidate(std::size_t L, const Box& bounds, Rng& rng);

// Initial candidates + pool_random uniform samples + pool_local Gaussian
// perturbations of the initial candidates, clamped to the bounds.
std::vector<Candidate> build_pool(const std::vector<Candidate>& initial, std::size_t L, const Box& bounds,
                                  std::size_t n_random, std::size_t n_local, double local_scale,
                                  std::uint64_t seed);

// Index of the UCB maximizer over the pool; ties go to the lowest index.
std::size_t propose_index(const gp::GpModel& model, const std::vector<Candidate>& pool,
                          const gp::AcquisitionConfig& acq);

// Plans one single-period candidate over n_rep periods, executes it and
// scores the keypoint video against the demo.
struct Evaluation {
  sim::Execution execution;
  double objective = 0.0;
};
Evaluation evaluate(const Candidate& candidate, const sim::Environment& env, const KeypointVideo& demo,
                    const metrics::PeriodEstimate& period, std::size_t n_basis);

RunResult run(const sim::Environment& env, const KeypointVideo& demo, const PlayDataset& play, const BoConfig& cfg,
              const PerformanceFn& performance);

// trial,provenance,objective,performance,w0x,w0y,w0z,...
void write_trials_csv(std::ostream& out, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_trials_csv(std::istream& in);

// Performance of the best-objective trial among the first t, for t = 1..n.
std::vector<double> best_so_far_performance(const std::vector<TrialRecord>& records);

}  // namespace pskill::bo
