#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "episir/limit_system.hpp"
#include "episir/outbreak.hpp"
#include "episir/sir_engine.hpp"
#include "episir/vaccination.hpp"
#include "json.hpp"

namespace episir {

// Full description of an ensemble study: the population, the rates, how many
// replicates to run and under which engine settings, an optional vaccination
// step, and what to compare the runs against.  Serialisable to and from the
// JSON layout documented in the README.
struct ExperimentConfig {
  std::string name = "experiment";

  std::int64_t n = 0;
  DegreeDistribution distribution;
  // either compartment fractions ...
  double alpha_s = 1, alpha_i = 0, alpha_r = 0;
  // ... or explicit infective seed counts by degree
  std::map<int, std::int64_t> seeds;
  bool use_seeds = false;
  double recovered_fraction = 0;

  double beta = 1, rho = 0;

  int replicates = 1;
  std::uint64_t base_seed = 1;

  ClockKind clock = ClockKind::original;
  bool pregenerated = false;
  double engine_horizon = std::numeric_limits<double>::infinity();
  double stop_below_fraction = 0;

  std::optional<VaccinationPolicy> vaccination;

  // auto: bulk when the seeds carry more than regime_cut of the half-edge
  // density, shifted otherwise
  bool regime_auto = true;
  limit::Regime regime = limit::Regime::bulk;
  double regime_cut = 1e-3;
  limit::LimitOptions limit_options;

  int aligned_grid = 201;  // 0 disables the trajectory comparison
  double compare_horizon = std::numeric_limits<double>::quiet_NaN();  // NaN: table end

  std::string output_dir;  // empty: write nothing
  int saved_trajectories = 3;
  int subsample = 100;  // keep every k-th event in saved trajectory tables

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct ReplicateSummary {
  std::uint64_t seed = 0;
  std::int64_t vaccinated = 0;
  std::int64_t final_s = 0, final_i = 0, final_r = 0;
  std::int64_t ever_infected = 0;
  double end_time = 0;
  double tau_star = std::numeric_limits<double>::quiet_NaN();
  bool outbreak = false;
  // shift aligning the run to the limit clock; 0 in the bulk regime, the
  // s0-crossing time in the shifted one, NaN when the run never crossed
  double align_shift = std::numeric_limits<double>::quiet_NaN();
  double sup_s = std::numeric_limits<double>::quiet_NaN();
  double sup_i = std::numeric_limits<double>::quiet_NaN();
  double sup_r = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentResult {
  ExperimentConfig config;
  DegreeProfile profile;            // after parity fix, before vaccination
  AsymptoticParams params;          // analytic inputs (vaccinated when asked)
  limit::Regime regime = limit::Regime::bulk;
  // absent when the shifted regime has no interior endpoint (no outbreak)
  bool has_limit = false;
  limit::LimitSolution limit;
  bool has_outbreak_calc = false;   // seed-free regime only
  OutbreakResult outbreak;
  std::vector<ReplicateSummary> replicates;

  double classify_fraction = 0;     // runs below this final share are outbreaks
  double outbreak_frequency = 0;
  double mean_final_s_given_outbreak = std::numeric_limits<double>::quiet_NaN();
  double median_sup_s = std::numeric_limits<double>::quiet_NaN();
  double median_sup_i = std::numeric_limits<double>::quiet_NaN();
  double median_sup_r = std::numeric_limits<double>::quiet_NaN();

  nlohmann::json summary() const;
};

// Crossing time of the susceptible share below level, NaN when never.
double alignment_shift(const Trajectory& traj, double level);

struct AlignedDistance {
  double sup_s = 0, sup_i = 0, sup_r = 0;
};

// Largest pointwise gap between the shifted run and the limit curves over an
// even grid on [0, t_end] of the limit clock.  Runs stopped early (horizon,
// threshold, event cap) are compared only up to their stopping time; NaN
// when the run ended before the grid starts.
AlignedDistance compare_to_limit(const Trajectory& traj, double shift,
                                 const limit::LimitSolution& sol, double t_end,
                                 int grid_points);

// Runs the whole study; deterministic in config.base_seed.  Writes the
// output files (replicates.csv, limit.csv, trajectory_<r>.csv, summary.json,
// plot.gp) when config.output_dir is set.
ExperimentResult run_experiment(const ExperimentConfig& config);

void write_experiment_outputs(const ExperimentResult& result);

}  // namespace episir
