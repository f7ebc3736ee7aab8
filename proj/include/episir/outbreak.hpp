#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "episir/degree_profile.hpp"
#include "episir/rng.hpp"

namespace episir {

// Distribution of how many of a vertex's l contact lines fire before the
// vertex recovers, with per-line rate beta and recovery rate rho.  rho = 0
// puts all mass on l.
std::vector<double> transmission_pmf(int l, double beta, double rho);
double transmission_pgf(int l, double beta, double rho, double x);

// Offspring law of the single-type branching process that dominates the
// early phase: a contact lands on a degree-k susceptible with probability
// alpha_s k p_k / mu and spawns transmission_pmf(k - 1) further contacts, or
// on an initially recovered half-edge (mass mu_r / mu, no offspring).
// Defined only when the initial infectives carry no half-edge density.
struct OffspringModel {
  std::vector<double> pmf;  // offspring counts 0 .. pmf.size() - 1
  double mean = 0;
  double beta = 0;
  double rho = 0;
  int truncation_k = 0;   // susceptible degrees above this were dropped
  double tail_mass = 0;   // mixture mass removed by the truncation
  double pgf(double x) const;
  double pgf_derivative(double x) const;
};

// truncation_k = 0 picks the smallest cut with sum_{k > K} k^2 p_k < 1e-10.
OffspringModel offspring_model(const AsymptoticParams& params, int truncation_k = 0);

// Smallest fixed point of the offspring pgf in [0, 1].
double extinction_probability(const OffspringModel& model);

struct OutbreakResult {
  double q = 1;             // per-line extinction probability
  double probability = 0;   // chance the seeds ignite a large outbreak
  double mean_offspring = 0;
  double r0 = 0;
  int truncation_k = 0;
  double tail_mass = 0;
};

// Large-outbreak probability 1 - prod_k pgf_k(q)^{n_k} for seeds given as
// degree -> count.  params must describe the population without the seeds.
OutbreakResult outbreak_probability(const AsymptoticParams& params,
                                    const std::map<int, std::int64_t>& infective_counts);

// One realisation of the branching process as a random walk on the count of
// unexpanded individuals.  Each seed of degree k contributes
// transmission_pmf(k) founders.  Runs whose total progeny reaches cap are
// declared survivors.
struct BranchingRun {
  bool extinct = false;
  std::int64_t progeny = 0;  // individuals born before absorption or cap
};

BranchingRun simulate_branching(const OffspringModel& model,
                                const std::map<int, std::int64_t>& infective_counts,
                                Rng& rng, std::int64_t cap = 1000000);

}  // namespace episir
