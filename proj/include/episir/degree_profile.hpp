#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace episir {

enum class Status : std::uint8_t { susceptible, infective, recovered };

// Per-degree vertex counts, split by compartment.
struct DegreeCounts {
  std::int64_t ns = 0;
  std::int64_t ni = 0;
  std::int64_t nr = 0;
  std::int64_t total() const { return ns + ni + nr; }
};

// A finite population: how many susceptible / infective / recovered vertices
// of each degree. The half-edge total must be even so that a configuration
// pairing exists.
struct DegreeProfile {
  std::map<int, DegreeCounts> counts;

  std::int64_t n() const;
  std::int64_t vertices(Status s) const;
  std::int64_t half_edges() const;
  std::int64_t half_edges(Status s) const;
  int max_degree() const;
  int max_infective_degree() const;

  // Throws std::invalid_argument on negative counts, an empty population, or
  // an odd half-edge total.
  void validate() const;
};

// Target degree distribution for profile construction. Either an explicit
// table or a standard family truncated so the dropped tail satisfies
// sum_{k > K} k^2 p_k < tail_eps; the cut K and the dropped mass are recorded.
struct DegreeDistribution {
  std::vector<std::pair<int, double>> pmf;  // sorted by degree, normalised
  int truncation_k = 0;
  double tail_mass = 0.0;

  static DegreeDistribution table(std::vector<std::pair<int, double>> weights);
  static DegreeDistribution regular(int k);
  static DegreeDistribution poisson(double mean, double tail_eps = 1e-12);
  // k_max <= 0 picks the cut from tail_eps (needs exponent > 3).
  static DegreeDistribution power_law(double exponent, int k_min, int k_max,
                                      double tail_eps = 1e-12);
  double mean_degree() const;
};

// If the half-edge total is odd, decrement the largest odd-degree susceptible
// bucket; if there is none, add one degree-1 recovered vertex. Deterministic,
// changes the population by at most one vertex.
std::map<int, DegreeCounts> fix_half_edge_parity(std::map<int, DegreeCounts> counts);

// Explicit counts; validates and returns.
DegreeProfile build_profile(std::map<int, DegreeCounts> counts);

// Round n * alpha * p_k per compartment and degree, then fix parity.
DegreeProfile build_profile(std::int64_t n, const DegreeDistribution& dist,
                            double alpha_s, double alpha_i, double alpha_r);

// Explicit infective seeds; the remaining vertices are split between
// susceptible and recovered by recovered_fraction and laid out along dist.
DegreeProfile build_profile_with_seeds(std::int64_t n, const DegreeDistribution& dist,
                                       const std::map<int, std::int64_t>& infective,
                                       double recovered_fraction = 0.0);

// Population-level parameters the analytic machinery consumes. p is the
// degree distribution of the susceptible part only; mu, mu_s, mu_i, mu_r are
// half-edges per vertex contributed by each compartment.
struct AsymptoticParams {
  double alpha_s = 0, alpha_i = 0, alpha_r = 0;
  std::vector<std::pair<int, double>> p;
  double lambda = 0;
  double mu = 0, mu_s = 0, mu_i = 0, mu_r = 0;
  double beta = 0, rho = 0;

  double p_at(int k) const;
  int max_degree() const { return p.empty() ? 0 : p.back().first; }
  // Checks the defining identities to 1e-12 (relative); throws on failure.
  void validate() const;
};

AsymptoticParams extract_params(const DegreeProfile& profile, double beta, double rho);

// Same, but with the infective seeds removed from the population fractions:
// alpha_i = mu_i = 0 and the remaining fractions renormalised. This is the
// idealisation the branching-process calculations require, where the seeds
// are a vanishing fraction of an otherwise susceptible/recovered population.
AsymptoticParams extract_params_seedless(const DegreeProfile& profile, double beta, double rho);

// Exact parameters for a target mix where every compartment shares dist.
AsymptoticParams params_from_distribution(const DegreeDistribution& dist, double alpha_s,
                                          double alpha_i, double alpha_r, double beta,
                                          double rho);

// Finite-size diagnostics for the modelling assumptions. Soft conditions
// report pass/warn plus the measured value; nothing here hard-fails a run.
struct RegularityCheck {
  std::string name;
  bool pass = true;
  double value = 0;
  std::string note;
};

struct RegularityReport {
  std::vector<RegularityCheck> checks;
  bool all_pass() const;
  const RegularityCheck* find(const std::string& name) const;
};

struct RegularityThresholds {
  // warn when the largest infective degree exceeds n^exponent
  double max_infective_degree_exponent = 0.75;
  // warn when sum_k k^2 n_k / n exceeds this
  double second_moment_max = 100.0;
};

RegularityReport validate_regularity(const DegreeProfile& profile,
                                     const AsymptoticParams& params,
                                     const RegularityThresholds& thresholds = {});

// CSV with header "degree,ns,ni,nr", UTF-8, LF line endings.
void write_profile_csv(const DegreeProfile& profile, const std::string& path);
DegreeProfile read_profile_csv(const std::string& path);

}  // namespace episir
