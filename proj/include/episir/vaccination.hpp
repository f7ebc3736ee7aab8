#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "episir/config_graph.hpp"
#include "episir/degree_profile.hpp"
#include "episir/rng.hpp"

namespace episir {

// Pre-epidemic vaccination: a susceptible vertex of degree k is moved to the
// recovered compartment with probability pi_k, keeping its half-edges.
//   uniform(v):   pi_k = v for every degree
//   edgewise(u):  pi_k = 1 - (1 - u)^k; each contact line is reached
//                 independently, so coverage concentrates on high degrees
//   by_degree:    explicit table, degrees not listed are left alone
struct VaccinationPolicy {
  enum class Kind { uniform, edgewise, by_degree };
  Kind kind = Kind::uniform;
  double level = 0;
  std::map<int, double> table;

  static VaccinationPolicy uniform(double v);
  static VaccinationPolicy edgewise(double u);
  static VaccinationPolicy by_degree(std::map<int, double> pi);

  double at(int k) const;
  // Throws std::invalid_argument unless every coverage lies in [0, 1).
  void validate() const;
};

// Population limit after vaccination: the susceptible share alpha_s loses
// the covered mass, whose half-edges move to mu_r; the total half-edge
// density mu is unchanged.
AsymptoticParams vaccinated_params(const AsymptoticParams& params,
                                   const VaccinationPolicy& policy);

double vaccinated_reproduction_number(const AsymptoticParams& params,
                                      const VaccinationPolicy& policy);

// Smallest coverage level at which the vaccinated reproduction number drops
// to 1 for the one-parameter families; 0 when the population is already
// subcritical.  Bisection, exact to floating-point resolution.
double critical_coverage(const AsymptoticParams& params,
                         VaccinationPolicy::Kind kind);

// One stochastic realisation on a finite profile: per-vertex coin flips,
// susceptible counts moved to recovered.
struct VaccinationDraw {
  DegreeProfile profile;
  std::map<int, std::int64_t> moved_by_degree;
  std::int64_t moved = 0;
};

VaccinationDraw vaccinate_profile(const DegreeProfile& base,
                                  const VaccinationPolicy& policy, Rng& rng);

// Same coin flips applied to a laid-out system; the result feeds a run's
// initial-compartment override.
std::vector<Status> vaccinate_statuses(const HalfEdgeSystem& base,
                                       const VaccinationPolicy& policy, Rng& rng);

}  // namespace episir
