#include "episir/vaccination.hpp"

#include <cmath>
#include <stdexcept>

#include "episir/limit_system.hpp"

namespace episir {

VaccinationPolicy VaccinationPolicy::uniform(double v) {
  VaccinationPolicy p;
  p.kind = Kind::uniform;
  p.level = v;
  return p;
}

VaccinationPolicy VaccinationPolicy::edgewise(double u) {
  VaccinationPolicy p;
  p.kind = Kind::edgewise;
  p.level = u;
  return p;
}

VaccinationPolicy VaccinationPolicy::by_degree(std::map<int, double> pi) {
  VaccinationPolicy p;
  p.kind = Kind::by_degree;
  p.table = std::move(pi);
  return p;
}

double VaccinationPolicy::at(int k) const {
  switch (kind) {
    case Kind::uniform: return level;
    case Kind::edgewise: return 1.0 - std::pow(1.0 - level, k);
    case Kind::by_degree: {
      const auto it = table.find(k);
      return it == table.end() ? 0.0 : it->second;
    }
  }
  return 0.0;
}

void VaccinationPolicy::validate() const {
  auto ok = [](double pi) { return pi >= 0.0 && pi < 1.0; };
  if (kind != Kind::by_degree) {
    if (!ok(level)) throw std::invalid_argument("coverage must lie in [0, 1)");
    return;
  }
  for (auto& [k, pi] : table) {
    if (k < 0) throw std::invalid_argument("negative degree in coverage table");
    if (!ok(pi)) throw std::invalid_argument("coverage must lie in [0, 1)");
  }
}

AsymptoticParams vaccinated_params(const AsymptoticParams& params,
                                   const VaccinationPolicy& policy) {
  policy.validate();
  AsymptoticParams out;
  out.beta = params.beta;
  out.rho = params.rho;

  double kept = 0, covered = 0, kept_edges = 0, covered_edges = 0;
  std::vector<std::pair<int, double>> kept_pmf;
  kept_pmf.reserve(params.p.size());
  for (auto& [k, pk] : params.p) {
    const double pi = policy.at(k);
    kept += pk * (1 - pi);
    covered += pk * pi;
    kept_edges += k * pk * (1 - pi);
    covered_edges += k * pk * pi;
    kept_pmf.emplace_back(k, pk * (1 - pi));
  }
  if (kept <= 0)
    throw std::invalid_argument("vaccination removed every susceptible");
  for (auto& [k, pk] : kept_pmf) pk /= kept;

  out.alpha_s = params.alpha_s * kept;
  out.alpha_i = params.alpha_i;
  out.alpha_r = params.alpha_r + params.alpha_s * covered;
  out.p = std::move(kept_pmf);
  out.lambda = kept_edges / kept;
  out.mu = params.mu;
  out.mu_s = params.alpha_s * kept_edges;
  out.mu_i = params.mu_i;
  out.mu_r = params.mu_r + params.alpha_s * covered_edges;
  out.validate();
  return out;
}

double vaccinated_reproduction_number(const AsymptoticParams& params,
                                      const VaccinationPolicy& policy) {
  return limit::basic_reproduction_number(vaccinated_params(params, policy));
}

double critical_coverage(const AsymptoticParams& params,
                         VaccinationPolicy::Kind kind) {
  if (kind == VaccinationPolicy::Kind::by_degree)
    throw std::invalid_argument("critical coverage needs a one-parameter family");
  if (limit::basic_reproduction_number(params) <= 1.0) return 0.0;
  auto family = [kind](double v) {
    return kind == VaccinationPolicy::Kind::uniform ? VaccinationPolicy::uniform(v)
                                                    : VaccinationPolicy::edgewise(v);
  };
  // r0(v) is continuous and strictly decreasing, > 1 at 0 and < 1 near 1.
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = vaccinated_reproduction_number(params, family(mid));
    (r > 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

VaccinationDraw vaccinate_profile(const DegreeProfile& base,
                                  const VaccinationPolicy& policy, Rng& rng) {
  policy.validate();
  VaccinationDraw draw;
  draw.profile = base;
  for (auto& [k, c] : draw.profile.counts) {
    const double pi = policy.at(k);
    if (pi <= 0 || c.ns == 0) continue;
    std::int64_t hits = 0;
    for (std::int64_t j = 0; j < c.ns; ++j)
      if (bernoulli(rng, pi)) ++hits;
    if (hits == 0) continue;
    c.ns -= hits;
    c.nr += hits;
    draw.moved_by_degree[k] = hits;
    draw.moved += hits;
  }
  return draw;
}

std::vector<Status> vaccinate_statuses(const HalfEdgeSystem& base,
                                       const VaccinationPolicy& policy, Rng& rng) {
  policy.validate();
  std::vector<Status> status = base.status;
  for (std::int64_t v = 0; v < base.n; ++v) {
    if (status[v] != Status::susceptible) continue;
    const double pi = policy.at(base.degree[v]);
    if (pi > 0 && bernoulli(rng, pi)) status[v] = Status::recovered;
  }
  return status;
}

}  // namespace episir
