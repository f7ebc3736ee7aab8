#include "episir/outbreak.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "episir/limit_system.hpp"

namespace episir {

std::vector<double> transmission_pmf(int l, double beta, double rho) {
  if (l < 0) throw std::invalid_argument("line count must be nonnegative");
  if (beta <= 0) throw std::invalid_argument("contact rate must be positive");
  if (rho < 0) throw std::invalid_argument("recovery rate must be nonnegative");
  std::vector<double> pmf(l + 1, 0.0);
  if (l == 0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (rho == 0) {
    pmf[l] = 1.0;
    return pmf;
  }
  // P(j) = r C(l,j) B(j + 1, l - j + r) with r = rho / beta, via the ratio
  // P(j) / P(j - 1) = (l - j + 1) / (l - j + r).
  const double r = rho / beta;
  if (l <= 60) {
    pmf[0] = r / (l + r);
    for (int j = 1; j <= l; ++j) pmf[j] = pmf[j - 1] * (l - j + 1) / (l - j + r);
  } else {
    double lp = std::log(r) - std::log(l + r);
    pmf[0] = std::exp(lp);
    for (int j = 1; j <= l; ++j) {
      lp += std::log(double(l - j + 1)) - std::log(l - j + r);
      pmf[j] = std::exp(lp);
    }
  }
  double sum = 0;
  for (double v : pmf) sum += v;
  for (double& v : pmf) v /= sum;
  return pmf;
}

double transmission_pgf(int l, double beta, double rho, double x) {
  auto pmf = transmission_pmf(l, beta, rho);
  double acc = 0;
  for (int j = l; j >= 0; --j) acc = acc * x + pmf[j];
  return acc;
}

double OffspringModel::pgf(double x) const {
  double acc = 0;
  for (std::size_t j = pmf.size(); j-- > 0;) acc = acc * x + pmf[j];
  return acc;
}

double OffspringModel::pgf_derivative(double x) const {
  double acc = 0;
  for (std::size_t j = pmf.size(); j-- > 1;) acc = acc * x + j * pmf[j];
  return acc;
}

OffspringModel offspring_model(const AsymptoticParams& params, int truncation_k) {
  params.validate();
  if (params.mu_i > 1e-9 * params.mu)
    throw std::invalid_argument(
        "offspring law is defined for seed-free half-edge densities (mu_i = 0)");

  int cut = params.max_degree();
  if (truncation_k > 0) {
    cut = std::min(cut, truncation_k);
  } else {
    // Smallest cut whose dropped second moment stays below 1e-10.
    double tail = 0;
    for (auto it = params.p.rbegin(); it != params.p.rend(); ++it) {
      double next = tail + double(it->first) * it->first * it->second;
      if (next >= 1e-10) break;
      tail = next;
      cut = it->first - 1;
    }
  }

  OffspringModel model;
  model.beta = params.beta;
  model.rho = params.rho;
  model.truncation_k = cut;
  model.pmf.assign(std::size_t(std::max(cut, 1)), 0.0);
  model.pmf[0] += params.mu_r / params.mu;
  double kept = params.mu_r / params.mu;
  for (auto& [k, pk] : params.p) {
    if (k == 0 || pk == 0) continue;
    const double w = params.alpha_s * k * pk / params.mu;
    if (k > cut) {
      model.tail_mass += w;
      continue;
    }
    kept += w;
    auto line = transmission_pmf(k - 1, params.beta, params.rho);
    for (int j = 0; j < k; ++j) model.pmf[j] += w * line[j];
  }
  if (kept <= 0) throw std::invalid_argument("offspring law has no mass");
  for (double& v : model.pmf) v /= kept;
  for (std::size_t j = 0; j < model.pmf.size(); ++j) model.mean += j * model.pmf[j];
  return model;
}

double extinction_probability(const OffspringModel& model) {
  if (model.pmf.empty()) throw std::invalid_argument("empty offspring law");
  // Deterministic single-child line: every point of [0, 1] is fixed.
  if (model.pmf.size() > 1 && model.pmf[1] >= 1.0 - 1e-15) return 0.0;
  if (model.mean <= 1.0) return 1.0;
  // The iteration x <- pgf(x) from 0 increases to the smallest fixed point;
  // Newton sharpens the last digits.
  double x = 0;
  for (int it = 0; it < 400; ++it) {
    double next = model.pgf(x);
    if (next - x < 1e-13) {
      x = next;
      break;
    }
    x = next;
  }
  for (int it = 0; it < 8; ++it) {
    double denom = model.pgf_derivative(x) - 1.0;
    if (denom == 0) break;
    double step = (model.pgf(x) - x) / denom;
    x -= step;
    if (std::abs(step) < 1e-16) break;
  }
  return std::clamp(x, 0.0, 1.0);
}

OutbreakResult outbreak_probability(const AsymptoticParams& params,
                                    const std::map<int, std::int64_t>& infective_counts) {
  for (auto& [k, c] : infective_counts) {
    if (k < 0) throw std::invalid_argument("seed degree must be nonnegative");
    if (c < 0) throw std::invalid_argument("seed count must be nonnegative");
  }
  auto model = offspring_model(params);
  OutbreakResult res;
  res.q = extinction_probability(model);
  res.mean_offspring = model.mean;
  res.r0 = limit::basic_reproduction_number(params);
  res.truncation_k = model.truncation_k;
  res.tail_mass = model.tail_mass;
  if (res.q >= 1.0) {
    res.probability = 0.0;
    return res;
  }
  double log_miss = 0;
  bool zero_factor = false;
  for (auto& [k, c] : infective_counts) {
    if (c == 0 || k == 0) continue;
    double phi = transmission_pgf(k, params.beta, params.rho, res.q);
    if (phi <= 0) {
      zero_factor = true;
      break;
    }
    log_miss += double(c) * std::log(phi);
  }
  res.probability = zero_factor ? 1.0 : 1.0 - std::exp(log_miss);
  return res;
}

BranchingRun simulate_branching(const OffspringModel& model,
                                const std::map<int, std::int64_t>& infective_counts,
                                Rng& rng, std::int64_t cap) {
  auto draw = [&rng](const std::vector<double>& pmf) {
    double u = uniform01(rng);
    double acc = 0;
    for (std::size_t j = 0; j < pmf.size(); ++j) {
      acc += pmf[j];
      if (u <= acc) return std::int64_t(j);
    }
    return std::int64_t(pmf.size()) - 1;
  };

  BranchingRun run;
  std::int64_t active = 0;
  for (auto& [k, c] : infective_counts) {
    if (c <= 0) continue;
    auto line = transmission_pmf(k, model.beta, model.rho);
    for (std::int64_t i = 0; i < c; ++i) active += draw(line);
  }
  run.progeny = active;
  while (active > 0) {
    if (run.progeny >= cap) return run;  // extinct stays false
    --active;
    std::int64_t kids = draw(model.pmf);
    active += kids;
    run.progeny += kids;
  }
  run.extinct = true;
  return run;
}

}  // namespace episir
