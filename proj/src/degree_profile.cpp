#include "episir/degree_profile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace episir {

std::int64_t DegreeProfile::n() const {
  std::int64_t t = 0;
  for (auto& [k, c] : counts) t += c.total();
  return t;
}

std::int64_t DegreeProfile::vertices(Status s) const {
  std::int64_t t = 0;
  for (auto& [k, c] : counts)
    t += s == Status::susceptible ? c.ns : s == Status::infective ? c.ni : c.nr;
  return t;
}

std::int64_t DegreeProfile::half_edges() const {
  std::int64_t t = 0;
  for (auto& [k, c] : counts) t += std::int64_t(k) * c.total();
  return t;
}

std::int64_t DegreeProfile::half_edges(Status s) const {
  std::int64_t t = 0;
  for (auto& [k, c] : counts)
    t += std::int64_t(k) *
         (s == Status::susceptible ? c.ns : s == Status::infective ? c.ni : c.nr);
  return t;
}

int DegreeProfile::max_degree() const {
  int m = 0;
  for (auto& [k, c] : counts)
    if (c.total() > 0) m = std::max(m, k);
  return m;
}

int DegreeProfile::max_infective_degree() const {
  int m = 0;
  for (auto& [k, c] : counts)
    if (c.ni > 0) m = std::max(m, k);
  return m;
}

void DegreeProfile::validate() const {
  for (auto& [k, c] : counts) {
    if (k < 0) throw std::invalid_argument("degree must be nonnegative");
    if (c.ns < 0 || c.ni < 0 || c.nr < 0)
      throw std::invalid_argument("vertex counts must be nonnegative");
  }
  if (n() <= 0) throw std::invalid_argument("profile has no vertices");
  if (half_edges() % 2 != 0)
    throw std::invalid_argument("half-edge total must be even");
}

static void drop_empty(std::map<int, DegreeCounts>& counts) {
  for (auto it = counts.begin(); it != counts.end();)
    it = it->second.total() == 0 ? counts.erase(it) : std::next(it);
}

std::map<int, DegreeCounts> fix_half_edge_parity(std::map<int, DegreeCounts> counts) {
  std::int64_t total = 0;
  for (auto& [k, c] : counts) total += std::int64_t(k) * c.total();
  if (total % 2 != 0) {
    int pick = -1;
    for (auto& [k, c] : counts)
      if (k % 2 == 1 && c.ns > 0) pick = std::max(pick, k);
    if (pick > 0)
      counts[pick].ns -= 1;
    else
      counts[1].nr += 1;
  }
  drop_empty(counts);
  return counts;
}

DegreeProfile build_profile(std::map<int, DegreeCounts> counts) {
  drop_empty(counts);
  DegreeProfile prof{std::move(counts)};
  prof.validate();
  return prof;
}

DegreeProfile build_profile(std::int64_t n, const DegreeDistribution& dist,
                            double alpha_s, double alpha_i, double alpha_r) {
  if (n <= 0) throw std::invalid_argument("population size must be positive");
  if (alpha_s < 0 || alpha_i < 0 || alpha_r < 0 ||
      std::abs(alpha_s + alpha_i + alpha_r - 1.0) > 1e-9)
    throw std::invalid_argument("compartment fractions must be nonnegative and sum to 1");
  std::map<int, DegreeCounts> counts;
  for (auto& [k, pk] : dist.pmf) {
    DegreeCounts c;
    c.ns = std::llround(double(n) * alpha_s * pk);
    c.ni = std::llround(double(n) * alpha_i * pk);
    c.nr = std::llround(double(n) * alpha_r * pk);
    if (c.total() > 0) counts[k] = c;
  }
  return build_profile(fix_half_edge_parity(std::move(counts)));
}

DegreeProfile build_profile_with_seeds(std::int64_t n, const DegreeDistribution& dist,
                                       const std::map<int, std::int64_t>& infective,
                                       double recovered_fraction) {
  if (recovered_fraction < 0 || recovered_fraction >= 1)
    throw std::invalid_argument("recovered_fraction must be in [0, 1)");
  std::int64_t seeds = 0;
  for (auto& [k, c] : infective) {
    if (c < 0) throw std::invalid_argument("seed counts must be nonnegative");
    seeds += c;
  }
  if (seeds >= n) throw std::invalid_argument("more seeds than vertices");
  const double rest = double(n - seeds);
  std::map<int, DegreeCounts> counts;
  for (auto& [k, pk] : dist.pmf) {
    DegreeCounts c;
    c.ns = std::llround(rest * (1.0 - recovered_fraction) * pk);
    c.nr = std::llround(rest * recovered_fraction * pk);
    if (c.total() > 0) counts[k] = c;
  }
  for (auto& [k, c] : infective) counts[k].ni += c;
  return build_profile(fix_half_edge_parity(std::move(counts)));
}

DegreeDistribution DegreeDistribution::table(std::vector<std::pair<int, double>> weights) {
  std::map<int, double> merged;
  double total = 0;
  for (auto& [k, w] : weights) {
    if (k < 0) throw std::invalid_argument("degree must be nonnegative");
    if (w < 0) throw std::invalid_argument("weights must be nonnegative");
    merged[k] += w;
    total += w;
  }
  if (total <= 0) throw std::invalid_argument("distribution has no mass");
  DegreeDistribution d;
  for (auto& [k, w] : merged)
    if (w > 0) d.pmf.emplace_back(k, w / total);
  d.truncation_k = d.pmf.back().first;
  return d;
}

DegreeDistribution DegreeDistribution::regular(int k) {
  if (k < 0) throw std::invalid_argument("degree must be nonnegative");
  DegreeDistribution d;
  d.pmf = {{k, 1.0}};
  d.truncation_k = k;
  return d;
}

DegreeDistribution DegreeDistribution::poisson(double mean, double tail_eps) {
  if (mean <= 0) throw std::invalid_argument("mean must be positive");
  DegreeDistribution d;
  double term = std::exp(-mean);
  std::vector<double> terms{term};
  int k = 0;
  // past the mode the terms decay at least geometrically; stop once the
  // remaining k^2-weighted tail is provably below tail_eps
  while (true) {
    ++k;
    term *= mean / k;
    terms.push_back(term);
    if (k > mean && mean / (k + 1) < 0.5) {
      double bound = double(k + 1) * (k + 1) * term * (mean / (k + 1)) * 4.0;
      if (bound < tail_eps) break;
    }
    if (k > 100000) throw std::runtime_error("poisson truncation did not converge");
  }
  double kept = 0;
  for (double v : terms) kept += v;
  for (int j = 0; j <= k; ++j)
    if (terms[j] > 0) d.pmf.emplace_back(j, terms[j] / kept);
  d.truncation_k = k;
  d.tail_mass = std::max(0.0, 1.0 - kept);
  return d;
}

DegreeDistribution DegreeDistribution::power_law(double exponent, int k_min, int k_max,
                                                 double tail_eps) {
  if (k_min < 1) throw std::invalid_argument("k_min must be at least 1");
  if (k_max > 0 && k_max < k_min) throw std::invalid_argument("k_max below k_min");
  if (k_max <= 0) {
    if (exponent <= 3)
      throw std::invalid_argument("automatic cutoff needs exponent > 3");
    // integral bound on the k^2-weighted tail picks the cut
    double z = 0;
    for (int k = k_min; k <= 2000000; ++k) {
      double t = std::pow(double(k), -exponent);
      z += t;
      if (t < 1e-18 * z) break;
    }
    double cut = std::pow(tail_eps * (exponent - 3.0) * z, 1.0 / (3.0 - exponent));
    k_max = std::max(k_min, static_cast<int>(std::ceil(cut)));
  }
  std::vector<std::pair<int, double>> w;
  for (int k = k_min; k <= k_max; ++k)
    w.emplace_back(k, std::pow(double(k), -exponent));
  auto d = table(std::move(w));
  d.truncation_k = k_max;
  return d;
}

double DegreeDistribution::mean_degree() const {
  double m = 0;
  for (auto& [k, pk] : pmf) m += double(k) * pk;
  return m;
}

double AsymptoticParams::p_at(int k) const {
  auto it = std::lower_bound(p.begin(), p.end(), k,
                             [](const auto& a, int b) { return a.first < b; });
  return it != p.end() && it->first == k ? it->second : 0.0;
}

void AsymptoticParams::validate() const {
  auto close = [](double a, double b, double scale) {
    return std::abs(a - b) <= 1e-12 * std::max(1.0, scale);
  };
  if (!close(alpha_s + alpha_i + alpha_r, 1.0, 1.0))
    throw std::invalid_argument("compartment fractions do not sum to 1");
  double psum = 0;
  for (auto& [k, pk] : p) {
    if (pk < 0) throw std::invalid_argument("degree mass must be nonnegative");
    psum += pk;
  }
  if (!close(psum, 1.0, 1.0))
    throw std::invalid_argument("degree distribution does not sum to 1");
  if (!close(mu_s, alpha_s * lambda, mu))
    throw std::invalid_argument("susceptible half-edge density mismatch");
  if (!close(mu_s + mu_i + mu_r, mu, mu))
    throw std::invalid_argument("half-edge densities do not sum to the total");
  if (beta <= 0) throw std::invalid_argument("infection rate must be positive");
  if (rho < 0) throw std::invalid_argument("recovery rate must be nonnegative");
}

static AsymptoticParams params_from_counts(const DegreeProfile& profile, double beta,
                                           double rho, bool drop_seeds) {
  profile.validate();
  const std::int64_t ns = profile.vertices(Status::susceptible);
  if (ns == 0) throw std::invalid_argument("profile has no susceptible vertices");
  const std::int64_t ni = drop_seeds ? 0 : profile.vertices(Status::infective);
  const std::int64_t pop = drop_seeds
                               ? profile.n() - profile.vertices(Status::infective)
                               : profile.n();
  AsymptoticParams par;
  par.beta = beta;
  par.rho = rho;
  par.alpha_s = double(ns) / double(pop);
  par.alpha_i = double(ni) / double(pop);
  par.alpha_r = 1.0 - par.alpha_s - par.alpha_i;
  for (auto& [k, c] : profile.counts)
    if (c.ns > 0) par.p.emplace_back(k, double(c.ns) / double(ns));
  for (auto& [k, pk] : par.p) par.lambda += double(k) * pk;
  par.mu_s = par.alpha_s * par.lambda;
  par.mu_i = drop_seeds ? 0.0
                        : double(profile.half_edges(Status::infective)) / double(pop);
  par.mu_r = double(profile.half_edges(Status::recovered)) / double(pop);
  par.mu = par.mu_s + par.mu_i + par.mu_r;
  par.validate();
  return par;
}

AsymptoticParams extract_params(const DegreeProfile& profile, double beta, double rho) {
  return params_from_counts(profile, beta, rho, false);
}

AsymptoticParams extract_params_seedless(const DegreeProfile& profile, double beta,
                                         double rho) {
  return params_from_counts(profile, beta, rho, true);
}

AsymptoticParams params_from_distribution(const DegreeDistribution& dist, double alpha_s,
                                          double alpha_i, double alpha_r, double beta,
                                          double rho) {
  if (alpha_s <= 0) throw std::invalid_argument("susceptible fraction must be positive");
  if (alpha_i < 0 || alpha_r < 0 || std::abs(alpha_s + alpha_i + alpha_r - 1.0) > 1e-12)
    throw std::invalid_argument("compartment fractions must sum to 1");
  AsymptoticParams par;
  par.beta = beta;
  par.rho = rho;
  par.alpha_s = alpha_s;
  par.alpha_i = alpha_i;
  par.alpha_r = alpha_r;
  par.p = dist.pmf;
  par.lambda = dist.mean_degree();
  par.mu = par.lambda;
  par.mu_s = alpha_s * par.lambda;
  par.mu_i = alpha_i * par.lambda;
  par.mu_r = alpha_r * par.lambda;
  par.validate();
  return par;
}

bool RegularityReport::all_pass() const {
  for (auto& c : checks)
    if (!c.pass) return false;
  return true;
}

const RegularityCheck* RegularityReport::find(const std::string& name) const {
  for (auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

RegularityReport validate_regularity(const DegreeProfile& profile,
                                     const AsymptoticParams& params,
                                     const RegularityThresholds& thresholds) {
  RegularityReport rep;
  const double n = double(profile.n());

  rep.checks.push_back({"positive-susceptible-fraction", params.alpha_s > 0,
                        params.alpha_s, "fraction of vertices that are susceptible"});

  rep.checks.push_back({"susceptible-degree-distribution", params.lambda > 0,
                        params.lambda,
                        "mean susceptible degree; zero means no transmission"});

  rep.checks.push_back({"mean-susceptible-degree", true, params.lambda,
                        "exact for the empirical distribution by construction"});

  rep.checks.push_back({"half-edge-densities", params.mu > 0, params.mu,
                        "half-edges per vertex"});

  const double max_inf = double(profile.max_infective_degree());
  const double cap = std::pow(n, thresholds.max_infective_degree_exponent);
  rep.checks.push_back({"max-infective-degree", max_inf <= cap, max_inf,
                        "largest infective degree against the n^" +
                            std::to_string(thresholds.max_infective_degree_exponent) +
                            " proxy"});

  const bool terminates = params.p_at(1) > 0 || params.rho > 0 || params.mu_r > 0;
  rep.checks.push_back({"terminating-mechanism", terminates, params.rho,
                        "degree-1 mass, recovery, or recovered half-edges must be "
                        "present for transmission to die out"});

  double second = 0;
  for (auto& [k, c] : profile.counts) second += double(k) * k * c.total() / n;
  rep.checks.push_back({"second-moment", second <= thresholds.second_moment_max, second,
                        "sum_k k^2 n_k / n"});

  return rep;
}

void write_profile_csv(const DegreeProfile& profile, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "degree,ns,ni,nr\n";
  for (auto& [k, c] : profile.counts)
    out << k << ',' << c.ns << ',' << c.ni << ',' << c.nr << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

DegreeProfile read_profile_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty profile file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "degree,ns,ni,nr")
    throw std::runtime_error("bad profile header in " + path);
  std::map<int, DegreeCounts> counts;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    long long v[4];
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(row, field, ',')) throw std::runtime_error("short row in " + path);
      try {
        v[i] = std::stoll(field);
      } catch (const std::exception&) {
        throw std::runtime_error("bad integer '" + field + "' in " + path);
      }
    }
    auto& c = counts[int(v[0])];
    c.ns += v[1];
    c.ni += v[2];
    c.nr += v[3];
  }
  return build_profile(std::move(counts));
}

}  // namespace episir
