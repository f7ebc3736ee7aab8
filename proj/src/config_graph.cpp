#include "episir/config_graph.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace episir {

HalfEdgeSystem HalfEdgeSystem::from_profile(const DegreeProfile& profile) {
  profile.validate();
  HalfEdgeSystem sys;
  sys.n = profile.n();
  sys.degree.reserve(sys.n);
  sys.status.reserve(sys.n);
  for (Status st : {Status::susceptible, Status::infective, Status::recovered}) {
    for (auto& [k, c] : profile.counts) {
      const std::int64_t count =
          st == Status::susceptible ? c.ns : st == Status::infective ? c.ni : c.nr;
      for (std::int64_t j = 0; j < count; ++j) {
        sys.degree.push_back(k);
        sys.status.push_back(st);
      }
    }
  }
  sys.he_offset.resize(sys.n + 1);
  sys.he_offset[0] = 0;
  for (std::int64_t v = 0; v < sys.n; ++v)
    sys.he_offset[v + 1] = sys.he_offset[v] + sys.degree[v];
  const std::int64_t total = sys.he_offset[sys.n];
  sys.owner.resize(total);
  for (std::int64_t v = 0; v < sys.n; ++v)
    for (std::int64_t h = sys.he_offset[v]; h < sys.he_offset[v + 1]; ++h)
      sys.owner[h] = v;
  sys.partner.assign(total, -1);
  return sys;
}

void pair_half_edges(std::vector<std::int64_t>& partner, std::int64_t total,
                     Rng& rng) {
  if (total % 2 != 0) throw std::invalid_argument("odd number of half-edges");
  partner.assign(std::size_t(total), -1);
  std::vector<std::int64_t> pool(total);
  for (std::int64_t h = 0; h < total; ++h) pool[h] = h;
  std::int64_t size = total;
  while (size > 0) {
    const std::int64_t current = pool[size - 1];
    --size;
    const std::int64_t idx = std::int64_t(uniform_below(rng, std::uint64_t(size)));
    const std::int64_t mate = pool[idx];
    pool[idx] = pool[size - 1];
    --size;
    partner[current] = mate;
    partner[mate] = current;
  }
}

void pair_configuration(HalfEdgeSystem& sys, Rng& rng) {
  pair_half_edges(sys.partner, sys.total_half_edges(), rng);
}

DefectCount count_defects(const HalfEdgeSystem& sys) {
  DefectCount d;
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
  edges.reserve(sys.total_half_edges() / 2);
  for (std::int64_t h = 0; h < sys.total_half_edges(); ++h) {
    const std::int64_t p = sys.partner[h];
    if (p <= h) continue;
    const std::int64_t u = sys.owner[h], v = sys.owner[p];
    if (u == v)
      d.loops += 1;
    else
      edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges.begin(), edges.end());
  std::int64_t run = 1;
  for (std::size_t i = 1; i <= edges.size(); ++i) {
    if (i < edges.size() && edges[i] == edges[i - 1]) {
      ++run;
    } else {
      d.parallel_pairs += run * (run - 1) / 2;
      run = 1;
    }
  }
  return d;
}

SimpleSampleResult sample_simple(const DegreeProfile& profile, Rng& rng,
                                 int max_attempts) {
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    SimpleSampleResult res{HalfEdgeSystem::from_profile(profile), attempt};
    pair_configuration(res.system, rng);
    if (count_defects(res.system).simple()) return res;
  }
  throw std::runtime_error("no simple pairing found in " +
                           std::to_string(max_attempts) + " attempts");
}

void write_edge_list(const HalfEdgeSystem& sys, std::ostream& out) {
  for (std::int64_t h = 0; h < sys.total_half_edges(); ++h) {
    const std::int64_t p = sys.partner[h];
    if (p <= h) continue;
    const std::int64_t u = sys.owner[h], v = sys.owner[p];
    out << std::min(u, v) << ',' << std::max(u, v) << '\n';
  }
}

}  // namespace episir
