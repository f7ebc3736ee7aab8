#pragma once

// Brute-force reference implementations used only by tests. These stay
// independent of the library code they check: plain enumeration and
// quadrature, no shared helpers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <vector>

namespace oracle {

// Enumerate all perfect matchings of half-edges {0, ..., x-1}: the smallest
// unmatched id is paired with every larger unmatched id in turn, so each
// matching is produced exactly once ((x-1)!! in total).
inline void enumerate_matchings(std::vector<int>& partner,
                                const std::function<void(const std::vector<int>&)>& emit) {
  int first = -1;
  for (int h = 0; h < int(partner.size()); ++h)
    if (partner[h] < 0) {
      first = h;
      break;
    }
  if (first < 0) {
    emit(partner);
    return;
  }
  for (int other = first + 1; other < int(partner.size()); ++other) {
    if (partner[other] >= 0) continue;
    partner[first] = other;
    partner[other] = first;
    enumerate_matchings(partner, emit);
    partner[first] = -1;
    partner[other] = -1;
  }
}

// Sorted edge list (owner pairs) of a matching; loops appear as (v, v).
inline std::vector<std::pair<int, int>> edge_set(const std::vector<int>& partner,
                                                 const std::vector<int>& owner) {
  std::vector<std::pair<int, int>> edges;
  for (int h = 0; h < int(partner.size()); ++h)
    if (partner[h] > h) {
      int u = owner[h], v = owner[partner[h]];
      edges.emplace_back(std::min(u, v), std::max(u, v));
    }
  std::sort(edges.begin(), edges.end());
  return edges;
}

inline bool is_simple(const std::vector<std::pair<int, int>>& edges) {
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].first == edges[i].second) return false;
    if (i > 0 && edges[i] == edges[i - 1]) return false;
  }
  return true;
}

// Exact distribution over edge sets produced by a uniform matching of the
// half-edges implied by `degrees`.
inline std::map<std::vector<std::pair<int, int>>, int> matching_census(
    const std::vector<int>& degrees) {
  std::vector<int> owner;
  for (int v = 0; v < int(degrees.size()); ++v)
    for (int j = 0; j < degrees[v]; ++j) owner.push_back(v);
  std::vector<int> partner(owner.size(), -1);
  std::map<std::vector<std::pair<int, int>>, int> census;
  enumerate_matchings(partner, [&](const std::vector<int>& m) {
    census[edge_set(m, owner)] += 1;
  });
  return census;
}

// Adaptive Simpson quadrature, for reference integrals in tests.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, tol / 2, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-11) {
  const double m = 0.5 * (a + b);
  return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, 48);
}

inline double binomial(int n, int k) {
  double r = 1;
  for (int j = 1; j <= k; ++j) r *= double(n - k + j) / j;
  return r;
}

}  // namespace oracle
