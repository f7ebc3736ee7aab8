#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "episir/degree_profile.hpp"
#include "episir/rng.hpp"

namespace episir {

// Half-edge representation of a (multi)graph under construction. Vertices are
// laid out deterministically from a profile: susceptible block first, then
// infective, then recovered, each ordered by ascending degree; a vertex's
// half-edges are the contiguous ids [he_offset[v], he_offset[v+1]).
struct HalfEdgeSystem {
  std::int64_t n = 0;
  std::vector<std::int64_t> he_offset;  // size n + 1
  std::vector<std::int32_t> degree;     // size n
  std::vector<Status> status;           // initial compartment per vertex
  std::vector<std::int64_t> owner;      // half-edge id -> vertex
  std::vector<std::int64_t> partner;    // half-edge id -> matched id, -1 if free

  std::int64_t total_half_edges() const { return std::int64_t(owner.size()); }

  static HalfEdgeSystem from_profile(const DegreeProfile& profile);
};

// Loops counted once each; a bundle of m parallel edges between two distinct
// vertices contributes m-choose-2 pairs. The graph is simple exactly when
// both counts are zero.
struct DefectCount {
  std::int64_t loops = 0;
  std::int64_t parallel_pairs = 0;
  std::int64_t total() const { return loops + parallel_pairs; }
  bool simple() const { return loops == 0 && parallel_pairs == 0; }
};

// Uniform perfect matching of all half-edges: repeatedly pair an arbitrary
// free half-edge with a uniformly random other free one. Linear time.
void pair_configuration(HalfEdgeSystem& sys, Rng& rng);

// Same matching draw written straight into a partner array (resized to
// match); lets callers re-pair without copying a whole system.
void pair_half_edges(std::vector<std::int64_t>& partner, std::int64_t total,
                     Rng& rng);

DefectCount count_defects(const HalfEdgeSystem& sys);

// Rejection sampling until the pairing comes out simple, which makes the
// accepted graph uniform over simple graphs with this degree sequence.
// Throws std::runtime_error when max_attempts pairings were all rejected.
struct SimpleSampleResult {
  HalfEdgeSystem system;
  int attempts = 0;
};
SimpleSampleResult sample_simple(const DegreeProfile& profile, Rng& rng,
                                 int max_attempts = 1000);

// One "u,v" line per edge in half-edge id order, smaller endpoint first;
// loops appear as "u,u" and parallel edges repeat.
void write_edge_list(const HalfEdgeSystem& sys, std::ostream& out);

}  // namespace episir
