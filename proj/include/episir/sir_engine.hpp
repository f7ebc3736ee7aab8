#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "episir/config_graph.hpp"
#include "episir/rng.hpp"
#include "episir/trajectory.hpp"

namespace episir {

struct EngineOptions {
  ClockKind clock = ClockKind::original;
  enum class Record : std::uint8_t { finals, counts } record = Record::counts;
  // Reveal a matching fixed at the start of the run instead of pairing
  // half-edges at contact time.  Uses the base system's matching when it has
  // one, otherwise draws a fresh configuration per run.
  bool pregenerated = false;
  // transformed clock: also accumulate the original-time integral per event
  bool track_original_time = false;
  double horizon = std::numeric_limits<double>::infinity();
  // stop once S < stop_below_fraction * n (0 disables); classification runs
  // use this to skip the tail of large outbreaks
  double stop_below_fraction = 0;
  std::int64_t max_events = -1;  // < 0: unlimited
};

// Event-driven SIR on a degree-profile population.  Free infective
// half-edges fire at rate beta and pair with a uniform free half-edge;
// infective vertices recover at rate rho.  The transformed clock runs the
// same jump chain with every rate scaled by (X - 1) / (beta X_I) and stops
// when X_I = 0.
class SirEngine {
 public:
  SirEngine(const HalfEdgeSystem& base, double beta, double rho);

  Trajectory run(Rng& rng, const EngineOptions& opts);
  // Same, with the initial compartments replaced (layout and degrees kept).
  Trajectory run(Rng& rng, const EngineOptions& opts,
                 const std::vector<Status>& initial_status);

  // Vertex compartments after the most recent run.
  const std::vector<Status>& statuses() const { return status_; }
  const HalfEdgeSystem& base() const { return base_; }
  double beta() const { return beta_; }
  double rho() const { return rho_; }

 private:
  Trajectory run_impl(Rng& rng, const EngineOptions& opts,
                      const std::vector<Status>* initial_status);
  void consume(std::int64_t he);

  HalfEdgeSystem base_;
  double beta_ = 0;
  double rho_ = 0;

  // per-run working state
  std::vector<Status> status_;
  std::vector<std::int64_t> partner_;
  std::vector<std::int64_t> free_all_, free_inf_, inf_verts_;
  std::vector<std::int64_t> pos_all_, pos_inf_, pos_vert_;
  std::int64_t x_s_ = 0, x_r_ = 0;
};

// Timer-based variant of the same process: every contact line of an
// infective vertex gets an alarm clock, and the ones set to go off before
// the owner's recovery ("red" lines) are the only ones that fire.  Tracks
// the red count Z per event.  Original clock only.
struct TimedOptions {
  bool pregenerated = false;
  double horizon = std::numeric_limits<double>::infinity();
};

Trajectory run_timed_sir(const HalfEdgeSystem& base, double beta, double rho,
                         Rng& rng, const TimedOptions& opts = {});

}  // namespace episir
