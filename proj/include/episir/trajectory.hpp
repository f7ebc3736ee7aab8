#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

namespace episir {

enum class EventKind : std::uint8_t {
  infection,           // infective half-edge pairs with a susceptible one
  recovery,            // an infective vertex recovers
  infective_pairing,   // pairs with another free infective half-edge
  recovered_pairing,   // pairs with a free recovered half-edge
};

const char* event_kind_name(EventKind k);

enum class ClockKind : std::uint8_t { original, transformed };

enum class StopReason : std::uint8_t { absorbed, horizon, threshold, max_events };

// Event-indexed record of one run.  Count vectors hold the state just after
// each event; they are empty when the run only recorded finals.
struct Trajectory {
  ClockKind clock = ClockKind::original;
  StopReason stop = StopReason::absorbed;

  std::int64_t n = 0;
  std::int64_t s0 = 0, i0 = 0, r0 = 0;
  std::int64_t x_s0 = 0, x_i0 = 0, x_r0 = 0;

  std::vector<double> time;
  std::vector<EventKind> kind;
  std::vector<std::int64_t> s, i, r;
  std::vector<std::int64_t> x_s, x_i, x_r;
  std::vector<double> original_time;  // transformed runs asked to map back
  std::vector<std::int64_t> z;        // timer runs: red half-edge count
  std::int64_t z0 = 0;

  double end_time = 0;
  // transformed clock value when the free infective pool emptied
  double tau_star = std::numeric_limits<double>::quiet_NaN();
  std::int64_t final_susceptible = 0;
  std::int64_t final_infective = 0;
  std::int64_t final_recovered = 0;
  std::int64_t ever_infected = 0;

  std::size_t events() const { return time.size(); }

  // State at clock value t (right-continuous step functions).
  std::int64_t s_at(double t) const;
  std::int64_t i_at(double t) const;
  std::int64_t r_at(double t) const;

  // Clock value when the susceptible count first drops below the threshold;
  // NaN if it never does.
  double first_time_susceptible_below(std::int64_t threshold) const;
};

// Pathwise clock change of an original-clock run: the transformed value
// accrues at rate beta X_I / (X - 1) per unit of original time.  Needs the
// count vectors; returns one value per event.
std::vector<double> transformed_times(const Trajectory& traj, double beta);

void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace episir
