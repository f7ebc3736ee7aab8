#include "episir/sir_engine.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace episir {

const char* event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::infection: return "infection";
    case EventKind::recovery: return "recovery";
    case EventKind::infective_pairing: return "infective_pairing";
    case EventKind::recovered_pairing: return "recovered_pairing";
  }
  return "?";
}

namespace {

std::int64_t value_at(const std::vector<double>& time,
                      const std::vector<std::int64_t>& series, std::int64_t init,
                      double t) {
  const auto it = std::upper_bound(time.begin(), time.end(), t);
  if (it == time.begin()) return init;
  return series[std::size_t(it - time.begin()) - 1];
}

}  // namespace

std::int64_t Trajectory::s_at(double t) const { return value_at(time, s, s0, t); }
std::int64_t Trajectory::i_at(double t) const { return value_at(time, i, i0, t); }
std::int64_t Trajectory::r_at(double t) const { return value_at(time, r, r0, t); }

double Trajectory::first_time_susceptible_below(std::int64_t threshold) const {
  if (s0 < threshold) return 0.0;
  // S is nonincreasing, so the crossing index can be bisected.
  const auto it =
      std::partition_point(s.begin(), s.end(),
                           [threshold](std::int64_t v) { return v >= threshold; });
  if (it == s.end()) return std::numeric_limits<double>::quiet_NaN();
  return time[std::size_t(it - s.begin())];
}

std::vector<double> transformed_times(const Trajectory& traj, double beta) {
  if (traj.clock != ClockKind::original)
    throw std::invalid_argument("run already uses the transformed clock");
  if (traj.events() > 0 && traj.x_i.empty())
    throw std::invalid_argument("clock change needs the per-event count series");
  std::vector<double> out(traj.events());
  double tau = 0, prev = 0;
  std::int64_t x = traj.x_s0 + traj.x_i0 + traj.x_r0;
  std::int64_t xi = traj.x_i0;
  for (std::size_t j = 0; j < traj.events(); ++j) {
    if (xi > 0) tau += (traj.time[j] - prev) * beta * double(xi) / double(x - 1);
    prev = traj.time[j];
    x = traj.x_s[j] + traj.x_i[j] + traj.x_r[j];
    xi = traj.x_i[j];
    out[j] = tau;
  }
  return out;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  const bool with_orig = !traj.original_time.empty();
  const bool with_z = !traj.z.empty();
  out << "time,event,S,I,R,XS,XI,XR";
  if (with_orig) out << ",original_time";
  if (with_z) out << ",Z";
  out << '\n';
  char buf[256];
  for (std::size_t j = 0; j < traj.events(); ++j) {
    std::snprintf(buf, sizeof buf, "%.12g,%s,%lld,%lld,%lld,%lld,%lld,%lld",
                  traj.time[j], event_kind_name(traj.kind[j]),
                  static_cast<long long>(traj.s[j]), static_cast<long long>(traj.i[j]),
                  static_cast<long long>(traj.r[j]),
                  static_cast<long long>(traj.x_s[j]),
                  static_cast<long long>(traj.x_i[j]),
                  static_cast<long long>(traj.x_r[j]));
    out << buf;
    if (with_orig) {
      std::snprintf(buf, sizeof buf, ",%.12g", traj.original_time[j]);
      out << buf;
    }
    if (with_z) out << ',' << traj.z[j];
    out << '\n';
  }
}

SirEngine::SirEngine(const HalfEdgeSystem& base, double beta, double rho)
    : base_(base), beta_(beta), rho_(rho) {
  if (beta <= 0) throw std::invalid_argument("contact rate must be positive");
  if (rho < 0) throw std::invalid_argument("recovery rate must be nonnegative");
  if (base_.n == 0) throw std::invalid_argument("empty population");
}

void SirEngine::consume(std::int64_t he) {
  const std::int64_t pa = pos_all_[he];
  if (pa < 0) throw std::logic_error("half-edge consumed twice");
  const std::int64_t last = free_all_.back();
  free_all_[pa] = last;
  pos_all_[last] = pa;
  free_all_.pop_back();
  pos_all_[he] = -1;
  switch (status_[base_.owner[he]]) {
    case Status::susceptible:
      --x_s_;
      break;
    case Status::infective: {
      const std::int64_t pi = pos_inf_[he];
      const std::int64_t tail = free_inf_.back();
      free_inf_[pi] = tail;
      pos_inf_[tail] = pi;
      free_inf_.pop_back();
      pos_inf_[he] = -1;
      break;
    }
    case Status::recovered:
      --x_r_;
      break;
  }
}

Trajectory SirEngine::run(Rng& rng, const EngineOptions& opts) {
  return run_impl(rng, opts, nullptr);
}

Trajectory SirEngine::run(Rng& rng, const EngineOptions& opts,
                          const std::vector<Status>& initial_status) {
  if (std::int64_t(initial_status.size()) != base_.n)
    throw std::invalid_argument("initial status size mismatch");
  return run_impl(rng, opts, &initial_status);
}

Trajectory SirEngine::run_impl(Rng& rng, const EngineOptions& opts,
                               const std::vector<Status>* initial_status) {
  const std::int64_t n = base_.n;
  const std::int64_t total = base_.total_half_edges();

  status_ = initial_status ? *initial_status : base_.status;
  const bool base_paired = !base_.partner.empty() && base_.partner[0] >= 0;
  if (opts.pregenerated) {
    if (base_paired)
      partner_ = base_.partner;
    else
      pair_half_edges(partner_, total, rng);
  }

  free_all_.resize(total);
  pos_all_.resize(total);
  for (std::int64_t h = 0; h < total; ++h) {
    free_all_[h] = h;
    pos_all_[h] = h;
  }
  free_inf_.clear();
  pos_inf_.assign(total, -1);
  inf_verts_.clear();
  pos_vert_.assign(n, -1);
  x_s_ = x_r_ = 0;

  std::int64_t s = 0, i = 0, r = 0;
  for (std::int64_t v = 0; v < n; ++v) {
    const std::int32_t deg = base_.degree[v];
    switch (status_[v]) {
      case Status::susceptible:
        ++s;
        x_s_ += deg;
        break;
      case Status::infective:
        ++i;
        pos_vert_[v] = std::int64_t(inf_verts_.size());
        inf_verts_.push_back(v);
        break;
      case Status::recovered:
        ++r;
        x_r_ += deg;
        break;
    }
  }
  for (std::int64_t h = 0; h < total; ++h) {
    if (status_[base_.owner[h]] == Status::infective) {
      pos_inf_[h] = std::int64_t(free_inf_.size());
      free_inf_.push_back(h);
    }
  }

  Trajectory traj;
  traj.clock = opts.clock;
  traj.n = n;
  traj.s0 = s;
  traj.i0 = i;
  traj.r0 = r;
  traj.x_s0 = x_s_;
  traj.x_i0 = std::int64_t(free_inf_.size());
  traj.x_r0 = x_r_;
  traj.ever_infected = i;

  const bool recording = opts.record == EngineOptions::Record::counts;
  if (recording) {
    const std::size_t cap = std::size_t(total / 2 + i + 1);
    traj.time.reserve(cap);
    traj.kind.reserve(cap);
    traj.s.reserve(cap);
    traj.i.reserve(cap);
    traj.r.reserve(cap);
    traj.x_s.reserve(cap);
    traj.x_i.reserve(cap);
    traj.x_r.reserve(cap);
  }

  double clock = 0, t_orig = 0;
  std::int64_t events_done = 0;

  while (true) {
    if (opts.max_events >= 0 && events_done >= opts.max_events) {
      traj.stop = StopReason::max_events;
      break;
    }
    const std::int64_t xi = std::int64_t(free_inf_.size());
    const std::int64_t x = std::int64_t(free_all_.size());
    const double pair_rate = beta_ * double(xi);
    const double rec_rate = rho_ * double(i);
    double total_rate;
    if (opts.clock == ClockKind::transformed) {
      if (xi == 0) {
        traj.tau_star = clock;
        traj.stop = StopReason::absorbed;
        break;
      }
      total_rate = (pair_rate + rec_rate) * double(x - 1) / pair_rate;
    } else {
      total_rate = pair_rate + rec_rate;
      if (total_rate <= 0) {
        traj.stop = StopReason::absorbed;
        break;
      }
    }

    const double dt = exponential(rng, total_rate);
    if (clock + dt > opts.horizon) {
      clock = opts.horizon;
      traj.stop = StopReason::horizon;
      break;
    }
    clock += dt;
    if (opts.clock == ClockKind::transformed && opts.track_original_time)
      t_orig += dt * double(x - 1) / pair_rate;

    EventKind ev;
    if (bernoulli(rng, pair_rate / (pair_rate + rec_rate))) {
      const std::int64_t h = free_inf_[uniform_below(rng, free_inf_.size())];
      std::int64_t mate;
      if (opts.pregenerated) {
        mate = partner_[h];
        if (pos_all_[mate] < 0)
          throw std::logic_error("revealed matching lost its pair");
      } else {
        std::uint64_t j = uniform_below(rng, std::uint64_t(x - 1));
        if (std::int64_t(j) >= pos_all_[h]) ++j;
        mate = free_all_[j];
      }
      const std::int64_t w = base_.owner[mate];
      const Status mate_status = status_[w];
      consume(h);
      consume(mate);
      if (mate_status == Status::susceptible) {
        ev = EventKind::infection;
        status_[w] = Status::infective;
        --s;
        ++i;
        ++traj.ever_infected;
        pos_vert_[w] = std::int64_t(inf_verts_.size());
        inf_verts_.push_back(w);
        std::int64_t moved = 0;
        for (std::int64_t u = base_.he_offset[w]; u < base_.he_offset[w + 1]; ++u) {
          if (pos_all_[u] < 0) continue;
          --x_s_;
          pos_inf_[u] = std::int64_t(free_inf_.size());
          free_inf_.push_back(u);
          ++moved;
        }
        if (moved != base_.degree[w] - 1)
          throw std::logic_error("susceptible vertex had consumed half-edges");
      } else if (mate_status == Status::infective) {
        ev = EventKind::infective_pairing;
      } else {
        ev = EventKind::recovered_pairing;
      }
    } else {
      ev = EventKind::recovery;
      const std::int64_t v = inf_verts_[uniform_below(rng, inf_verts_.size())];
      const std::int64_t pv = pos_vert_[v];
      const std::int64_t last = inf_verts_.back();
      inf_verts_[pv] = last;
      pos_vert_[last] = pv;
      inf_verts_.pop_back();
      pos_vert_[v] = -1;
      status_[v] = Status::recovered;
      --i;
      ++r;
      for (std::int64_t u = base_.he_offset[v]; u < base_.he_offset[v + 1]; ++u) {
        if (pos_all_[u] < 0) continue;
        const std::int64_t pi = pos_inf_[u];
        const std::int64_t tail = free_inf_.back();
        free_inf_[pi] = tail;
        pos_inf_[tail] = pi;
        free_inf_.pop_back();
        pos_inf_[u] = -1;
        ++x_r_;
      }
    }

    if (s + i + r != n) throw std::logic_error("compartment counts drifted");
    if (x_s_ + std::int64_t(free_inf_.size()) + x_r_ !=
        std::int64_t(free_all_.size()))
      throw std::logic_error("half-edge pools drifted");

    ++events_done;
    if (recording) {
      traj.time.push_back(clock);
      traj.kind.push_back(ev);
      traj.s.push_back(s);
      traj.i.push_back(i);
      traj.r.push_back(r);
      traj.x_s.push_back(x_s_);
      traj.x_i.push_back(std::int64_t(free_inf_.size()));
      traj.x_r.push_back(x_r_);
      if (opts.clock == ClockKind::transformed && opts.track_original_time)
        traj.original_time.push_back(t_orig);
    }
    if (opts.stop_below_fraction > 0 &&
        double(s) < opts.stop_below_fraction * double(n)) {
      traj.stop = StopReason::threshold;
      break;
    }
  }

  traj.end_time = clock;
  traj.final_susceptible = s;
  traj.final_infective = i;
  traj.final_recovered = r;
  return traj;
}

Trajectory run_timed_sir(const HalfEdgeSystem& base, double beta, double rho,
                         Rng& rng, const TimedOptions& opts) {
  if (beta <= 0) throw std::invalid_argument("contact rate must be positive");
  if (rho < 0) throw std::invalid_argument("recovery rate must be nonnegative");
  const std::int64_t n = base.n;
  const std::int64_t total = base.total_half_edges();

  std::vector<Status> status = base.status;
  std::vector<std::int64_t> partner;
  const bool base_paired = !base.partner.empty() && base.partner[0] >= 0;
  if (opts.pregenerated) {
    if (base_paired)
      partner = base.partner;
    else
      pair_half_edges(partner, total, rng);
  }

  std::vector<std::int64_t> free_all(total), pos_all(total);
  for (std::int64_t h = 0; h < total; ++h) {
    free_all[h] = h;
    pos_all[h] = h;
  }
  std::vector<char> red(total, 0);
  std::int64_t red_count = 0;
  std::int64_t x_s = 0, x_i = 0, x_r = 0;
  std::int64_t s = 0, i = 0, r = 0;
  for (std::int64_t v = 0; v < n; ++v) {
    const std::int64_t deg = base.degree[v];
    switch (status[v]) {
      case Status::susceptible: ++s; x_s += deg; break;
      case Status::infective: ++i; x_i += deg; break;
      case Status::recovered: ++r; x_r += deg; break;
    }
  }

  auto consume = [&](std::int64_t he) {
    const std::int64_t pa = pos_all[he];
    if (pa < 0) throw std::logic_error("half-edge consumed twice");
    const std::int64_t last = free_all.back();
    free_all[pa] = last;
    pos_all[last] = pa;
    free_all.pop_back();
    pos_all[he] = -1;
    switch (status[base.owner[he]]) {
      case Status::susceptible: --x_s; break;
      case Status::infective: --x_i; break;
      case Status::recovered: --x_r; break;
    }
    if (red[he]) {
      red[he] = 0;
      --red_count;
    }
  };

  enum : int { kFire = 0, kRecover = 1 };
  struct Alarm {
    double t;
    int type;
    std::int64_t id;
    std::uint64_t seq;
    bool operator>(const Alarm& o) const {
      return std::tie(t, seq) > std::tie(o.t, o.seq);
    }
  };
  std::priority_queue<Alarm, std::vector<Alarm>, std::greater<Alarm>> alarms;
  std::uint64_t seq = 0;

  auto schedule = [&](std::int64_t v, double now) {
    const double t_rec =
        rho > 0 ? now + exponential(rng, rho) : std::numeric_limits<double>::infinity();
    if (std::isfinite(t_rec)) alarms.push({t_rec, kRecover, v, seq++});
    for (std::int64_t u = base.he_offset[v]; u < base.he_offset[v + 1]; ++u) {
      if (pos_all[u] < 0) continue;
      const double t_fire = now + exponential(rng, beta);
      if (t_fire < t_rec) {
        red[u] = 1;
        ++red_count;
        alarms.push({t_fire, kFire, u, seq++});
      }
    }
  };
  for (std::int64_t v = 0; v < n; ++v)
    if (status[v] == Status::infective) schedule(v, 0.0);

  Trajectory traj;
  traj.clock = ClockKind::original;
  traj.n = n;
  traj.s0 = s;
  traj.i0 = i;
  traj.r0 = r;
  traj.x_s0 = x_s;
  traj.x_i0 = x_i;
  traj.x_r0 = x_r;
  traj.z0 = red_count;
  traj.ever_infected = i;

  double clock = 0;
  while (!alarms.empty()) {
    const Alarm a = alarms.top();
    alarms.pop();
    if (a.t > opts.horizon) {
      clock = opts.horizon;
      traj.stop = StopReason::horizon;
      break;
    }
    EventKind ev;
    if (a.type == kFire) {
      const std::int64_t h = a.id;
      if (pos_all[h] < 0) continue;  // consumed as a mate after scheduling
      if (status[base.owner[h]] != Status::infective)
        throw std::logic_error("red half-edge outlived its owner");
      std::int64_t mate;
      if (opts.pregenerated) {
        mate = partner[h];
        if (pos_all[mate] < 0)
          throw std::logic_error("revealed matching lost its pair");
      } else {
        std::uint64_t j = uniform_below(rng, std::uint64_t(free_all.size() - 1));
        if (std::int64_t(j) >= pos_all[h]) ++j;
        mate = free_all[j];
      }
      const std::int64_t w = base.owner[mate];
      const Status mate_status = status[w];
      consume(h);
      consume(mate);
      if (mate_status == Status::susceptible) {
        ev = EventKind::infection;
        status[w] = Status::infective;
        --s;
        ++i;
        ++traj.ever_infected;
        for (std::int64_t u = base.he_offset[w]; u < base.he_offset[w + 1]; ++u) {
          if (pos_all[u] < 0) continue;
          --x_s;
          ++x_i;
        }
        schedule(w, a.t);
      } else if (mate_status == Status::infective) {
        ev = EventKind::infective_pairing;
      } else {
        ev = EventKind::recovered_pairing;
      }
    } else {
      const std::int64_t v = a.id;
      if (status[v] != Status::infective)
        throw std::logic_error("second recovery of one vertex");
      ev = EventKind::recovery;
      status[v] = Status::recovered;
      --i;
      ++r;
      for (std::int64_t u = base.he_offset[v]; u < base.he_offset[v + 1]; ++u) {
        if (pos_all[u] < 0) continue;
        if (red[u]) throw std::logic_error("red half-edge survived to recovery");
        --x_i;
        ++x_r;
      }
    }

    clock = a.t;
    if (s + i + r != n) throw std::logic_error("compartment counts drifted");
    if (x_s + x_i + x_r != std::int64_t(free_all.size()))
      throw std::logic_error("half-edge pools drifted");

    traj.time.push_back(clock);
    traj.kind.push_back(ev);
    traj.s.push_back(s);
    traj.i.push_back(i);
    traj.r.push_back(r);
    traj.x_s.push_back(x_s);
    traj.x_i.push_back(x_i);
    traj.x_r.push_back(x_r);
    traj.z.push_back(red_count);
  }

  traj.end_time = clock;
  traj.final_susceptible = s;
  traj.final_infective = i;
  traj.final_recovered = r;
  return traj;
}

}  // namespace episir
