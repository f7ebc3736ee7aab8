#include "episir/limit_system.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace episir::limit {

namespace {

// 4-point Gauss-Legendre rule on [-1, 1].
constexpr double kGaussNode[2] = {0.3399810435848563, 0.8611363115940526};
constexpr double kGaussWeight[2] = {0.6521451548625461, 0.3478548451374538};

template <class F>
double gauss_cell(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0;
  for (int j = 0; j < 2; ++j) {
    acc += kGaussWeight[j] *
           (f(mid - half * kGaussNode[j]) + f(mid + half * kGaussNode[j]));
  }
  return acc * half;
}

double clock_density(const AsymptoticParams& par, double sigma) {
  const double pi = half_edges(par, std::exp(-sigma)).p_i();
  if (pi <= 0)
    throw std::runtime_error("time change density evaluated where h_i <= 0");
  return 1.0 / (par.beta * pi);
}

// h_s(e^{-sigma}): the rate at which the susceptible fraction drains per
// unit of tau.
double hs_at_tau(const AsymptoticParams& par, double sigma) {
  return half_edges(par, std::exp(-sigma)).h_s;
}

// Mesh on [a, b] whose cells shrink geometrically towards b, stopping a
// relative distance end_fraction short of it.
std::vector<double> graded_mesh(double a, double b, int nodes, double end_fraction) {
  std::vector<double> mesh(nodes);
  const double span = b - a;
  for (int i = 0; i < nodes; ++i)
    mesh[i] = b - span * std::pow(end_fraction, double(i) / (nodes - 1));
  mesh.front() = a;
  return mesh;
}

std::vector<double> uniform_mesh(double a, double b, int nodes) {
  std::vector<double> mesh(nodes);
  for (int i = 0; i < nodes; ++i) mesh[i] = a + (b - a) * double(i) / (nodes - 1);
  return mesh;
}

// Dormand-Prince 5(4) for the scalar equation theta' = -beta theta p_i.
double theta_ode_check(const AsymptoticParams& par, double theta0,
                       const std::vector<double>& times,
                       const std::vector<std::size_t>& idx,
                       const std::vector<double>& reference) {
  auto deriv = [&par](double th) {
    return -par.beta * th * half_edges(par, th).p_i();
  };
  double worst = 0;
  double t = times[idx.front()], y = theta0, h = 1e-4 / par.beta;
  std::size_t at = 0;
  if (times[idx[0]] == 0.0) {
    worst = std::abs(y - reference[idx[0]]);
    ++at;
  }
  const double atol = 1e-13, rtol = 1e-10;
  long steps = 0;
  while (at < idx.size()) {
    const double target = times[idx[at]];
    if (t >= target) {
      worst = std::max(worst, std::abs(y - reference[idx[at]]));
      ++at;
      continue;
    }
    h = std::min(h, target - t);
    const double k1 = deriv(y);
    const double k2 = deriv(y + h * (k1 / 5));
    const double k3 = deriv(y + h * (3 * k1 + 9 * k2) / 40);
    const double k4 = deriv(y + h * (44 * k1 / 45 - 56 * k2 / 15 + 32 * k3 / 9));
    const double k5 = deriv(y + h * (19372 * k1 / 6561 - 25360 * k2 / 2187 +
                                     64448 * k3 / 6561 - 212 * k4 / 729));
    const double k6 = deriv(y + h * (9017 * k1 / 3168 - 355 * k2 / 33 +
                                     46732 * k3 / 5247 + 49 * k4 / 176 -
                                     5103 * k5 / 18656));
    const double y5 = y + h * (35 * k1 / 384 + 500 * k3 / 1113 + 125 * k4 / 192 -
                               2187 * k5 / 6784 + 11 * k6 / 84);
    const double k7 = deriv(y5);
    const double y4 = y + h * (5179 * k1 / 57600 + 7571 * k3 / 16695 +
                               393 * k4 / 640 - 92097 * k5 / 339200 +
                               187 * k6 / 2100 + k7 / 40);
    const double scale = atol + rtol * std::max(std::abs(y), std::abs(y5));
    const double err = std::abs(y5 - y4) / scale;
    if (err <= 1.0) {
      t += h;
      y = y5;
    }
    h *= std::clamp(0.9 * std::pow(err > 0 ? err : 1e-10, -0.2), 0.2, 5.0);
    if (++steps > 20000000)
      throw std::runtime_error("cross-check integration stalled");
  }
  return worst;
}

}  // namespace

double susceptible_fraction(const AsymptoticParams& params, double theta) {
  double acc = 0;
  for (auto& [k, pk] : params.p) acc += pk * std::pow(theta, k);
  return params.alpha_s * acc;
}

HalfEdgeState half_edges(const AsymptoticParams& params, double theta) {
  HalfEdgeState st;
  double ks = 0;
  for (auto& [k, pk] : params.p) ks += k * pk * std::pow(theta, k);
  st.h_s = params.alpha_s * ks;
  st.h_x = params.mu * theta * theta;
  st.h_r = params.mu_r * theta +
           (params.rho > 0 ? params.mu * params.rho / params.beta * theta * (1 - theta)
                           : 0.0);
  st.h_i = st.h_x - st.h_s - st.h_r;
  return st;
}

double basic_reproduction_number(const AsymptoticParams& params) {
  double branch = 0;
  for (auto& [k, pk] : params.p) branch += double(k) * (k - 1) * pk;
  return params.beta / (params.beta + params.rho) * params.alpha_s / params.mu * branch;
}

double edge_deficit(const AsymptoticParams& params, double theta) {
  double ks = 0;
  for (auto& [k, pk] : params.p)
    ks += k * pk * (k >= 1 ? std::pow(theta, k - 1) : 0.0);
  return params.mu * theta - params.alpha_s * ks - params.mu_r -
         params.mu * params.rho / params.beta * (1 - theta);
}

ThetaResult solve_theta_inf(const AsymptoticParams& params) {
  params.validate();
  auto h = [&params](double th) { return edge_deficit(params, th); };

  double hi = std::numeric_limits<double>::quiet_NaN();
  if (params.mu_i > 0) {
    hi = 1.0;  // h(1) = mu_i > 0
  } else {
    if (basic_reproduction_number(params) <= 1.0) return {ThetaStatus::subcritical, 1.0};
    // theta = 1 is itself a root; probe just inside for the positive side.
    for (double gap : {1e-3, 1e-6, 1e-9, 1e-12}) {
      if (h(1.0 - gap) > 0) {
        hi = 1.0 - gap;
        break;
      }
    }
    if (std::isnan(hi)) return {ThetaStatus::subcritical, 1.0};
  }

  double lo = hi;
  bool bracketed = false;
  for (int j = 0; j < 80; ++j) {
    lo *= 0.5;
    if (h(lo) < 0) {
      bracketed = true;
      break;
    }
  }
  if (!bracketed) return {ThetaStatus::degenerate, 0.0};

  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < 0 ? lo : hi) = mid;
  }
  return {ThetaStatus::interior, 0.5 * (lo + hi)};
}

double susceptible_fraction_inverse(const AsymptoticParams& params, double s) {
  const double s_min = susceptible_fraction(params, 0.0);
  const double s_max = susceptible_fraction(params, 1.0);
  if (s < s_min - 1e-12 || s > s_max + 1e-12)
    throw std::domain_error("susceptible fraction outside the reachable range");
  double lo = 0, hi = 1;
  for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
    const double mid = 0.5 * (lo + hi);
    (susceptible_fraction(params, mid) < s ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double default_s0(const AsymptoticParams& params) {
  const auto th = solve_theta_inf(params);
  if (th.status == ThetaStatus::subcritical)
    return 0.5 * susceptible_fraction(params, 1.0);
  return 0.5 * (susceptible_fraction(params, th.value) +
                susceptible_fraction(params, 1.0));
}

LimitSolution solve_limit(const AsymptoticParams& params, Regime regime,
                          LimitOptions options) {
  params.validate();
  if (options.tau_nodes < 16 || options.prefix_nodes < 16)
    throw std::invalid_argument("mesh needs at least 16 nodes");

  LimitSolution sol;
  sol.regime = regime;
  sol.params = params;
  sol.theta_inf = solve_theta_inf(params);
  sol.r0 = basic_reproduction_number(params);

  double theta0 = 1;
  double v_i0 = 0;
  if (regime == Regime::bulk) {
    if (params.mu_i <= 0)
      throw std::invalid_argument(
          "bulk regime needs a macroscopic seed (mu_i > 0); use the shifted regime");
    theta0 = 1.0;
    v_i0 = params.alpha_i;
  } else {
    if (params.mu_i > 0)
      throw std::invalid_argument(
          "shifted regime describes seed-free parameter sets (mu_i = 0)");
    if (sol.theta_inf.status != ThetaStatus::interior)
      throw std::invalid_argument("shifted regime needs a supercritical epidemic");
    sol.s0 = std::isnan(options.s0) ? default_s0(params) : options.s0;
    const double lo = susceptible_fraction(params, sol.theta_inf.value);
    const double hi = susceptible_fraction(params, 1.0);
    if (!(sol.s0 > lo && sol.s0 < hi))
      throw std::domain_error("s0 must lie strictly between the endpoint and the start");
    theta0 = susceptible_fraction_inverse(params, sol.s0);
  }
  sol.tau0 = -std::log(theta0);

  const bool interior = sol.theta_inf.status == ThetaStatus::interior;
  sol.tau_star = interior ? -std::log(sol.theta_inf.value)
                          : std::numeric_limits<double>::infinity();

  if (regime == Regime::bulk && sol.theta_inf.status == ThetaStatus::subcritical)
    throw std::logic_error("a seeded start always admits an endpoint");

  sol.tau = interior
                ? graded_mesh(sol.tau0, sol.tau_star, options.tau_nodes,
                              options.end_fraction)
                : uniform_mesh(sol.tau0, -std::log(options.theta_floor),
                               options.tau_nodes);

  const int m = int(sol.tau.size());
  sol.t.resize(m);
  sol.theta.resize(m);
  sol.v_s.resize(m);
  sol.v_i.resize(m);
  sol.v_r.resize(m);
  sol.h_s.resize(m);
  sol.h_i.resize(m);
  sol.h_r.resize(m);
  sol.h_x.resize(m);
  sol.p_i.resize(m);

  for (int i = 0; i < m; ++i) {
    const double th = std::exp(-sol.tau[i]);
    const auto he = half_edges(params, th);
    sol.theta[i] = th;
    sol.v_s[i] = susceptible_fraction(params, th);
    sol.h_s[i] = he.h_s;
    sol.h_i[i] = he.h_i;
    sol.h_r[i] = he.h_r;
    sol.h_x[i] = he.h_x;
    sol.p_i[i] = he.p_i();
  }

  auto density = [&params](double s) { return clock_density(params, s); };
  sol.t[0] = 0;
  for (int i = 0; i + 1 < m; ++i)
    sol.t[i + 1] = sol.t[i] + gauss_cell(density, sol.tau[i], sol.tau[i + 1]);

  // Infective fraction at the start of the table.  The shifted regime owes
  // its start to the orbit leaving theta = 1 in the infinite past:
  //   v_i(tau) = int_0^tau exp(-rho (t(tau) - t(sigma))) h_s(sigma) dsigma.
  if (regime == Regime::shifted) {
    auto mesh = graded_mesh(sol.tau0, 0.0, options.prefix_nodes, 1e-10);
    std::reverse(mesh.begin(), mesh.end());  // ascending, clustered at 0
    const int pn = int(mesh.size());
    std::vector<double> tp(pn);  // time before the table origin (negative)
    tp[pn - 1] = 0;
    for (int j = pn - 1; j > 0; --j)
      tp[j - 1] = tp[j] - gauss_cell(density, mesh[j - 1], mesh[j]);
    double acc = 0;
    for (int j = 0; j + 1 < pn; ++j) {
      auto weighted = [&](double s) {
        const double ts = tp[j] + gauss_cell(density, mesh[j], s);
        return std::exp(params.rho * ts) * hs_at_tau(params, s);
      };
      acc += gauss_cell(weighted, mesh[j], mesh[j + 1]);
    }
    v_i0 = acc;
  }

  sol.v_i[0] = v_i0;
  sol.v_r[0] = 1.0 - sol.v_s[0] - sol.v_i[0];
  for (int i = 0; i + 1 < m; ++i) {
    const double dt = sol.t[i + 1] - sol.t[i];
    auto weighted = [&](double s) {
      const double ts = sol.t[i] + gauss_cell(density, sol.tau[i], s);
      return std::exp(-params.rho * (sol.t[i + 1] - ts)) * hs_at_tau(params, s);
    };
    sol.v_i[i + 1] = std::exp(-params.rho * dt) * sol.v_i[i] +
                     gauss_cell(weighted, sol.tau[i], sol.tau[i + 1]);
    sol.v_r[i + 1] = 1.0 - sol.v_s[i + 1] - sol.v_i[i + 1];
  }

  if (std::isfinite(options.horizon)) {
    int keep = m;
    for (int i = 0; i < m; ++i) {
      if (sol.t[i] >= options.horizon) {
        keep = i + 1;
        break;
      }
    }
    auto crop = [keep](std::vector<double>& v) { v.resize(keep); };
    crop(sol.t);
    crop(sol.tau);
    crop(sol.theta);
    crop(sol.v_s);
    crop(sol.v_i);
    crop(sol.v_r);
    crop(sol.h_s);
    crop(sol.h_i);
    crop(sol.h_r);
    crop(sol.h_x);
    crop(sol.p_i);
  }

  const int kept = int(sol.t.size());
  std::vector<std::size_t> check;
  const int stride = std::max(1, kept / std::max(1, options.cross_check_points));
  for (int i = 0; i < kept; i += stride) check.push_back(i);
  if (check.back() != std::size_t(kept - 1)) check.push_back(kept - 1);
  sol.cross_check_error = theta_ode_check(params, theta0, sol.t, check, sol.theta);

  return sol;
}

double LimitSolution::time_at(double tau_value) const {
  if (tau.empty()) throw std::logic_error("empty solution");
  tau_value = std::clamp(tau_value, tau.front(), tau.back());
  const auto it = std::upper_bound(tau.begin(), tau.end(), tau_value);
  const std::size_t cell = std::min(tau.size() - 2, std::size_t(it - tau.begin()) - 1);
  auto density = [this](double s) { return clock_density(params, s); };
  return t[cell] + gauss_cell(density, tau[cell], tau_value);
}

double LimitSolution::tau_at(double t_value) const {
  if (t.empty()) throw std::logic_error("empty solution");
  if (t_value <= t.front()) return tau.front();
  if (t_value >= t.back()) return tau.back();
  const auto it = std::upper_bound(t.begin(), t.end(), t_value);
  const std::size_t cell = std::size_t(it - t.begin()) - 1;
  auto density = [this](double s) { return clock_density(params, s); };
  double lo = tau[cell], hi = tau[cell + 1];
  for (int step = 0; step < 100 && hi - lo > 1e-15 * std::max(1.0, hi); ++step) {
    const double mid = 0.5 * (lo + hi);
    const double tm = t[cell] + gauss_cell(density, tau[cell], mid);
    (tm < t_value ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double LimitSolution::theta_at(double t_value) const {
  return std::exp(-tau_at(t_value));
}

LimitSolution::State LimitSolution::state_at(double t_value) const {
  State st;
  if (t_value >= t.back()) {
    st.theta = theta.back();
    st.v_s = v_s.back();
    st.v_i = v_i.back() * std::exp(-params.rho * (t_value - t.back()));
    st.v_r = 1.0 - st.v_s - st.v_i;
    return st;
  }
  st.theta = theta_at(std::max(t_value, t.front()));
  st.v_s = susceptible_fraction(params, st.theta);
  const auto it = std::upper_bound(t.begin(), t.end(), std::max(t_value, t.front()));
  const std::size_t cell = std::min(t.size() - 2, std::size_t(it - t.begin()) - 1);
  const double w = (t_value - t[cell]) / (t[cell + 1] - t[cell]);
  st.v_i = v_i[cell] + std::clamp(w, 0.0, 1.0) * (v_i[cell + 1] - v_i[cell]);
  st.v_r = 1.0 - st.v_s - st.v_i;
  return st;
}

std::vector<double> volz_residual(const AsymptoticParams& params,
                                  const std::vector<double>& t,
                                  const std::vector<double>& theta) {
  if (t.size() != theta.size() || t.size() < 3)
    throw std::invalid_argument("need aligned series with at least three points");
  std::vector<double> res(t.size() - 2);
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    const double hl = t[i] - t[i - 1], hr = t[i + 1] - t[i];
    const double dp = (theta[i + 1] - theta[i]) / hr;
    const double dm = (theta[i] - theta[i - 1]) / hl;
    const double deriv = (hl * dp + hr * dm) / (hl + hr);
    res[i - 1] =
        std::abs(deriv + params.beta * theta[i] * half_edges(params, theta[i]).p_i());
  }
  return res;
}

void write_limit_csv(const LimitSolution& sol, std::ostream& out) {
  out << "t,theta,vS,i,r,hS,hI,hR,hX,pI,pS\n";
  char row[320];
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    std::snprintf(row, sizeof row,
                  "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  sol.t[i], sol.theta[i], sol.v_s[i], sol.v_i[i], sol.v_r[i],
                  sol.h_s[i], sol.h_i[i], sol.h_r[i], sol.h_x[i], sol.p_i[i],
                  sol.h_x[i] > 0 ? sol.h_s[i] / sol.h_x[i] : 0.0);
    out << row;
  }
}

nlohmann::json limit_summary(const LimitSolution& sol) {
  const char* status = sol.theta_inf.status == ThetaStatus::interior ? "interior"
                       : sol.theta_inf.status == ThetaStatus::subcritical
                           ? "subcritical"
                           : "degenerate";
  nlohmann::json j{
      {"regime", sol.regime == Regime::bulk ? "bulk" : "shifted"},
      {"r0", sol.r0},
      {"theta_inf", {{"status", status}, {"value", sol.theta_inf.value}}},
      {"tau_star", std::isfinite(sol.tau_star) ? nlohmann::json(sol.tau_star)
                                               : nlohmann::json()},
      {"nodes", sol.t.size()},
      {"t_end", sol.t.empty() ? 0.0 : sol.t.back()},
      {"cross_check_error", sol.cross_check_error},
      {"v_s_end", sol.v_s.empty() ? 0.0 : sol.v_s.back()},
      {"attack_rate", sol.params.alpha_s -
                          susceptible_fraction(sol.params, sol.theta_inf.value)},
  };
  if (!std::isnan(sol.s0)) j["s0"] = sol.s0;
  return j;
}

}  // namespace episir::limit
