#pragma once

#include <iosfwd>
#include <limits>
#include <vector>

#include "episir/degree_profile.hpp"
#include "json.hpp"

namespace episir::limit {

// Scalar functionals of the surviving-degree variable theta in [0, 1].
// theta is the probability that a given half-edge of an initially
// susceptible vertex has not yet carried an infectious contact.
double susceptible_fraction(const AsymptoticParams& params, double theta);

struct HalfEdgeState {
  double h_s = 0, h_i = 0, h_r = 0, h_x = 0;
  double p_i() const { return h_x > 0 ? h_i / h_x : 0.0; }
  double p_s() const { return h_x > 0 ? h_s / h_x : 0.0; }
};
HalfEdgeState half_edges(const AsymptoticParams& params, double theta);

double basic_reproduction_number(const AsymptoticParams& params);

// h_i(theta) / theta: concave, equal to mu_i at theta = 1.  Its largest root
// in (0, 1) is the endpoint theta_inf of the epidemic.
double edge_deficit(const AsymptoticParams& params, double theta);

enum class ThetaStatus {
  interior,     // root in (0, 1)
  subcritical,  // seed-free with r0 <= 1: theta stays at 1
  degenerate,   // no terminating mechanism: theta drains to 0
};

struct ThetaResult {
  ThetaStatus status = ThetaStatus::subcritical;
  double value = 1;
};

ThetaResult solve_theta_inf(const AsymptoticParams& params);

// Inverse of theta -> susceptible_fraction on [0, 1].
double susceptible_fraction_inverse(const AsymptoticParams& params, double s);

// Reference susceptible level separating outbreak from fade-out runs:
// halfway between the seed-free start and the large-outbreak endpoint, or
// half the initial susceptible fraction when no outbreak is possible.
double default_s0(const AsymptoticParams& params);

// bulk: macroscopically seeded start (mu_i > 0), theta(0) = 1.
// shifted: seed-free limit re-centred at the time the susceptible fraction
// first hits s0 (mu_i = 0, supercritical only).
enum class Regime { bulk, shifted };

struct LimitOptions {
  int tau_nodes = 2001;        // main mesh resolution
  int prefix_nodes = 401;      // shifted regime: mesh for the pre-history
  double end_fraction = 1e-9;  // relative gap kept to the singular endpoint
  double s0 = std::numeric_limits<double>::quiet_NaN();  // NaN: default_s0
  double horizon = std::numeric_limits<double>::infinity();
  double theta_floor = 1e-9;   // endpoint cap when theta drains to 0
  int cross_check_points = 200;
};

// Deterministic trajectory tables, parameterised by the log-scale variable
// tau = -log theta.  The clock map t(tau) is accumulated by Gauss quadrature
// of 1 / (beta p_i) over a mesh graded towards the singular endpoint, and a
// Dormand-Prince integration of d theta / dt = -beta theta p_i(theta) is run
// independently; their largest disagreement is reported.
struct LimitSolution {
  Regime regime = Regime::bulk;
  AsymptoticParams params;
  ThetaResult theta_inf;
  double r0 = 0;
  double s0 = std::numeric_limits<double>::quiet_NaN();  // shifted only
  double tau0 = 0;
  double tau_star = 0;  // -log theta_inf; infinity when degenerate
  double cross_check_error = 0;

  // Aligned node tables; t[0] = 0.
  std::vector<double> t, tau, theta, v_s, v_i, v_r, h_s, h_i, h_r, h_x, p_i;

  double time_at(double tau_value) const;
  double tau_at(double t_value) const;
  double theta_at(double t_value) const;

  struct State {
    double theta = 1, v_s = 0, v_i = 0, v_r = 0;
  };
  State state_at(double t_value) const;  // exponential infective tail past the mesh
};

LimitSolution solve_limit(const AsymptoticParams& params, Regime regime,
                          LimitOptions options = {});

// |d theta / dt + beta theta p_i(theta)| at the interior grid points, with a
// three-point derivative that accepts uneven spacing.  Size t.size() - 2.
std::vector<double> volz_residual(const AsymptoticParams& params,
                                  const std::vector<double>& t,
                                  const std::vector<double>& theta);

void write_limit_csv(const LimitSolution& sol, std::ostream& out);
nlohmann::json limit_summary(const LimitSolution& sol);

}  // namespace episir::limit
