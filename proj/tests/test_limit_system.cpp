#include "doctest.h"

#include <cmath>
#include <sstream>

#include "episir/degree_profile.hpp"
#include "episir/limit_system.hpp"
#include "episir/rng.hpp"

using namespace episir;
using limit::Regime;
using limit::ThetaStatus;

static AsymptoticParams reg3(double rho) {
  return params_from_distribution(DegreeDistribution::regular(3), 1.0, 0.0, 0.0, 1.0,
                                  rho);
}

static AsymptoticParams two_regular_seeded() {
  // 90% susceptible, 10% infective, everyone degree 2, rho = beta = 1
  auto prof = build_profile(10000, DegreeDistribution::regular(2), 0.9, 0.1, 0.0);
  return extract_params(prof, 1.0, 1.0);
}

TEST_CASE("endpoint equation has the hand-computed roots") {
  // 3-regular, rho / beta = 1/2: the deficit factors as -3(x - 1)(x - 1/2).
  auto par = reg3(0.5);
  auto th = limit::solve_theta_inf(par);
  REQUIRE(th.status == ThetaStatus::interior);
  CHECK(std::abs(th.value - 0.5) <= 1e-12);
  CHECK(std::abs(limit::edge_deficit(par, th.value)) <= 1e-12);
  CHECK(limit::susceptible_fraction(par, th.value) == doctest::Approx(0.125).epsilon(1e-12));

  // half degree-1, half degree-3, no recovery: -1.5(x - 1)(x - 1/3).
  auto mix = params_from_distribution(
      DegreeDistribution::table({{1, 0.5}, {3, 0.5}}), 1.0, 0.0, 0.0, 1.0, 0.0);
  auto thm = limit::solve_theta_inf(mix);
  REQUIRE(thm.status == ThetaStatus::interior);
  CHECK(std::abs(thm.value - 1.0 / 3) <= 1e-12);

  // seeded 2-regular: deficit 2.2 theta - 2, root 10/11.
  auto seeded = two_regular_seeded();
  auto ths = limit::solve_theta_inf(seeded);
  REQUIRE(ths.status == ThetaStatus::interior);
  CHECK(std::abs(ths.value - 10.0 / 11) <= 1e-10);
}

TEST_CASE("subcritical and degenerate endpoints are flagged") {
  auto sub = params_from_distribution(DegreeDistribution::regular(2), 1.0, 0.0, 0.0,
                                      1.0, 1.0);
  auto th = limit::solve_theta_inf(sub);
  CHECK(th.status == ThetaStatus::subcritical);
  CHECK(th.value == 1.0);

  // 3-regular with rho = beta sits exactly at criticality.
  auto crit = reg3(1.0);
  CHECK(limit::basic_reproduction_number(crit) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(limit::solve_theta_inf(crit).status == ThetaStatus::subcritical);

  // 4-regular, no recovery, no recovered vertices: nothing stops the spread.
  auto degen = params_from_distribution(DegreeDistribution::regular(4), 1.0, 0.0, 0.0,
                                        1.0, 0.0);
  auto thd = limit::solve_theta_inf(degen);
  CHECK(thd.status == ThetaStatus::degenerate);
  CHECK(thd.value == 0.0);
}

TEST_CASE("reproduction number closed forms") {
  CHECK(limit::basic_reproduction_number(reg3(0.5)) ==
        doctest::Approx(4.0 / 3).epsilon(1e-14));
  auto mix = params_from_distribution(
      DegreeDistribution::table({{1, 0.5}, {3, 0.5}}), 1.0, 0.0, 0.0, 1.0, 0.0);
  CHECK(limit::basic_reproduction_number(mix) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(limit::basic_reproduction_number(two_regular_seeded()) ==
        doctest::Approx(0.45).epsilon(1e-14));

  // Poisson(lambda): sum k(k-1) p_k = lambda^2, so r0 = lambda beta/(beta+rho).
  auto poi = params_from_distribution(DegreeDistribution::poisson(2.0), 1.0, 0.0, 0.0,
                                      1.0, 1.0);
  CHECK(limit::basic_reproduction_number(poi) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("susceptible fraction inverts across its range") {
  Rng rng(555);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::pair<int, double>> w;
    int buckets = 1 + int(uniform_below(rng, 4));
    for (int b = 0; b < buckets; ++b)
      w.emplace_back(1 + int(uniform_below(rng, 6)), 0.1 + uniform01(rng));
    auto par = params_from_distribution(DegreeDistribution::table(w), 0.8, 0.0, 0.2,
                                        1.0, 0.5);
    for (double theta : {0.05, 0.3, 0.7, 0.99}) {
      double s = limit::susceptible_fraction(par, theta);
      CHECK(std::abs(limit::susceptible_fraction_inverse(par, s) - theta) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(limit::susceptible_fraction_inverse(reg3(0.5), 1.5),
                  std::domain_error);
  CHECK_THROWS_AS(limit::susceptible_fraction_inverse(reg3(0.5), -0.1),
                  std::domain_error);
}

TEST_CASE("half-edge identities") {
  Rng rng(808);
  auto par = reg3(0.5);
  CHECK(limit::half_edges(par, 1.0).h_i == doctest::Approx(par.mu_i).epsilon(1e-14));
  auto seeded = two_regular_seeded();
  CHECK(limit::half_edges(seeded, 1.0).h_i ==
        doctest::Approx(seeded.mu_i).epsilon(1e-12));
  for (int i = 0; i < 20; ++i) {
    double th = uniform01(rng);
    auto he = limit::half_edges(seeded, th);
    CHECK(he.h_x == doctest::Approx(seeded.mu * th * th).epsilon(1e-14));
    CHECK(he.h_s + he.h_i + he.h_r == doctest::Approx(he.h_x).epsilon(1e-12));
  }
  auto thi = limit::solve_theta_inf(par);
  CHECK(std::abs(limit::half_edges(par, thi.value).h_i) <= 1e-12);
}

TEST_CASE("default outbreak threshold") {
  CHECK(limit::default_s0(reg3(0.5)) == doctest::Approx(0.5625).epsilon(1e-12));
  auto sub = params_from_distribution(DegreeDistribution::regular(2), 1.0, 0.0, 0.0,
                                      1.0, 1.0);
  CHECK(limit::default_s0(sub) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("bulk limit reproduces the seeded 2-regular example") {
  auto par = two_regular_seeded();
  auto sol = limit::solve_limit(par, Regime::bulk);

  CHECK(sol.theta[0] == 1.0);
  CHECK(sol.v_i[0] == doctest::Approx(par.alpha_i).epsilon(1e-12));
  CHECK(sol.v_r[0] == doctest::Approx(0.0).epsilon(1e-12));

  // theta'(0) = -beta p_i(1) = -mu_i / mu = -0.1 here.
  double slope = (sol.theta[1] - sol.theta[0]) / (sol.t[1] - sol.t[0]);
  CHECK(slope == doctest::Approx(-0.1).epsilon(2e-2));

  CHECK(sol.cross_check_error <= 1e-6);
  CHECK(std::abs(sol.theta.back() - 10.0 / 11) <= 1e-6);
  CHECK(sol.tau_star == doctest::Approx(std::log(1.1)).epsilon(1e-10));

  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    CHECK(sol.v_s[i] + sol.v_i[i] + sol.v_r[i] == doctest::Approx(1.0).epsilon(1e-12));
    if (i > 0) {
      CHECK(sol.theta[i] < sol.theta[i - 1]);
      CHECK(sol.v_r[i] >= sol.v_r[i - 1]);
    }
  }
  // everything transmissible has burnt out by the end of the mesh
  CHECK(sol.v_i.back() <= 1e-3);
  CHECK(sol.v_r.back() ==
        doctest::Approx(1.0 - limit::susceptible_fraction(par, 10.0 / 11))
            .epsilon(1e-3));
}

TEST_CASE("shifted limit starts on the orbit through s0") {
  auto par = reg3(0.5);
  auto sol = limit::solve_limit(par, Regime::shifted);

  CHECK(sol.s0 == doctest::Approx(0.5625).epsilon(1e-12));
  CHECK(sol.v_s[0] == doctest::Approx(sol.s0).epsilon(1e-12));
  CHECK(sol.theta[0] == doctest::Approx(std::cbrt(0.5625)).epsilon(1e-12));
  CHECK(sol.v_i[0] > 0.0);
  CHECK(sol.cross_check_error <= 1e-6);
  CHECK(std::abs(sol.theta.back() - 0.5) <= 1e-6);

  for (std::size_t i = 0; i < sol.t.size(); ++i)
    CHECK(sol.v_s[i] + sol.v_i[i] + sol.v_r[i] == doctest::Approx(1.0).epsilon(1e-12));

  // clock map and its inverse agree
  for (double tt : {0.0, 0.3, 1.0, 2.5}) {
    if (tt > sol.t.back()) continue;
    CHECK(sol.time_at(sol.tau_at(tt)) == doctest::Approx(tt).epsilon(1e-9));
  }
  // with no recovery the orbit start carries exactly the missing susceptibles
  auto nr = params_from_distribution(DegreeDistribution::table({{1, 0.5}, {3, 0.5}}),
                                     1.0, 0.0, 0.0, 1.0, 0.0);
  auto sol0 = limit::solve_limit(nr, Regime::shifted);
  CHECK(sol0.v_i[0] == doctest::Approx(1.0 - sol0.s0).epsilon(1e-9));
}

TEST_CASE("regime preconditions are enforced") {
  CHECK_THROWS_AS(limit::solve_limit(reg3(0.5), Regime::bulk), std::invalid_argument);
  CHECK_THROWS_AS(limit::solve_limit(two_regular_seeded(), Regime::shifted),
                  std::invalid_argument);
  auto sub = params_from_distribution(DegreeDistribution::regular(2), 1.0, 0.0, 0.0,
                                      1.0, 1.0);
  CHECK_THROWS_AS(limit::solve_limit(sub, Regime::shifted), std::invalid_argument);
  limit::LimitOptions bad;
  bad.s0 = 0.99;  // above the seed-free start value... only just: vS(1) = 1
  CHECK_NOTHROW(limit::solve_limit(reg3(0.5), Regime::shifted, bad));
  bad.s0 = 1.01;
  CHECK_THROWS_AS(limit::solve_limit(reg3(0.5), Regime::shifted, bad),
                  std::domain_error);
  bad.s0 = 0.1;  // below the endpoint value 1/8
  CHECK_THROWS_AS(limit::solve_limit(reg3(0.5), Regime::shifted, bad),
                  std::domain_error);
}

TEST_CASE("reduced equation residual is small along the solved orbit") {
  auto par = reg3(0.5);
  auto sol = limit::solve_limit(par, Regime::shifted);

  std::vector<double> tg, th;
  for (double tt = 0; tt <= std::min(5.0, sol.t.back()); tt += 1e-3) {
    tg.push_back(tt);
    th.push_back(sol.theta_at(tt));
  }
  auto res = limit::volz_residual(par, tg, th);
  double worst = 0;
  for (double r : res) worst = std::max(worst, r);
  CHECK(worst <= 1e-4);

  // a series parked at the endpoint solves the equation identically
  std::vector<double> tc, thc;
  auto thi = limit::solve_theta_inf(par);
  for (int i = 0; i < 100; ++i) {
    tc.push_back(0.01 * i);
    thc.push_back(thi.value);
  }
  auto flat = limit::volz_residual(par, tc, thc);
  for (double r : flat) CHECK(r <= 1e-12);
}

TEST_CASE("horizon truncation and csv output") {
  auto par = two_regular_seeded();
  limit::LimitOptions opt;
  opt.horizon = 2.0;
  auto sol = limit::solve_limit(par, Regime::bulk, opt);
  CHECK(sol.t.back() >= 2.0);
  CHECK(sol.t[sol.t.size() - 2] < 2.0);

  std::ostringstream os;
  limit::write_limit_csv(sol, os);
  auto text = os.str();
  CHECK(text.rfind("t,theta,vS,i,r,hS,hI,hR,hX,pI,pS\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == long(sol.t.size()) + 1);

  auto js = limit::limit_summary(sol);
  CHECK(js["regime"] == "bulk");
  CHECK(js["theta_inf"]["status"] == "interior");
  CHECK(std::abs(js["r0"].get<double>() - 0.45) <= 1e-12);
}

TEST_CASE("state interpolation tracks the tables") {
  auto par = reg3(0.5);
  auto sol = limit::solve_limit(par, Regime::shifted);
  for (std::size_t i : {std::size_t(10), std::size_t(500), sol.t.size() - 2}) {
    auto st = sol.state_at(sol.t[i]);
    CHECK(st.theta == doctest::Approx(sol.theta[i]).epsilon(1e-9));
    CHECK(st.v_i == doctest::Approx(sol.v_i[i]).epsilon(1e-9));
  }
  // past the mesh the infective fraction decays at the recovery rate
  auto tail = sol.state_at(sol.t.back() + 3.0);
  CHECK(tail.v_i == doctest::Approx(sol.v_i.back() * std::exp(-0.5 * 3.0)).epsilon(1e-9));
  CHECK(tail.theta == doctest::Approx(sol.theta.back()).epsilon(1e-12));
}
