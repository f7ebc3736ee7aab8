#include "doctest.h"

#include <cmath>
#include <numeric>

#include "episir/degree_profile.hpp"
#include "episir/limit_system.hpp"
#include "episir/outbreak.hpp"
#include "episir/rng.hpp"
#include "oracle_helpers.hpp"

using namespace episir;

// Reference transmission distribution by quadrature: condition on the
// recovery time t and integrate the binomial probability that j of the l
// contact clocks ring before t. Substituting u = exp(-rho t) gives
//   P(j) = int_0^1 C(l,j) (1 - u^b)^j u^(b(l-j)) du,   b = beta / rho.
static double pmf_by_quadrature(int l, int j, double beta, double rho) {
  const double b = beta / rho;
  const double c = oracle::binomial(l, j);
  return oracle::integrate(
      [=](double u) {
        return c * std::pow(1.0 - std::pow(u, b), j) * std::pow(u, b * (l - j));
      },
      0.0, 1.0, 1e-12);
}

TEST_CASE("transmission pmf matches the quadrature oracle") {
  for (auto [l, beta, rho] : {std::tuple<int, double, double>{2, 1.0, 1.0},
                              {1, 1.0, 1.0},
                              {3, 1.0, 0.5},
                              {5, 2.0, 3.0},
                              {12, 1.0, 0.25}}) {
    auto pmf = transmission_pmf(l, beta, rho);
    REQUIRE(int(pmf.size()) == l + 1);
    for (int j = 0; j <= l; ++j)
      CHECK(pmf[j] == doctest::Approx(pmf_by_quadrature(l, j, beta, rho)).epsilon(1e-8));
  }
}

TEST_CASE("transmission pmf closed forms") {
  auto p2 = transmission_pmf(2, 1.0, 1.0);
  CHECK(p2[0] == doctest::Approx(1.0 / 3).epsilon(1e-13));
  CHECK(p2[1] == doctest::Approx(1.0 / 3).epsilon(1e-13));
  CHECK(p2[2] == doctest::Approx(1.0 / 3).epsilon(1e-13));
  CHECK(transmission_pgf(2, 1.0, 1.0, 0.5) == doctest::Approx(7.0 / 12).epsilon(1e-13));

  auto p1 = transmission_pmf(1, 1.0, 1.0);
  CHECK(p1[0] == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(p1[1] == doctest::Approx(0.5).epsilon(1e-13));

  // rho = 0: every contact happens before recovery
  auto p3 = transmission_pmf(3, 2.0, 0.0);
  CHECK(p3[3] == 1.0);
  CHECK(transmission_pgf(3, 2.0, 0.0, 0.5) == doctest::Approx(0.125).epsilon(1e-15));

  auto p0 = transmission_pmf(0, 1.0, 1.0);
  CHECK(p0[0] == 1.0);
}

TEST_CASE("transmission pmf normalisation and mean for many l") {
  for (int l : {1, 2, 5, 20, 60, 61, 100, 200}) {
    for (double r : {0.25, 1.0, 3.0}) {
      auto pmf = transmission_pmf(l, 1.0, r);
      double sum = std::accumulate(pmf.begin(), pmf.end(), 0.0);
      double mean = 0;
      for (int j = 0; j <= l; ++j) mean += j * pmf[j];
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(mean == doctest::Approx(double(l) / (1.0 + r)).epsilon(1e-10));
    }
  }
}

TEST_CASE("large-l pmf agrees with quadrature across the log-space switch") {
  for (int l : {59, 61, 80}) {
    auto pmf = transmission_pmf(l, 1.0, 1.0);
    for (int j : {0, 1, l / 2, l}) {
      CHECK(pmf[j] == doctest::Approx(pmf_by_quadrature(l, j, 1.0, 1.0)).epsilon(1e-7));
    }
  }
}

static AsymptoticParams mix_params(double rho) {
  std::vector<std::pair<int, double>> w{{1, 0.5}, {3, 0.5}};
  return params_from_distribution(DegreeDistribution::table(w), 1.0, 0.0, 0.0, 1.0, rho);
}

TEST_CASE("offspring model for the half-and-half mix, rho = 0") {
  auto par = mix_params(0.0);
  auto model = offspring_model(par);
  REQUIRE(model.pmf.size() == 3);
  CHECK(model.pmf[0] == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(model.pmf[1] == doctest::Approx(0.0));
  CHECK(model.pmf[2] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(model.mean == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(model.mean ==
        doctest::Approx(limit::basic_reproduction_number(par)).epsilon(1e-13));
  CHECK(extinction_probability(model) == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("offspring mean equals the reproduction number for random parameters") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::pair<int, double>> w;
    int buckets = 1 + int(uniform_below(rng, 5));
    for (int b = 0; b < buckets; ++b)
      w.emplace_back(1 + int(uniform_below(rng, 8)), 0.05 + uniform01(rng));
    double ar = 0.3 * uniform01(rng);
    double beta = 0.2 + 2 * uniform01(rng);
    double rho = 2 * uniform01(rng);
    auto par = params_from_distribution(DegreeDistribution::table(w), 1.0 - ar, 0.0, ar,
                                        beta, rho);
    auto model = offspring_model(par);
    double sum = std::accumulate(model.pmf.begin(), model.pmf.end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(model.mean ==
          doctest::Approx(limit::basic_reproduction_number(par)).epsilon(1e-9));
  }
}

TEST_CASE("offspring model rejects seeded parameter sets") {
  std::map<int, std::int64_t> seeds{{3, 5}};
  auto prof = build_profile_with_seeds(100, DegreeDistribution::regular(3), seeds);
  auto par = extract_params(prof, 1.0, 0.5);
  CHECK_THROWS_AS(offspring_model(par), std::invalid_argument);
  CHECK_NOTHROW(offspring_model(extract_params_seedless(prof, 1.0, 0.5)));
}

TEST_CASE("extinction probability of a critical offspring law is one") {
  OffspringModel critical;
  critical.pmf = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  critical.mean = 1.0;
  critical.beta = 1.0;
  critical.rho = 1.0;
  CHECK(extinction_probability(critical) == 1.0);

  // subcritical: 2-regular with recovery
  auto par2 = params_from_distribution(DegreeDistribution::regular(2), 1.0, 0.0, 0.0,
                                       1.0, 1.0);
  auto model2 = offspring_model(par2);
  CHECK(model2.mean == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(extinction_probability(model2) == 1.0);
}

TEST_CASE("fixed point identity holds to 1e-12") {
  auto par = mix_params(0.25);  // rho/beta = 1/2 would sit exactly at r0 = 1
  auto model = offspring_model(par);
  double q = extinction_probability(model);
  CHECK(std::abs(model.pgf(q) - q) <= 1e-12);
  CHECK(q < 1.0);
}

TEST_CASE("outbreak probability: exact value for the half-and-half mix") {
  auto par = mix_params(0.0);
  std::map<int, std::int64_t> one_deg1{{1, 1}};
  auto res = outbreak_probability(par, one_deg1);
  CHECK(std::abs(res.q - 1.0 / 3) <= 1e-12);
  CHECK(std::abs(res.probability - 2.0 / 3) <= 1e-12);
  CHECK(res.r0 == doctest::Approx(1.5).epsilon(1e-13));

  std::map<int, std::int64_t> one_deg3{{3, 1}};
  auto res3 = outbreak_probability(par, one_deg3);
  CHECK(std::abs(res3.probability - 26.0 / 27) <= 1e-12);

  std::map<int, std::int64_t> both{{1, 1}, {3, 1}};
  auto resb = outbreak_probability(par, both);
  CHECK(std::abs(resb.probability - (1.0 - (1.0 / 3) * (1.0 / 27))) <= 1e-12);

  std::map<int, std::int64_t> isolated{{0, 7}};
  auto res0 = outbreak_probability(par, isolated);
  CHECK(res0.probability == 0.0);
}

TEST_CASE("subcritical seeds never ignite") {
  auto par2 = params_from_distribution(DegreeDistribution::regular(2), 1.0, 0.0, 0.0,
                                       1.0, 1.0);
  std::map<int, std::int64_t> seeds{{2, 10}};
  auto res = outbreak_probability(par2, seeds);
  CHECK(res.probability == 0.0);
  CHECK(res.q == 1.0);
}

TEST_CASE("branching simulation extinction frequency matches q") {
  auto par = mix_params(0.0);
  auto model = offspring_model(par);
  std::map<int, std::int64_t> one_deg1{{1, 1}};
  const int runs = 20000;
  int extinct = 0;
  Rng rng(97);
  for (int t = 0; t < runs; ++t)
    if (simulate_branching(model, one_deg1, rng, 2000).extinct) ++extinct;
  const double p = 1.0 / 3;  // extinction = q for a single degree-1 seed
  const double sigma = std::sqrt(p * (1 - p) / runs);
  CHECK(std::abs(double(extinct) / runs - p) <= 3 * sigma);
}

TEST_CASE("subcritical progeny quantiles are stable in the cap") {
  auto par = params_from_distribution(DegreeDistribution::regular(3), 1.0, 0.0, 0.0, 1.0,
                                      2.0);  // mean offspring 2/3
  auto model = offspring_model(par);
  std::map<int, std::int64_t> seed{{3, 1}};
  auto quantile95 = [&](std::int64_t cap) {
    std::vector<std::int64_t> sizes;
    Rng rng(4444);
    for (int t = 0; t < 3000; ++t)
      sizes.push_back(simulate_branching(model, seed, rng, cap).progeny);
    std::sort(sizes.begin(), sizes.end());
    return sizes[std::size_t(0.95 * sizes.size())];
  };
  CHECK(quantile95(10000) == quantile95(1000000));
}

TEST_CASE("branching runs that hit the cap are declared survivors") {
  auto par = mix_params(0.0);
  auto model = offspring_model(par);
  std::map<int, std::int64_t> seed{{3, 1}};
  int survived = 0;
  Rng rng(31);
  for (int t = 0; t < 200; ++t) {
    auto run = simulate_branching(model, seed, rng, 500);
    if (!run.extinct) {
      ++survived;
      CHECK(run.progeny >= 500);
    }
  }
  CHECK(survived > 0);
}
