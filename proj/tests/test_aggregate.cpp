#include <doctest.h>

#include <cmath>

#include "homagg/aggregate.hpp"
#include "homagg/decompose.hpp"
#include "test_util.hpp"

using namespace homagg;
using homagg::testing::Rng;
using homagg::testing::random_population;
using homagg::testing::random_positive;
using homagg::testing::random_preference;
using homagg::testing::random_simplex;

TEST_SUITE_BEGIN("aggregate");

TEST_CASE("single-minded consumers aggregate to Cobb-Douglas") {
  Population pop;
  pop.agents.push_back({Preference(Linear{{1, 0}}), 1.0});
  pop.agents.push_back({Preference(Linear{{0, 1}}), 2.0});
  const Preference agg = aggregate_population(pop);
  REQUIRE(agg.is<CobbDouglas>());
  CHECK(agg.as<CobbDouglas>().a[0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(agg.as<CobbDouglas>().a[1] == doctest::Approx(2.0 / 3).epsilon(1e-15));
}

TEST_CASE("a single agent aggregates to itself") {
  Population pop;
  pop.agents.push_back({Preference(CES{{0.4, 0.6}, 2.0}), 3.0});
  const Preference agg = aggregate_population(pop);
  CHECK(agg == pop.agents[0].pref);
}

TEST_CASE("cobb-douglas populations stay cobb-douglas") {
  Population pop;
  pop.agents.push_back({Preference(CobbDouglas{{0.2, 0.8}}), 1.0});
  pop.agents.push_back({Preference(CobbDouglas{{0.6, 0.4}}), 1.0});
  const Preference agg = aggregate_population(pop);
  REQUIRE(agg.is<CobbDouglas>());
  CHECK(agg.as<CobbDouglas>().a[0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("aggregate demand equals summed individual demand") {
  Rng rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + rng.pick(2);
    const int m = 1 + rng.pick(5);
    const Population pop = random_population(rng, n, m, false);
    const Preference agg = aggregate_population(pop);
    const double B = pop.total_budget();
    for (int probe = 0; probe < 5; ++probe) {
      const Vec p = random_positive(rng, n);
      const DemandResult total = demand(agg, p, B);
      if (!total.unique) continue;
      Vec sum(n, 0.0);
      for (const Agent& a : pop.agents) {
        const Vec xa = demand(a.pref, p, a.budget).x;
        for (int i = 0; i < n; ++i) sum[i] += xa[i];
      }
      for (int i = 0; i < n; ++i)
        CHECK(std::abs(total.x[i] - sum[i]) <= 1e-6 * (1 + std::abs(sum[i])));
    }
  }
}

TEST_CASE("aggregation is associative in log expenditure") {
  Rng rng(102);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + rng.pick(2);
    const Population pop1 = random_population(rng, n, 2, false);
    const Population pop2 = random_population(rng, n, 3, false);
    Population joint = pop1;
    for (const Agent& a : pop2.agents) joint.agents.push_back(a);
    Population nested;
    nested.agents.push_back({aggregate_population(pop1), pop1.total_budget()});
    nested.agents.push_back({aggregate_population(pop2), pop2.total_budget()});
    const Preference a = aggregate_population(joint);
    const Preference b = aggregate_population(nested);
    for (int probe = 0; probe < 10; ++probe) {
      const Vec p = random_positive(rng, n);
      CHECK(std::abs(log_expenditure(a, p) - log_expenditure(b, p)) < 1e-12);
    }
  }
}

TEST_CASE("continuous aggregation: logit MRS reproduces CES substitutes") {
  // Quantile nodes of the closed-form MRS distribution of a symmetric CES
  // with sigma = 2 aggregate back to the CES log expenditure up to an
  // additive constant.
  const MRSDistribution mu = ces_substitutes_linear_cdf(0.5, 0.5, 2.0, 10000);
  QuadratureMeasure measure{MixtureFamily::kLinearMrs, mu.t, mu.w};
  const Preference ces(CES{{0.5, 0.5}, 2.0});

  double offset = 0;
  std::vector<std::pair<Vec, double>> probes;
  for (int j = 0; j < 100; ++j) {
    const double z = std::exp(-3.0 + 6.0 * j / 99.0);
    const Vec p = {z, 1.0};
    const double diff = aggregate_continuous(measure, p) - log_expenditure(ces, p);
    probes.emplace_back(p, diff);
    offset += diff / 100.0;
  }
  for (const auto& [p, diff] : probes) CHECK(std::abs(diff - offset) < 2e-3);
}

TEST_CASE("continuous aggregation: ratio density reproduces CES complements") {
  // Gauss-Legendre nodes on the log axis for phi(z) = 1/(pi sqrt(z)(1+z)).
  const RatioDensity nu = ratio_density_from_A_sigma(1.0, 0.5);
  QuadratureMeasure measure;
  measure.family = MixtureFamily::kLeontiefRatio;
  const auto& [gx, gw] = gauss_legendre(nu.nodes);
  const double h = (nu.y_hi - nu.y_lo) / nu.panels;
  for (int k = 0; k < nu.panels; ++k) {
    const double mid = nu.y_lo + (k + 0.5) * h;
    for (int j = 0; j < nu.nodes; ++j) {
      const double y = mid + 0.5 * h * gx[j];
      const double z = std::exp(y);
      measure.params.push_back(z);
      measure.weights.push_back(0.5 * h * gw[j] * nu.phi(z) * z);
    }
  }
  const Preference ces(CES{{0.5, 0.5}, 0.5});
  double offset = 0;
  std::vector<std::pair<Vec, double>> probes;
  for (int j = 0; j < 60; ++j) {
    const Vec p = {std::exp(-2.0 + 4.0 * j / 59.0), 1.0};
    const double diff = aggregate_continuous(measure, p) - log_expenditure(ces, p);
    probes.emplace_back(p, diff);
    offset += diff / 60.0;
  }
  for (const auto& [p, diff] : probes) CHECK(std::abs(diff - offset) < 1e-4);
}

TEST_CASE("continuous aggregation: uniform log MRS reproduces translog") {
  const int N = 4000;
  QuadratureMeasure measure;
  measure.family = MixtureFamily::kTranslogLogMrs;
  for (int j = 0; j < N; ++j) {
    measure.params.push_back(-1.0 + 2.0 * (j + 0.5) / N);
    measure.weights.push_back(1.0 / N);
  }
  const Preference tl(Translog{0.5, 0.5});
  double offset = 0;
  std::vector<std::pair<Vec, double>> probes;
  for (int j = 0; j < 90; ++j) {
    const Vec p = {std::exp(-3.0 + 6.0 * j / 89.0), 1.0};  // covers all branches
    const double diff = aggregate_continuous(measure, p) - log_expenditure(tl, p);
    probes.emplace_back(p, diff);
    offset += diff / 90.0;
  }
  for (const auto& [p, diff] : probes) CHECK(std::abs(diff - offset) < 1e-6);
}

TEST_CASE("contour sampling") {
  SUBCASE("aggregate of the two halfspaces lies on x1 x2 = 1/4") {
    Population pop;
    pop.agents.push_back({Preference(Linear{{1, 0}}), 1.0});
    pop.agents.push_back({Preference(Linear{{0, 1}}), 1.0});
    const Preference agg = aggregate_population(pop);
    for (const ContourSample& s : contour_sample(agg, 1.0, 32)) {
      REQUIRE(s.bounded);
      CHECK(s.x[0] * s.x[1] == doctest::Approx(0.25).epsilon(1e-9));
    }
  }
  SUBCASE("leontief corner on the diagonal") {
    const auto samples = contour_sample(Preference(Leontief{{1, 1}}), 1.0, 16);
    for (const ContourSample& s : samples) {
      REQUIRE(s.bounded);
      CHECK(std::max(s.x[0], s.x[1]) >= 1.0 - 1e-9);
      CHECK(std::min(s.x[0], s.x[1]) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("linear contour is the budget segment") {
    for (const ContourSample& s :
         contour_sample(Preference(Linear{{1, 1}}), 1.0, 16)) {
      REQUIRE(s.bounded);
      CHECK(s.x[0] + s.x[1] == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  SUBCASE("points hit the level") {
    Rng rng(111);
    const Preference pref = random_preference(rng, 3, true);
    for (const ContourSample& s : contour_sample(pref, 2.0, 9)) {
      REQUIRE(s.bounded);
      CHECK(utility(pref, s.x) == doctest::Approx(2.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("eisenberg-gale primal oracle") {
  SUBCASE("two single-minded agents") {
    Population pop;
    pop.agents.push_back({Preference(Linear{{1, 0}}), 1.0});
    pop.agents.push_back({Preference(Linear{{0, 1}}), 1.0});
    const EisenbergGaleResult r = eisenberg_gale_primal(pop, {1, 1});
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));
  }
  SUBCASE("one agent gets everything") {
    Population pop;
    pop.agents.push_back({Preference(CES{{0.3, 0.7}, 0.5}), 2.0});
    const EisenbergGaleResult r = eisenberg_gale_primal(pop, {1, 2});
    CHECK(r.value ==
          doctest::Approx(utility(pop.agents[0].pref, {1, 2})).epsilon(1e-10));
  }
  SUBCASE("two identical leontief agents split evenly") {
    Population pop;
    pop.agents.push_back({Preference(Leontief{{1, 1}}), 1.0});
    pop.agents.push_back({Preference(Leontief{{1, 1}}), 1.0});
    const EisenbergGaleResult r = eisenberg_gale_primal(pop, {2, 2});
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));
  }
  SUBCASE("optimum equals the dual utility of the aggregate") {
    Rng rng(112);
    for (int trial = 0; trial < 10; ++trial) {
      const int n = 2 + rng.pick(2);
      const int m = 1 + rng.pick(3);
      Population pop;
      for (int k = 0; k < m; ++k) {
        switch (rng.pick(4)) {
          case 0:
            pop.agents.push_back(
                {Preference(Linear{random_positive(rng, n)}), rng.uniform(0.5, 2.0)});
            break;
          case 1:
            pop.agents.push_back(
                {Preference(Leontief{random_positive(rng, n)}), rng.uniform(0.5, 2.0)});
            break;
          case 2:
            pop.agents.push_back(
                {Preference(CobbDouglas{random_simplex(rng, n)}), rng.uniform(0.5, 2.0)});
            break;
          default:
            pop.agents.push_back(
                {Preference(CES{random_simplex(rng, n), rng.uniform(1.3, 2.5)}),
                 rng.uniform(0.5, 2.0)});
        }
      }
      const Vec x = random_positive(rng, n, 0.5, 2.0);
      const double primal = eisenberg_gale_primal(pop, x).value;
      const double dual = utility(aggregate_population(pop), x);
      CHECK(primal == doctest::Approx(dual).epsilon(1e-4));
    }
  }
}

TEST_SUITE_END();
