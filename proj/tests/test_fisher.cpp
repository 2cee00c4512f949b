#include <doctest.h>

#include <cmath>

#include "homagg/aggregate.hpp"
#include "homagg/decompose.hpp"
#include "homagg/fisher.hpp"
#include "test_util.hpp"

using namespace homagg;
using homagg::testing::Rng;
using homagg::testing::random_positive;
using homagg::testing::random_simplex;

namespace {

Population example1_population() {
  // Single-minded consumers: budget 1 on good 1, budget 2 on good 2.
  Population pop;
  pop.agents.push_back({Preference(Linear{{1, 0}}), 1.0});
  pop.agents.push_back({Preference(Linear{{0, 1}}), 2.0});
  return pop;
}

Population random_substitutes_population(Rng& rng, int m) {
  Population pop;
  for (int k = 0; k < m; ++k) {
    Preference pref = [&]() -> Preference {
      switch (rng.pick(4)) {
        case 0: return Preference(CobbDouglas{random_simplex(rng, 2)});
        case 1: return Preference(CES{random_simplex(rng, 2), rng.uniform(1.2, 4.0)});
        case 2: return Preference(Translog{rng.uniform(0.2, 0.8), rng.uniform(0.3, 1.2)});
        default: return Preference(Linear{random_positive(rng, 2)});
      }
    }();
    pop.agents.push_back({std::move(pref), rng.uniform(0.5, 2.0)});
  }
  return pop;
}

}  // namespace

TEST_SUITE_BEGIN("fisher");

TEST_CASE("one cobb-douglas agent clears at p_i = B a_i / X_i") {
  Population pop;
  pop.agents.push_back({Preference(CobbDouglas{{1.0 / 3, 2.0 / 3}}), 3.0});
  const EquilibriumResult r = solve_equilibrium(pop, {1, 1}, 1e-10);
  CHECK(r.prices[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(r.prices[1] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(r.certified);
  CHECK(r.gap <= 1e-10);
}

TEST_CASE("single-minded market clears at p = (1/2, 1/2)") {
  const EquilibriumResult r =
      solve_equilibrium(example1_population(), {2, 4}, 1e-10);
  CHECK(r.prices[0] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(r.prices[1] == doctest::Approx(0.5).epsilon(1e-8));
  double total0 = 0, total1 = 0;
  for (const Vec& x : r.allocations) {
    total0 += x[0];
    total1 += x[1];
  }
  CHECK(total0 == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(total1 == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("two opposed linear agents clear at equal prices") {
  Population pop;
  pop.agents.push_back({Preference(Linear{{1, 2}}), 1.0});
  pop.agents.push_back({Preference(Linear{{2, 1}}), 1.0});
  const EquilibriumResult r = solve_equilibrium(pop, {1, 1}, 1e-9);
  CHECK(r.prices[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.prices[1] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(r.certified);
}

TEST_CASE("newton path handles larger smooth markets") {
  Rng rng(301);
  const int m = 12, n = 5;
  Population pop;
  Vec money(n, 0.0);
  for (int k = 0; k < m; ++k) {
    const Vec a = random_simplex(rng, n);
    const double b = rng.uniform(0.5, 2.0);
    for (int i = 0; i < n; ++i) money[i] += b * a[i];
    pop.agents.push_back({Preference(CobbDouglas{a}), b});
  }
  const Vec X = random_positive(rng, n, 0.5, 2.0);
  const EquilibriumResult r = solve_equilibrium(pop, X, 1e-9);
  CHECK(r.certified);
  for (int i = 0; i < n; ++i)
    CHECK(r.prices[i] == doctest::Approx(money[i] / X[i]).epsilon(1e-7));
}

TEST_CASE("epsilon-equilibrium verification") {
  const Population pop = example1_population();
  SUBCASE("exact equilibrium prices have zero gap") {
    const auto [ok, gap] = verify_epsilon_equilibrium(pop, {2, 4}, {0.5, 0.5}, 1e-9);
    CHECK(ok);
    CHECK(gap <= 1e-10);
  }
  SUBCASE("unit prices are far from clearing X = (2,4)") {
    const auto [ok, gap] = verify_epsilon_equilibrium(pop, {2, 4}, {1, 1}, 0.1);
    CHECK_FALSE(ok);
    CHECK(gap == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("a vacuous threshold accepts anything") {
    CHECK(verify_epsilon_equilibrium(pop, {2, 4}, {0.3, 1.7}, 2.0).first);
  }
}

TEST_CASE("dual optimality matches clearing") {
  // Stated at differentiability points, so smooth families only: at a kink
  // equilibrium the gradient is a selection from the superdifferential.
  Rng rng(302);
  for (int trial = 0; trial < 10; ++trial) {
    Population pop;
    const int m = 1 + rng.pick(4);
    for (int k = 0; k < m; ++k) {
      Preference pref = rng.pick(2)
                            ? Preference(CobbDouglas{random_simplex(rng, 2)})
                            : Preference(CES{random_simplex(rng, 2),
                                             rng.uniform(1.2, 4.0)});
      pop.agents.push_back({std::move(pref), rng.uniform(0.5, 2.0)});
    }
    const Vec X = random_positive(rng, 2, 0.5, 2.0);
    const double tol = 1e-9;
    const EquilibriumResult r = solve_equilibrium(pop, X, tol);
    const Preference agg = aggregate_population(pop);
    const double B = pop.total_budget();
    const DemandResult d = demand(agg, r.prices, B);
    double norm = 0, xnorm = 0;
    for (int i = 0; i < 2; ++i) {
      norm += std::abs(d.x[i] - X[i]);
      xnorm += std::abs(X[i]);
    }
    CHECK(norm <= 1e-6 * (1 + xnorm));
  }
}

TEST_CASE("scale invariance") {
  Rng rng(303);
  const Population pop = random_substitutes_population(rng, 4);
  const Vec X = {1.4, 0.8};
  const EquilibriumResult base = solve_equilibrium(pop, X, 1e-10);
  SUBCASE("scaling budgets and supply leaves prices unchanged") {
    Population scaled = pop;
    for (Agent& a : scaled.agents) a.budget *= 3.0;
    const EquilibriumResult r = solve_equilibrium(scaled, {3 * X[0], 3 * X[1]}, 1e-10);
    CHECK(r.prices[0] == doctest::Approx(base.prices[0]).epsilon(1e-8));
    CHECK(r.prices[1] == doctest::Approx(base.prices[1]).epsilon(1e-8));
  }
  SUBCASE("scaling budgets alone scales prices") {
    Population scaled = pop;
    for (Agent& a : scaled.agents) a.budget *= 3.0;
    const EquilibriumResult r = solve_equilibrium(scaled, X, 1e-10);
    CHECK(r.prices[0] == doctest::Approx(3 * base.prices[0]).epsilon(1e-8));
    CHECK(r.prices[1] == doctest::Approx(3 * base.prices[1]).epsilon(1e-8));
  }
}

TEST_CASE("finitely generated fast path") {
  SUBCASE("single-minded generators recover the closed form") {
    const std::vector<Preference> gens = {Preference(Linear{{1, 0, 0}}),
                                          Preference(Linear{{0, 1, 0}}),
                                          Preference(Linear{{0, 0, 1}})};
    const std::vector<Vec> coeffs = {{0.5, 0.3, 0.2}, {0.1, 0.6, 0.3}};
    const Vec budgets = {1.0, 2.0};
    const Vec X = {1.0, 1.0, 2.0};
    const EquilibriumResult r =
        solve_equilibrium_finitely_generated(gens, coeffs, budgets, X, 1e-9);
    Vec t(3, 0.0);
    for (int k = 0; k < 2; ++k)
      for (int j = 0; j < 3; ++j) t[j] += budgets[k] / 3.0 * coeffs[k][j];
    for (int i = 0; i < 3; ++i)
      CHECK(r.prices[i] == doctest::Approx(3.0 * t[i] / X[i]).epsilon(1e-7));
    CHECK(r.certified);
  }
  SUBCASE("one agent with one generator equals the plain solver") {
    const Preference gen(CES{{0.5, 0.5}, 2.0});
    const EquilibriumResult fast = solve_equilibrium_finitely_generated(
        {gen}, {{1.0}}, {2.0}, {1.0, 1.5}, 1e-10);
    Population pop;
    pop.agents.push_back({gen, 2.0});
    const EquilibriumResult plain = solve_equilibrium(pop, {1.0, 1.5}, 1e-10);
    CHECK(fast.prices[0] == doctest::Approx(plain.prices[0]).epsilon(1e-9));
    CHECK(fast.prices[1] == doctest::Approx(plain.prices[1]).epsilon(1e-9));
  }
  SUBCASE("random instance agrees with the expanded population") {
    Rng rng(304);
    const std::vector<Preference> gens = {Preference(CES{{0.4, 0.6}, 1.8}),
                                          Preference(Leontief{{1.0, 0.5}})};
    std::vector<Vec> coeffs;
    Vec budgets;
    Population expanded;
    for (int k = 0; k < 3; ++k) {
      const double t = rng.uniform(0.1, 0.9);
      coeffs.push_back({t, 1.0 - t});
      budgets.push_back(rng.uniform(0.5, 2.0));
      expanded.agents.push_back(
          {Preference(Mixture{{t, 1.0 - t}, {gens[0], gens[1]}}), budgets[k]});
    }
    const Vec X = {1.2, 0.9};
    const EquilibriumResult fast =
        solve_equilibrium_finitely_generated(gens, coeffs, budgets, X, 1e-9);
    const EquilibriumResult slow = solve_equilibrium(expanded, X, 1e-9);
    CHECK(fast.prices[0] == doctest::Approx(slow.prices[0]).epsilon(1e-6));
    CHECK(fast.prices[1] == doctest::Approx(slow.prices[1]).epsilon(1e-6));
  }
  SUBCASE("coefficients outside the simplex are rejected") {
    CHECK_THROWS_AS(solve_equilibrium_finitely_generated(
                        {Preference(CobbDouglas{{0.5, 0.5}})}, {{0.7}}, {1.0},
                        {1.0, 1.0}, 1e-8),
                    std::invalid_argument);
  }
}

TEST_CASE("two-good approximation algorithm") {
  const LinearMarketSolver solver = default_linear_market_solver();
  SUBCASE("cobb-douglas populations are decomposed exactly") {
    Population pop;
    pop.agents.push_back({Preference(CobbDouglas{{0.3, 0.7}}), 1.0});
    pop.agents.push_back({Preference(CobbDouglas{{0.6, 0.4}}), 2.0});
    const Vec X = {1.0, 2.0};
    const Vec p = approx_equilibrium_two_goods(pop, X, 0.5, solver);
    const EquilibriumResult exact = solve_equilibrium(pop, X, 1e-10);
    CHECK(p[0] == doctest::Approx(exact.prices[0]).epsilon(1e-7));
    CHECK(p[1] == doctest::Approx(exact.prices[1]).epsilon(1e-7));
  }
  SUBCASE("ces substitutes certify 3 eps") {
    Population pop;
    for (double a1 : {0.3, 0.5, 0.7})
      pop.agents.push_back({Preference(CES{{a1, 1.0 - a1}, 2.0}), 1.0});
    const Vec X = {1.0, 1.0};
    const Vec p = approx_equilibrium_two_goods(pop, X, 0.1, solver);
    const auto [ok, gap] = verify_epsilon_equilibrium(pop, X, p, 0.3);
    CHECK(ok);
    CHECK(gap <= 0.3);
  }
  SUBCASE("a single linear agent passes through unchanged") {
    Population pop;
    pop.agents.push_back({Preference(Linear{{2, 1}}), 1.0});
    const Vec X = {1.0, 1.0};
    const Vec p = approx_equilibrium_two_goods(pop, X, 0.2, solver);
    const auto [ok, gap] = verify_epsilon_equilibrium(pop, X, p, 1e-6);
    CHECK(ok);
  }
  SUBCASE("complements are rejected") {
    Population pop;
    pop.agents.push_back({Preference(CES{{0.5, 0.5}, 0.5}), 1.0});
    CHECK_THROWS_AS(approx_equilibrium_two_goods(pop, {1, 1}, 0.1, solver),
                    DomainError);
  }
}

TEST_CASE("share-distance transfers epsilon certificates") {
  // If two populations' shares differ by at most delta everywhere, an
  // eps-certificate for one is an (eps + n delta)-certificate for the other.
  Rng rng(305);
  for (int trial = 0; trial < 8; ++trial) {
    const Population pop = random_substitutes_population(rng, 1 + rng.pick(3));
    const double delta = 0.05;
    Population quantized;
    for (const Agent& a : pop.agents) {
      Population sub = linear_population_approximation(a.pref, delta, a.budget);
      for (Agent& s : sub.agents) quantized.agents.push_back(std::move(s));
    }
    const Vec X = random_positive(rng, 2, 0.5, 2.0);
    const EquilibriumResult r = solve_equilibrium(quantized, X, 1e-9);
    const auto [ok, gap] = verify_epsilon_equilibrium(pop, X, r.prices,
                                                      r.gap + 2 * delta + 1e-9);
    CHECK(ok);
    CHECK(gap <= r.gap + 2 * delta + 1e-9);
  }
}

TEST_SUITE_END();
