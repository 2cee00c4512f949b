#pragma once
// Fisher market equilibria.  Prices clear the market exactly when they
// minimize the convex dual
//     f(p) = <X, p> - sum_k b_k ln E_k(p),
// whose gradient in log-price coordinates is p_i X_i - (money spent on i).
// The certified gap of a candidate price vector is the price-weighted excess
// demand relative to the total budget.

#include <functional>

#include "homagg/prefcore.hpp"

namespace homagg {

struct EquilibriumResult {
  Vec prices;
  std::vector<Vec> allocations;  // per-agent bundles
  double gap = 0.0;              // <p, |X - sum_k x_k|> / B
  double objective = 0.0;        // dual value <X,p> - sum_k b_k ln E_k(p)
  int iterations = 0;
  bool certified = false;        // gap <= tol
};

/// Minimizes the dual over q = ln p.  Two-good markets use golden section
/// along the budget line <p,X> = B (the dual restricted to it is convex for
/// every family, kinks included); larger markets use damped Newton with a
/// finite-difference Hessian and a gradient-descent fallback for non-smooth
/// populations.  Allocations come from per-agent demand with residual
/// supply split by proportional rationing at ties.  If the iteration cap is
/// hit the best iterate is returned with its honest gap and
/// certified = false.
EquilibriumResult solve_equilibrium(const Population& pop, const Vec& supply,
                                    double tol);

/// Price-weighted excess demand test: returns (gap <= eps, gap) with
/// gap = <p, e>/B, e_i = |X_i - sum_k x_{k,i}|, using the same tie
/// resolution as the solver.
std::pair<bool, double> verify_epsilon_equilibrium(const Population& pop,
                                                   const Vec& supply,
                                                   const Vec& prices,
                                                   double eps);

/// Fast path for finitely-generated domains: every agent k reports a
/// simplex vector t_k over the q fixed generator preferences.  The market
/// reduces to a single consumer with mixture weights t = sum_k beta_k t_k;
/// prices match the expanded-population solve.
EquilibriumResult solve_equilibrium_finitely_generated(
    const std::vector<Preference>& generators, const std::vector<Vec>& coeffs,
    const Vec& budgets, const Vec& supply, double tol);

/// Black-box solver interface for markets of linear consumers.
using LinearMarketSolver =
    std::function<Vec(const Population&, const Vec& supply, double eps)>;

/// Default black box: the dual solver above at a tight tolerance.
LinearMarketSolver default_linear_market_solver();

/// Approximation algorithm for two-good markets of substitutes: replaces
/// each agent by linear_population_approximation(., eps), runs the black-box
/// linear-domain solver and returns its prices.  Since shares differ by at
/// most eps per agent, an eps-certificate for the auxiliary market transfers
/// to a 3 eps-certificate for the original one.
Vec approx_equilibrium_two_goods(const Population& pop, const Vec& supply,
                                 double eps, const LinearMarketSolver& solver);

}  // namespace homagg
