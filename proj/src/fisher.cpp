#include "homagg/fisher.hpp"

#include <algorithm>
#include <cmath>

#include "homagg/decompose.hpp"
#include "homagg/numerics.hpp"

namespace homagg {

namespace {

void check_supply(const Vec& X, int n) {
  if (static_cast<int>(X.size()) != n)
    throw std::invalid_argument("supply vector has the wrong dimension");
  for (double xi : X)
    if (!(xi > 0) || !std::isfinite(xi))
      throw std::invalid_argument("supply must be strictly positive");
}

double dual_value(const Population& pop, const Vec& X, const Vec& p) {
  double v = dot(X, p);
  for (const Agent& a : pop.agents) v -= a.budget * log_expenditure(a.pref, p);
  return v;
}

// Gradient of the dual in log-price coordinates:
// g_i = p_i X_i - (money the population spends on good i).
Vec dual_grad(const Population& pop, const Vec& X, const Vec& p) {
  const int n = static_cast<int>(p.size());
  Vec g(n);
  for (int i = 0; i < n; ++i) g[i] = p[i] * X[i];
  for (const Agent& a : pop.agents) {
    const Vec s = expenditure_shares(a.pref, p).x;
    for (int i = 0; i < n; ++i) g[i] -= a.budget * s[i];
  }
  return g;
}

// Unit-budget bundles an agent may demand at p.  A single option when the
// demand is unique; otherwise one option per tied alternative.  The tie band
// here (1e-9 in log scale) is deliberately wider than the selection
// tolerance of expenditure_shares: solvers stop at representable prices a
// few ulps off a kink, and allocation must still be allowed to split there.
constexpr double kOptionTieBand = 1e-9;

std::vector<Vec> demand_options(const Preference& pref, const Vec& p) {
  const int n = pref.dimension();
  std::vector<Vec> options;
  if (pref.is<Linear>()) {
    const Vec& v = pref.as<Linear>().v;
    double best = -kInf;
    Vec r(n, -kInf);
    for (int i = 0; i < n; ++i)
      if (v[i] > 0) {
        r[i] = std::log(v[i]) - std::log(p[i]);
        best = std::max(best, r[i]);
      }
    for (int i = 0; i < n; ++i)
      if (r[i] >= best - kOptionTieBand) {
        Vec x(n, 0.0);
        x[i] = 1.0 / p[i];
        options.push_back(std::move(x));
      }
  } else if (pref.is<PiecewiseLinearE>()) {
    const auto& rows = pref.as<PiecewiseLinearE>().coeffs;
    double e = kInf;
    for (const Vec& row : rows) e = std::min(e, dot(row, p));
    for (const Vec& row : rows) {
      const double val = dot(row, p);
      if (val <= e * (1.0 + kOptionTieBand)) {
        Vec x(n);
        for (int i = 0; i < n; ++i) x[i] = row[i] / val;
        options.push_back(std::move(x));
      }
    }
  }
  if (options.size() < 2) {
    // Unique demand, or ties inside composite preferences, which keep the
    // deterministic selection.
    const DemandResult base = expenditure_shares(pref, p);
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = base.x[i] / p[i];
    return {x};
  }
  return options;
}

// Demands at p with residual supply split across tied alternatives by
// proportional rationing: each flexible agent distributes its budget over
// its options in proportion to the positive residual value each option
// covers.  Adequate for two goods; a max-flow step would be sharper for
// n >= 3.
std::vector<Vec> allocate_with_ties(const Population& pop, const Vec& p,
                                    const Vec& X) {
  const int n = static_cast<int>(p.size());
  const int m = static_cast<int>(pop.agents.size());
  std::vector<std::vector<Vec>> options(m);
  std::vector<Vec> alloc(m, Vec(n, 0.0));

  Vec residual = X;
  std::vector<int> flexible;
  for (int k = 0; k < m; ++k) {
    options[k] = demand_options(pop.agents[k].pref, p);
    if (options[k].size() == 1) {
      for (int i = 0; i < n; ++i) {
        alloc[k][i] = pop.agents[k].budget * options[k][0][i];
        residual[i] -= alloc[k][i];
      }
    } else {
      flexible.push_back(k);
    }
  }

  for (int k : flexible) {
    Vec value(n);
    double total_value = 0;
    for (int i = 0; i < n; ++i) {
      value[i] = p[i] * std::max(residual[i], 0.0);
      total_value += value[i];
    }
    const std::size_t no = options[k].size();
    Vec weight(no, 0.0);
    double wsum = 0;
    for (std::size_t o = 0; o < no; ++o) {
      if (total_value > 0) {
        for (int i = 0; i < n; ++i)
          weight[o] += options[k][o][i] * p[i] * value[i] / total_value;
      }
      wsum += weight[o];
    }
    if (wsum <= 0) {
      weight.assign(no, 1.0 / no);
      wsum = 1.0;
    }
    for (std::size_t o = 0; o < no; ++o) {
      const double lambda = weight[o] / wsum;
      for (int i = 0; i < n; ++i) {
        const double amount = pop.agents[k].budget * lambda * options[k][o][i];
        alloc[k][i] += amount;
        residual[i] -= amount;
      }
    }
  }
  return alloc;
}

double gap_of_allocation(const std::vector<Vec>& alloc, const Vec& p,
                         const Vec& X, double B) {
  double g = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double total = 0;
    for (const Vec& x : alloc) total += x[i];
    g += p[i] * std::abs(X[i] - total);
  }
  return g / B;
}

}  // namespace

EquilibriumResult solve_equilibrium(const Population& pop, const Vec& supply,
                                    double tol) {
  pop.validate();
  const int n = pop.dimension();
  check_supply(supply, n);
  if (!(tol > 0)) throw std::invalid_argument("tol must be positive");

  const double B = pop.total_budget();
  Vec p(n);
  for (int i = 0; i < n; ++i) p[i] = B / (n * supply[i]);
  int iterations = 0;

  if (n == 1) {
    p[0] = B / supply[0];
  } else if (n == 2) {
    // The minimizer satisfies <p, X> = B, and the dual restricted to that
    // budget line is convex in theta = p1 X1 / B for every family, kinks
    // included.  Its directional derivative is the money-balance residual
    // below, monotone from -inf to +inf, so bisection pins the root to
    // machine precision (a value-based search would stall near sqrt(eps)).
    auto imbalance = [&](double theta) {
      const Vec pp = {theta * B / supply[0], (1.0 - theta) * B / supply[1]};
      double m1 = 0, m2 = 0;
      for (const Agent& a : pop.agents) {
        const Vec s = expenditure_shares(a.pref, pp).x;
        m1 += a.budget * s[0];
        m2 += a.budget * s[1];
      }
      return m2 / (pp[1] * supply[1]) - m1 / (pp[0] * supply[0]);
    };
    double lo = 1e-13, hi = 1.0 - 1e-13, theta;
    if (imbalance(lo) >= 0) {
      theta = lo;  // the population never demands good 1
    } else if (imbalance(hi) <= 0) {
      theta = hi;
    } else {
      for (iterations = 0; iterations < 200 && hi - lo > 1e-17; ++iterations) {
        const double mid = 0.5 * (lo + hi);
        (imbalance(mid) < 0 ? lo : hi) = mid;
      }
      theta = 0.5 * (lo + hi);
    }
    p = {theta * B / supply[0], (1.0 - theta) * B / supply[1]};
  } else {
    // Damped Newton over q = ln p with a finite-difference Hessian; falls
    // back to gradient steps when the population is not smooth enough.
    Vec q(n);
    for (int i = 0; i < n; ++i) q[i] = std::log(p[i]);
    auto prices_of = [&](const Vec& qq) {
      Vec pp(n);
      for (int i = 0; i < n; ++i) pp[i] = std::exp(qq[i]);
      return pp;
    };
    double fq = dual_value(pop, supply, p);
    for (iterations = 0; iterations < 400; ++iterations) {
      const Vec g = dual_grad(pop, supply, prices_of(q));
      double g1 = 0;
      for (double gi : g) g1 += std::abs(gi);
      if (g1 <= 0.25 * tol * B) break;

      // Central-difference Hessian of the dual in q.
      const double delta = 1e-6;
      std::vector<Vec> H(n, Vec(n, 0.0));
      for (int j = 0; j < n; ++j) {
        Vec qp = q, qm = q;
        qp[j] += delta;
        qm[j] -= delta;
        const Vec gp = dual_grad(pop, supply, prices_of(qp));
        const Vec gm = dual_grad(pop, supply, prices_of(qm));
        for (int i = 0; i < n; ++i) H[i][j] = (gp[i] - gm[i]) / (2.0 * delta);
      }
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
          H[i][j] = H[j][i] = 0.5 * (H[i][j] + H[j][i]);

      Vec step;
      double ridge = 0.0;
      for (int attempt = 0; attempt < 8; ++attempt) {
        std::vector<Vec> A = H;
        Vec rhs(n);
        for (int i = 0; i < n; ++i) {
          A[i][i] += ridge;
          rhs[i] = -g[i];
        }
        if (solve_dense(A, rhs) && dot(rhs, g) < 0) {
          step = std::move(rhs);
          break;
        }
        ridge = ridge == 0.0 ? 1e-8 * (1.0 + std::abs(H[0][0])) : ridge * 100.0;
      }
      if (step.empty()) {
        step.resize(n);
        for (int i = 0; i < n; ++i) step[i] = -g[i] / (1.0 + g1);
      }

      bool moved = false;
      for (double t = 1.0; t > 1e-12; t *= 0.5) {
        Vec qc = q;
        for (int i = 0; i < n; ++i) qc[i] += t * step[i];
        const double fc = dual_value(pop, supply, prices_of(qc));
        if (fc < fq) {
          q = qc;
          fq = fc;
          moved = true;
          break;
        }
      }
      if (!moved) {
        // Near the minimum the dual flattens below double resolution while
        // the gradient still carries signal; accept the full Newton step
        // when it shrinks the gradient instead.
        Vec qc = q;
        for (int i = 0; i < n; ++i) qc[i] += step[i];
        const Vec gc = dual_grad(pop, supply, prices_of(qc));
        double gc1 = 0;
        for (double gi : gc) gc1 += std::abs(gi);
        if (gc1 < g1) {
          q = qc;
          fq = dual_value(pop, supply, prices_of(q));
          moved = true;
        }
      }
      if (!moved) break;  // stalled; report the honest gap below
    }
    p = prices_of(q);
  }

  EquilibriumResult r;
  r.prices = p;
  r.allocations = allocate_with_ties(pop, p, supply);
  r.gap = gap_of_allocation(r.allocations, p, supply, B);
  r.objective = dual_value(pop, supply, p);
  r.iterations = iterations;
  r.certified = r.gap <= tol;
  return r;
}

std::pair<bool, double> verify_epsilon_equilibrium(const Population& pop,
                                                   const Vec& supply,
                                                   const Vec& prices,
                                                   double eps) {
  pop.validate();
  const int n = pop.dimension();
  check_supply(supply, n);
  check_prices(prices, n);
  const auto alloc = allocate_with_ties(pop, prices, supply);
  const double gap = gap_of_allocation(alloc, prices, supply, pop.total_budget());
  return {gap <= eps, gap};
}

EquilibriumResult solve_equilibrium_finitely_generated(
    const std::vector<Preference>& generators, const std::vector<Vec>& coeffs,
    const Vec& budgets, const Vec& supply, double tol) {
  if (generators.empty()) throw std::invalid_argument("no generator preferences");
  const int q = static_cast<int>(generators.size());
  const int n = generators[0].dimension();
  for (const Preference& g : generators)
    if (g.dimension() != n)
      throw std::invalid_argument("generators disagree on dimension");
  if (coeffs.size() != budgets.size() || coeffs.empty())
    throw std::invalid_argument("coefficient/budget mismatch");

  auto normalized = [&](const Vec& t) {
    if (static_cast<int>(t.size()) != q)
      throw std::invalid_argument("coefficient vector has the wrong length");
    double s = 0;
    for (double ti : t) {
      if (ti < -1e-12) throw std::invalid_argument("coefficient vector not in simplex");
      s += ti;
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw std::invalid_argument("coefficient vector not in simplex");
    Vec out(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) out[i] = std::max(t[i], 0.0) / s;
    return out;
  };

  double B = 0;
  for (double b : budgets) {
    if (!(b > 0)) throw std::invalid_argument("budgets must be positive");
    B += b;
  }
  Vec t(q, 0.0);
  std::vector<Vec> agent_t;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    agent_t.push_back(normalized(coeffs[k]));
    for (int j = 0; j < q; ++j) t[j] += budgets[k] / B * agent_t.back()[j];
  }
  double ts = 0;
  for (double tj : t) ts += tj;
  for (double& tj : t) tj /= ts;

  // One aggregate agent carries the whole market.
  Population aggregate_pop;
  aggregate_pop.agents.push_back({Preference(Mixture{t, generators}), B});
  EquilibriumResult r = solve_equilibrium(aggregate_pop, supply, tol);

  // Re-split the allocation across the reported agents at the solved prices.
  Population expanded;
  for (std::size_t k = 0; k < coeffs.size(); ++k)
    expanded.agents.push_back(
        {Preference(Mixture{agent_t[k], generators}), budgets[k]});
  r.allocations = allocate_with_ties(expanded, r.prices, supply);
  r.gap = gap_of_allocation(r.allocations, r.prices, supply, B);
  r.certified = r.gap <= tol;
  return r;
}

LinearMarketSolver default_linear_market_solver() {
  return [](const Population& pop, const Vec& supply, double eps) {
    return solve_equilibrium(pop, supply, std::min(eps, 1e-9)).prices;
  };
}

Vec approx_equilibrium_two_goods(const Population& pop, const Vec& supply,
                                 double eps, const LinearMarketSolver& solver) {
  pop.validate();
  if (pop.dimension() != 2)
    throw std::invalid_argument("approx_equilibrium_two_goods: requires two goods");
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0,1)");
  check_supply(supply, 2);

  // Each agent is replaced by linear consumers whose aggregate shares track
  // the agent's within eps; membership failures propagate as DomainError.
  Population linear_pop;
  for (const Agent& a : pop.agents) {
    Population sub = linear_population_approximation(a.pref, eps, a.budget);
    for (Agent& s : sub.agents) linear_pop.agents.push_back(std::move(s));
  }
  return solver(linear_pop, supply, eps);
}

}  // namespace homagg
