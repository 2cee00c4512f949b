#include "homagg/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "homagg/numerics.hpp"

namespace homagg {

namespace {

// Cobb-Douglas exponents when the preference collapses exactly: either a
// Cobb-Douglas member, or a single-minded linear preference with unit value
// (ln E = ln p_i, a simplex vertex).  Returns false otherwise.
bool cobb_douglas_exponents(const Preference& pref, Vec* a) {
  if (pref.is<CobbDouglas>()) {
    *a = pref.as<CobbDouglas>().a;
    return true;
  }
  if (pref.is<Linear>()) {
    const Vec& v = pref.as<Linear>().v;
    int nonzero = -1;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == 0) continue;
      if (nonzero >= 0 || v[i] != 1.0) return false;
      nonzero = static_cast<int>(i);
    }
    a->assign(v.size(), 0.0);
    (*a)[nonzero] = 1.0;
    return true;
  }
  return false;
}

}  // namespace

Preference aggregate_population(const Population& pop) {
  pop.validate();
  if (pop.agents.size() == 1) return pop.agents[0].pref;

  const double B = pop.total_budget();
  const int n = pop.dimension();

  bool all_cobb_douglas = true;
  Vec a_sum(n, 0.0);
  for (const Agent& agent : pop.agents) {
    Vec a;
    if (!cobb_douglas_exponents(agent.pref, &a)) {
      all_cobb_douglas = false;
      break;
    }
    for (int i = 0; i < n; ++i) a_sum[i] += (agent.budget / B) * a[i];
  }
  if (all_cobb_douglas) return Preference(CobbDouglas{std::move(a_sum)});

  Mixture mix;
  mix.weights.reserve(pop.agents.size());
  mix.components.reserve(pop.agents.size());
  for (const Agent& agent : pop.agents) {
    mix.weights.push_back(agent.budget / B);
    mix.components.push_back(agent.pref);
  }
  return Preference(std::move(mix));
}

// ---------------------------------------------------------------------------
// Continuous aggregation
// ---------------------------------------------------------------------------

void QuadratureMeasure::validate() const {
  if (params.empty()) throw std::invalid_argument("measure: empty node list");
  if (params.size() != weights.size())
    throw std::invalid_argument("measure: node/weight size mismatch");
  double s = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw std::invalid_argument("measure: negative weight");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-6)
    throw std::invalid_argument("measure: weights must sum to one");
  for (double t : params) {
    if (!std::isfinite(t)) throw std::invalid_argument("measure: non-finite node");
    if (family != MixtureFamily::kTranslogLogMrs && t < 0)
      throw std::invalid_argument("measure: negative node parameter");
  }
}

namespace {

double node_log_expenditure(MixtureFamily family, double param, const Vec& p) {
  switch (family) {
    case MixtureFamily::kLinearMrs: {
      // Linear v = (t, 1): ln E = min(ln p1 - ln t, ln p2).
      if (param == 0) return std::log(p[1]);
      return std::min(std::log(p[0]) - std::log(param), std::log(p[1]));
    }
    case MixtureFamily::kLeontiefRatio:
      return std::log(p[0] + param * p[1]);
    case MixtureFamily::kTranslogLogMrs:
      return std::min(std::log(p[0]) - 0.5 * param, std::log(p[1]) + 0.5 * param);
  }
  throw std::logic_error("unknown mixture family");
}

}  // namespace

double aggregate_continuous(const QuadratureMeasure& measure, const Vec& p) {
  measure.validate();
  check_prices(p, 2);
  double total = 0;
  for (std::size_t j = 0; j < measure.params.size(); ++j)
    total += measure.weights[j] *
             node_log_expenditure(measure.family, measure.params[j], p);
  return total;
}

// ---------------------------------------------------------------------------
// Contour sampling
// ---------------------------------------------------------------------------

std::vector<ContourSample> contour_sample(const Preference& pref, double level,
                                          int directions) {
  const int n = pref.dimension();
  if (n != 2 && n != 3)
    throw std::invalid_argument("contour_sample: supports 2 or 3 goods");
  if (directions < 8)
    throw std::invalid_argument("contour_sample: need at least 8 directions");
  if (!(level > 0)) throw std::invalid_argument("contour_sample: level must be positive");

  std::vector<std::pair<double, Vec>> rays;
  if (n == 2) {
    for (int j = 0; j < directions; ++j) {
      const double th = (j + 0.5) / directions * M_PI / 2.0;
      rays.emplace_back(th, Vec{std::cos(th), std::sin(th)});
    }
  } else {
    const int k = static_cast<int>(std::ceil(std::sqrt(double(directions))));
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) {
        const double th = (a + 0.5) / k * M_PI / 2.0;   // azimuth in x1-x2
        const double ph = (b + 0.5) / k * M_PI / 2.0;   // polar from x3
        rays.emplace_back(th, Vec{std::sin(ph) * std::cos(th),
                                  std::sin(ph) * std::sin(th), std::cos(ph)});
      }
  }

  std::vector<ContourSample> out;
  out.reserve(rays.size());
  for (auto& [angle, d] : rays) {
    ContourSample s;
    s.angle = angle;
    s.direction = d;
    const double u = utility(pref, d);
    if (u <= 1e-12) {
      // The ray never reaches the contour: u(t d) = t u(d) stays below level.
      s.bounded = false;
    } else {
      s.bounded = true;
      s.x.resize(d.size());
      for (std::size_t i = 0; i < d.size(); ++i) s.x[i] = level / u * d[i];
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Eisenberg-Gale primal oracle
// ---------------------------------------------------------------------------

namespace {

double closed_form_utility(const Preference& pref, const Vec& x) {
  if (pref.is<Linear>() || pref.is<Leontief>() || pref.is<CobbDouglas>() ||
      pref.is<CES>())
    return utility(pref, x);
  throw DomainError(
      "eisenberg_gale_primal: supports linear, leontief, cobb_douglas and ces agents");
}

// One element of the supergradient of ln u at x (families with closed forms).
Vec grad_log_utility(const Preference& pref, const Vec& x) {
  const int n = pref.dimension();
  Vec g(n, 0.0);
  if (pref.is<Linear>()) {
    const Vec& v = pref.as<Linear>().v;
    const double u = dot(v, x);
    for (int i = 0; i < n; ++i) g[i] = v[i] / u;
  } else if (pref.is<Leontief>()) {
    const Vec& v = pref.as<Leontief>().v;
    double u = kInf;
    for (int i = 0; i < n; ++i)
      if (v[i] > 0) u = std::min(u, x[i] / v[i]);
    std::vector<int> active;
    for (int i = 0; i < n; ++i)
      if (v[i] > 0 && x[i] / v[i] <= u * (1 + 1e-12)) active.push_back(i);
    for (int i : active) g[i] = 1.0 / (v[i] * u * active.size());
  } else if (pref.is<CobbDouglas>()) {
    const Vec& a = pref.as<CobbDouglas>().a;
    for (int i = 0; i < n; ++i) g[i] = a[i] > 0 ? a[i] / x[i] : 0.0;
  } else {
    const CES& c = pref.as<CES>();
    const double r = (c.sigma - 1.0) / c.sigma;
    Vec t(n, -kInf);
    for (int i = 0; i < n; ++i)
      if (x[i] > 0) t[i] = r * std::log(c.a[i] * x[i]);
    Vec w = softmax(t);
    for (int i = 0; i < n; ++i) g[i] = x[i] > 0 ? w[i] / x[i] : 0.0;
  }
  return g;
}

struct EgProblem {
  const Population& pop;
  const Vec& x;
  Vec beta;

  double objective(const std::vector<Vec>& alloc) const {
    double phi = 0;
    for (std::size_t k = 0; k < pop.agents.size(); ++k) {
      const double u = closed_form_utility(pop.agents[k].pref, alloc[k]);
      if (u <= 0) return -kInf;
      phi += beta[k] * std::log(u);
    }
    return phi;
  }
};

}  // namespace

EisenbergGaleResult eisenberg_gale_primal(const Population& pop, const Vec& x) {
  pop.validate();
  const int n = pop.dimension();
  const int m = static_cast<int>(pop.agents.size());
  if (m > 6 || n > 4)
    throw std::invalid_argument("eisenberg_gale_primal: oracle scale is m <= 6, n <= 4");
  check_bundle(x, n);
  for (double xi : x)
    if (!(xi > 0))
      throw std::invalid_argument("eisenberg_gale_primal: x must be strictly positive");

  EgProblem prob{pop, x, {}};
  const double B = pop.total_budget();
  for (const Agent& a : pop.agents) prob.beta.push_back(a.budget / B);

  // Proportional start keeps every utility positive.
  std::vector<Vec> alloc(m, Vec(n));
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < n; ++i) alloc[k][i] = prob.beta[k] * x[i];

  auto run_gradient = [&](const EgProblem& gp, double& gp_phi, int iters) {
    double eta = 0.1;
    for (int iter = 0; iter < iters && eta > 1e-14; ++iter) {
      std::vector<Vec> grad(m, Vec(n, 0.0));
      for (int k = 0; k < m; ++k) {
        Vec g = grad_log_utility(gp.pop.agents[k].pref, alloc[k]);
        for (int i = 0; i < n; ++i) grad[k][i] = gp.beta[k] * g[i] * x[i];
      }
      std::vector<Vec> cand(m, Vec(n));
      for (int i = 0; i < n; ++i) {
        Vec theta(m);
        for (int k = 0; k < m; ++k)
          theta[k] = alloc[k][i] / x[i] + eta * grad[k][i];
        theta = project_simplex(theta);
        for (int k = 0; k < m; ++k) cand[k][i] = theta[k] * x[i];
      }
      const double phi_cand = gp.objective(cand);
      if (phi_cand > gp_phi) {
        alloc = std::move(cand);
        gp_phi = phi_cand;
        eta = std::min(eta * 1.25, 10.0);
      } else {
        eta *= 0.5;
      }
    }
  };

  // Smoothing homotopy: Leontief members are replaced by tight CES
  // approximations (sigma -> 0 recovers the min), the smooth problems are
  // solved by projected gradient, and the iterate warm-starts the exact
  // phases.  Without this the exact phases park at corners where several
  // Leontief agents must move jointly.
  bool has_leontief = false;
  for (const Agent& a : pop.agents) has_leontief |= a.pref.is<Leontief>();
  if (m > 1 && has_leontief) {
    for (double sigma_s : {0.5, 0.15, 0.05, 0.015}) {
      Population smooth;
      for (const Agent& a : pop.agents) {
        if (a.pref.is<Leontief>()) {
          const Vec& v = a.pref.as<Leontief>().v;
          double vmax = 0;
          for (double vi : v) vmax = std::max(vmax, vi);
          Vec w(n);
          double wsum = 0;
          for (int i = 0; i < n; ++i) {
            w[i] = 1.0 / std::max(v[i], 1e-9 * vmax);
            wsum += w[i];
          }
          for (double& wi : w) wi /= wsum;
          smooth.agents.push_back({Preference(CES{std::move(w), sigma_s}), a.budget});
        } else {
          smooth.agents.push_back(a);
        }
      }
      EgProblem sp{smooth, x, prob.beta};
      double sphi = sp.objective(alloc);
      run_gradient(sp, sphi, 1500);
    }
  }

  double phi = prob.objective(alloc);

  // Alternating rounds of projected gradient ascent (joint moves across all
  // agents and goods) and pairwise golden-section transfers (derivative
  // free, handles the kinks).  Either phase alone can stall on a corner of
  // the nonsmooth landscape; alternating breaks the ties the other cannot.
  double last_improvement = 0;
  for (int round = 0; round < 4 && m > 1; ++round) {
    const double phi_round_start = phi;
    run_gradient(prob, phi, 3000);

    // Transfer directions per pair: single goods, proportional slices of
    // either bundle, the agents' value vectors (a Leontief receiver only
    // benefits from its own mix), and a few random joint directions.
    std::uint64_t state = 0x2545f4914f6cdd1dULL + 977 * round;
    auto next_u = [&state]() {
      state = state * 6364136223846793005ULL + 1442695040888963407ULL;
      return static_cast<double>(state >> 11) * 0x1.0p-53;
    };
    auto try_transfer = [&](int from, int to, const Vec& d) {
      double t_max = kInf;
      for (int i = 0; i < n; ++i)
        if (d[i] > 0) t_max = std::min(t_max, alloc[from][i] / d[i]);
      if (!(t_max > 0) || !std::isfinite(t_max)) return;
      auto neg_phi = [&](double t) {
        std::vector<Vec> tmp = alloc;
        for (int i = 0; i < n; ++i) {
          tmp[from][i] -= t * d[i];
          tmp[to][i] += t * d[i];
        }
        return -prob.objective(tmp);
      };
      const double t = golden_min(neg_phi, 0.0, t_max, 60);
      if (-neg_phi(t) > phi) {
        for (int i = 0; i < n; ++i) {
          alloc[from][i] -= t * d[i];
          alloc[to][i] += t * d[i];
        }
        phi = prob.objective(alloc);
      }
    };
    auto value_direction = [&](int k) -> Vec {
      const Preference& pref = pop.agents[k].pref;
      if (pref.is<Linear>()) return pref.as<Linear>().v;
      if (pref.is<Leontief>()) return pref.as<Leontief>().v;
      if (pref.is<CES>()) {
        // Balanced mix 1/a_i, the complements-limit ideal bundle.
        Vec d = pref.as<CES>().a;
        for (double& v : d) v = 1.0 / v;
        return d;
      }
      return pref.as<CobbDouglas>().a;
    };
    // Multi-agent rebalance: agent k sheds (or gathers) a slice of a bundle
    // shape, with each good routed to its best marginal user (or taken from
    // the cheapest donor).  Pairwise moves alone stall at points where a
    // Leontief agent must shrink against several recipients at once.
    auto try_rebalance = [&](int k, const Vec& shape, bool shrink) {
      std::vector<int> partner(n, -1);
      double t_max = kInf;
      for (int i = 0; i < n; ++i) {
        if (!(shape[i] > 0)) continue;
        double best_score = shrink ? -kInf : kInf;
        for (int l = 0; l < m; ++l) {
          if (l == k) continue;
          if (!shrink && !(alloc[l][i] > 0)) continue;
          const double score =
              prob.beta[l] * grad_log_utility(pop.agents[l].pref, alloc[l])[i];
          if (shrink ? score > best_score : score < best_score) {
            best_score = score;
            partner[i] = l;
          }
        }
        if (partner[i] < 0) return;
        t_max = std::min(t_max, (shrink ? alloc[k][i]
                                        : alloc[partner[i]][i]) /
                                    shape[i]);
      }
      if (!(t_max > 0) || !std::isfinite(t_max)) return;
      auto apply = [&](std::vector<Vec>& a, double t) {
        for (int i = 0; i < n; ++i) {
          if (!(shape[i] > 0)) continue;
          const double moved = t * shape[i];
          a[k][i] += shrink ? -moved : moved;
          a[partner[i]][i] += shrink ? moved : -moved;
        }
      };
      auto neg_phi = [&](double t) {
        std::vector<Vec> tmp = alloc;
        apply(tmp, t);
        return -prob.objective(tmp);
      };
      const double t = golden_min(neg_phi, 0.0, t_max, 60);
      if (-neg_phi(t) > phi) {
        apply(alloc, t);
        phi = prob.objective(alloc);
      }
    };
    // Exchange: agent k gives good A and receives c units of good B per
    // unit, agent l the reverse.  With c at either agent's marginal rate
    // the move leaves that agent first-order indifferent while the other
    // collects the gains; this is the direction that unsticks corners
    // between linear and Leontief holdings.
    auto try_exchange = [&](int k, int l, int good_a, int good_b, double c) {
      if (!(c > 0) || !std::isfinite(c)) return;
      double t_max = std::min(alloc[k][good_a], alloc[l][good_b] / c);
      if (!(t_max > 0)) return;
      auto neg_phi = [&](double t) {
        std::vector<Vec> tmp = alloc;
        tmp[k][good_a] -= t;
        tmp[l][good_a] += t;
        tmp[k][good_b] += c * t;
        tmp[l][good_b] -= c * t;
        return -prob.objective(tmp);
      };
      const double t = golden_min(neg_phi, 0.0, t_max, 60);
      if (-neg_phi(t) > phi) {
        alloc[k][good_a] -= t;
        alloc[l][good_a] += t;
        alloc[k][good_b] += c * t;
        alloc[l][good_b] -= c * t;
        phi = prob.objective(alloc);
      }
    };
    for (int sweep = 0; sweep < 1200; ++sweep) {
      const double phi_before = phi;
      for (int k = 0; k < m; ++k)
        for (int l = k + 1; l < m; ++l) {
          for (int i = 0; i < n; ++i) {
            Vec e(n, 0.0);
            e[i] = 1.0;
            try_transfer(k, l, e);
            try_transfer(l, k, e);
          }
          try_transfer(k, l, alloc[k]);  // giver's own mix
          try_transfer(l, k, alloc[l]);
          try_transfer(k, l, alloc[l]);  // receiver's mix
          try_transfer(l, k, alloc[k]);
          for (int agent : {k, l}) {
            const Vec v = value_direction(agent);
            if (!v.empty()) {
              try_transfer(k, l, v);
              try_transfer(l, k, v);
            }
          }
          for (int r = 0; r < 4; ++r) {
            Vec d(n);
            for (int i = 0; i < n; ++i) d[i] = 0.05 + next_u();
            try_transfer(k, l, d);
            try_transfer(l, k, d);
          }
          const Vec gk = grad_log_utility(pop.agents[k].pref, alloc[k]);
          const Vec gl = grad_log_utility(pop.agents[l].pref, alloc[l]);
          for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
              if (a == b) continue;
              if (gk[b] > 0) try_exchange(k, l, a, b, gk[a] / gk[b]);
              if (gl[b] > 0) try_exchange(k, l, a, b, gl[a] / gl[b]);
            }
        }
      for (int k = 0; k < m; ++k) {
        const Vec shape = value_direction(k);
        try_rebalance(k, shape, true);
        try_rebalance(k, shape, false);
        try_rebalance(k, alloc[k], true);
      }
      last_improvement = phi - phi_before;
      if (last_improvement < 1e-12 * (1.0 + std::abs(phi))) break;
    }
    if (round > 0 && phi - phi_round_start < 1e-11 * (1.0 + std::abs(phi)))
      break;
  }

  EisenbergGaleResult out;
  double log_value = phi;
  for (int k = 0; k < m; ++k) log_value -= prob.beta[k] * std::log(prob.beta[k]);
  out.value = std::exp(log_value);
  out.allocation = std::move(alloc);
  out.last_improvement = last_improvement;
  out.converged = last_improvement < 1e-9;
  return out;
}

}  // namespace homagg
