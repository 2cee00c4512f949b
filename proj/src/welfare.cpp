#include "homagg/welfare.hpp"

#include <algorithm>
#include <cmath>

#include "homagg/decompose.hpp"
#include "homagg/numerics.hpp"

namespace homagg {

namespace {

void check_change(const PriceChange& change, int n) {
  check_prices(change.p0, n);
  check_prices(change.p1, n);
}

}  // namespace

double welfare_measure(WelfareKind kind, const Preference& pref, double budget,
                       const PriceChange& change) {
  if (!(budget > 0)) throw std::invalid_argument("welfare: budget must be positive");
  check_change(change, pref.dimension());
  const double le0 = log_expenditure(pref, change.p0);
  const double le1 = log_expenditure(pref, change.p1);
  switch (kind) {
    case WelfareKind::kEV:
      return budget * (std::exp(le0 - le1) - 1.0);
    case WelfareKind::kCV:
      return budget * (1.0 - std::exp(le1 - le0));
    case WelfareKind::kAV:
      // Sign fixed by the ordering CV <= AV <= EV, which follows from
      // 1 - 1/t <= ln t <= t - 1 at t = E(p0)/E(p1).
      return budget * (le0 - le1);
  }
  throw std::logic_error("unknown welfare kind");
}

double population_welfare(const Population& pop, WelfareKind kind,
                          const PriceChange& change) {
  pop.validate();
  double total = 0;
  for (const Agent& a : pop.agents)
    total += welfare_measure(kind, a.pref, a.budget, change);
  return total;
}

// ---------------------------------------------------------------------------
// Parametric ranges via hulls
// ---------------------------------------------------------------------------

namespace {

struct HullValue {
  double value;
  double x_left, x_right;   // supporting grid abscissae
  double weight_left;       // barycentric weight on the left support point
};

// Evaluates the piecewise-linear hull through the given indices at x*.
HullValue hull_at(const std::vector<double>& xs, const std::vector<double>& ys,
                  const std::vector<int>& hull, double x) {
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    const double xl = xs[hull[k]], xr = xs[hull[k + 1]];
    if (x >= xl && x <= xr) {
      const double lam = xr == xl ? 1.0 : (xr - x) / (xr - xl);
      return {lam * ys[hull[k]] + (1.0 - lam) * ys[hull[k + 1]], xl, xr, lam};
    }
  }
  // x coincides with an endpoint.
  const int last = hull.back();
  return {ys[last], xs[last], xs[last], 1.0};
}

}  // namespace

WelfareRange robust_range_parametric(const std::function<double(double)>& w,
                                     const ParametricFamily& family,
                                     double aggregate_param, double B,
                                     int grid) {
  if (!(family.hi > family.lo)) throw std::invalid_argument("empty parameter interval");
  if (!(aggregate_param >= family.lo && aggregate_param <= family.hi))
    throw std::invalid_argument("aggregate parameter outside the family interval");
  if (!(B > 0)) throw std::invalid_argument("total budget must be positive");
  if (grid < 3) throw std::invalid_argument("grid too small");

  if (family.make) {
    // The range formula requires ln E affine in the parameter; verify on a
    // few midpoints.
    const Vec probes[] = {{1.0, 1.0}, {0.5, 2.0}, {3.0, 0.25}};
    for (double lo : {family.lo, 0.5 * (family.lo + family.hi)}) {
      const double hi = 0.5 * (lo + family.hi);
      const double mid = 0.5 * (lo + hi);
      const Preference pl = family.make(lo), ph = family.make(hi),
                       pm = family.make(mid);
      if (pl.dimension() != 2) break;  // probes are two-good; skip otherwise
      for (const Vec& p : probes) {
        const double want = 0.5 * (log_expenditure(pl, p) + log_expenditure(ph, p));
        if (std::abs(log_expenditure(pm, p) - want) > 1e-8)
          throw DomainError("family log-expenditure is not affine in the parameter");
      }
    }
  }

  // Uniform grid with the aggregate parameter inserted, so hull values at it
  // are exact.
  std::vector<double> xs;
  xs.reserve(grid + 2);
  for (int j = 0; j <= grid; ++j)
    xs.push_back(family.lo + (family.hi - family.lo) * j / grid);
  xs.push_back(aggregate_param);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> ys(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) ys[j] = w(xs[j]);

  const HullValue up = hull_at(xs, ys, upper_hull_indices(xs, ys), aggregate_param);
  const HullValue lo = hull_at(xs, ys, lower_hull_indices(xs, ys), aggregate_param);

  WelfareRange out;
  out.lower = B * lo.value;
  out.upper = B * up.value;
  if (family.make) {
    auto witness = [&](const HullValue& h) {
      Population pop;
      if (h.weight_left > 1e-12)
        pop.agents.push_back({family.make(h.x_left), B * h.weight_left});
      if (1.0 - h.weight_left > 1e-12)
        pop.agents.push_back({family.make(h.x_right), B * (1.0 - h.weight_left)});
      return pop;
    };
    out.lower_witness = witness(lo);
    out.upper_witness = witness(up);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Two-good substitutes: exact EV range
// ---------------------------------------------------------------------------

namespace {

// EV per unit budget of a linear consumer with MRS = t.
double ev_linear(double t, double z0, double z1, double ratio2) {
  return ratio2 * std::min(z0, t) / std::min(z1, t) - 1.0;
}

}  // namespace

WelfareRange robust_range_substitutes_ev(const Preference& aggregate, double B,
                                         const PriceChange& change,
                                         int quad_nodes) {
  if (aggregate.dimension() != 2)
    throw std::invalid_argument("robust_range_substitutes_ev: requires two goods");
  if (!(B > 0)) throw std::invalid_argument("total budget must be positive");
  if (quad_nodes < 16) throw std::invalid_argument("too few quadrature nodes");
  check_change(change, 2);

  const double z0 = change.p0[0] / change.p0[1];
  const double z1 = change.p1[0] / change.p1[1];
  const double ratio2 = change.p0[1] / change.p1[1];
  const double ev_at_zero = ratio2 - 1.0;                       // MRS -> 0
  const double ev_at_inf = change.p0[0] / change.p1[0] - 1.0;   // MRS -> inf

  WelfareRange out;
  out.lower = welfare_measure(WelfareKind::kEV, aggregate, B, change);

  if (aggregate.is<CES>()) {
    // Closed-form CDF; the only non-smooth points of the integrand are the
    // two kinks, so split there and integrate the middle piece exactly
    // enough with Gauss-Legendre.
    const CES& c = aggregate.as<CES>();
    if (!(c.sigma > 1)) throw DomainError("not substitutes: CES with sigma < 1");
    MRSDistribution mu = ces_substitutes_linear_cdf(c.a[0], c.a[1], c.sigma);
    const double zmin = std::min(z0, z1), zmax = std::max(z0, z1);
    double upper = ev_at_zero * mu.cdf(zmin) + ev_at_inf * (1.0 - mu.cdf(zmax));
    if (zmax > zmin) {
      auto integrand = [&](double t) {
        const double F = mu.cdf(t);
        const double density = F * (1.0 - F) * (c.sigma - 1.0) / t;
        return ev_linear(t, z0, z1, ratio2) * density;
      };
      upper += integrate_gl(integrand, zmin, zmax, 48, 24);
    }
    out.upper = B * upper;
  } else {
    // Generic substitutes: quantile discretization of the unique MRS
    // decomposition (raises DomainError outside the domain).
    MRSDistribution mu = mrs_distribution_from_substitutes(aggregate, quad_nodes);
    double upper = mu.mass_zero * ev_at_zero + mu.mass_inf * ev_at_inf;
    for (std::size_t j = 0; j < mu.t.size(); ++j)
      upper += mu.w[j] * ev_linear(mu.t[j], z0, z1, ratio2);
    out.upper = B * upper;
  }

  // Witnesses: the aggregate itself attains the lower bound; a linear
  // population approaching the decomposition attains the upper one.
  Population lower_pop;
  lower_pop.agents.push_back({aggregate, B});
  out.lower_witness = std::move(lower_pop);
  MRSDistribution mu_w = mrs_distribution_from_substitutes(
      aggregate, std::min(quad_nodes, 128));
  Population upper_pop;
  if (mu_w.mass_inf > 1e-15)
    upper_pop.agents.push_back({Preference(Linear{{1.0, 0.0}}), B * mu_w.mass_inf});
  for (std::size_t j = 0; j < mu_w.t.size(); ++j)
    if (mu_w.w[j] > 1e-15)
      upper_pop.agents.push_back({Preference(Linear{{mu_w.t[j], 1.0}}), B * mu_w.w[j]});
  if (mu_w.mass_zero > 1e-15)
    upper_pop.agents.push_back({Preference(Linear{{0.0, 1.0}}), B * mu_w.mass_zero});
  if (!upper_pop.agents.empty()) out.upper_witness = std::move(upper_pop);
  return out;
}

SmallChangeRange small_change_range(const Preference& aggregate, double B,
                                    const Vec& p0, const Vec& dp,
                                    DecompositionDomain domain) {
  const int n = aggregate.dimension();
  check_prices(p0, n);
  if (static_cast<int>(dp.size()) != n)
    throw std::invalid_argument("dp has the wrong dimension");
  if (!(B > 0)) throw std::invalid_argument("total budget must be positive");

  SmallChangeRange out;
  Vec r(n);
  for (int i = 0; i < n; ++i) {
    r[i] = dp[i] / p0[i];
    if (std::abs(r[i]) > 0.10) out.large_change_warning = true;
  }

  // Endpoint weights of the extreme (all-linear / all-single-minded)
  // decomposition: the width is (B/2) times the variance of the relative
  // price change faced by a consumer drawn with these weights.
  Vec g;
  switch (domain) {
    case DecompositionDomain::kTwoGoodSubstitutes: {
      if (n != 2) throw DomainError("two-good substitutes domain needs n = 2");
      g = expenditure_shares(aggregate, p0).x;
      break;
    }
    case DecompositionDomain::kParametricCobbDouglas: {
      if (!aggregate.is<CobbDouglas>())
        throw DomainError("parametric domain requires a Cobb-Douglas aggregate");
      g = aggregate.as<CobbDouglas>().a;
      break;
    }
  }

  double mean = 0, second = 0;
  for (int i = 0; i < n; ++i) {
    mean += g[i] * r[i];
    second += g[i] * r[i] * r[i];
  }
  out.width = 0.5 * B * (second - mean * mean);
  return out;
}

}  // namespace homagg
