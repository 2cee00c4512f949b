#include "homagg/prefcore.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "homagg/numerics.hpp"

namespace homagg {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

bool has_positive(const Vec& v) {
  return std::any_of(v.begin(), v.end(), [](double x) { return x > 0; });
}

bool all_nonnegative(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0; });
}

double vsum(const Vec& v) {
  double s = 0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

void check_prices(const Vec& p, int n) {
  require(static_cast<int>(p.size()) == n, "price vector has the wrong dimension");
  for (double pi : p)
    require(pi > 0 && std::isfinite(pi), "prices must be strictly positive");
}

void check_bundle(const Vec& x, int n) {
  require(static_cast<int>(x.size()) == n, "bundle has the wrong dimension");
  for (double xi : x)
    require(xi >= 0 && std::isfinite(xi), "bundle components must be nonnegative");
}

// ---------------------------------------------------------------------------
// Construction and validation
// ---------------------------------------------------------------------------

Preference::Preference(Linear f) : v_(std::move(f)), n_(0) {
  const Linear& l = std::get<Linear>(v_);
  require(!l.v.empty(), "linear: empty value vector");
  require(all_nonnegative(l.v), "linear: values must be nonnegative");
  require(has_positive(l.v), "linear: value vector is identically zero");
  n_ = static_cast<int>(l.v.size());
}

Preference::Preference(Leontief f) : v_(std::move(f)), n_(0) {
  const Leontief& l = std::get<Leontief>(v_);
  require(!l.v.empty(), "leontief: empty value vector");
  require(all_nonnegative(l.v), "leontief: values must be nonnegative");
  require(has_positive(l.v), "leontief: value vector is identically zero");
  n_ = static_cast<int>(l.v.size());
}

Preference::Preference(CobbDouglas f) : v_(std::move(f)), n_(0) {
  const CobbDouglas& c = std::get<CobbDouglas>(v_);
  require(!c.a.empty(), "cobb_douglas: empty exponent vector");
  require(all_nonnegative(c.a), "cobb_douglas: exponents must be nonnegative");
  require(std::abs(vsum(c.a) - 1.0) <= 1e-9, "cobb_douglas: exponents must sum to one");
  n_ = static_cast<int>(c.a.size());
}

Preference::Preference(CES f) : v_(std::move(f)), n_(0) {
  const CES& c = std::get<CES>(v_);
  require(!c.a.empty(), "ces: empty weight vector");
  for (double ai : c.a) require(ai > 0, "ces: weights must be strictly positive");
  require(std::abs(vsum(c.a) - 1.0) <= 1e-6, "ces: weights must sum to one");
  require(c.sigma > 0, "ces: sigma must be positive");
  require(std::abs(c.sigma - 1.0) > 1e-9, "ces: sigma too close to one (use cobb_douglas)");
  n_ = static_cast<int>(c.a.size());
}

Preference::Preference(Translog f) : v_(std::move(f)), n_(2) {
  const Translog& t = std::get<Translog>(v_);
  require(t.alpha > 0 && t.alpha < 1, "translog: alpha must lie in (0,1)");
  require(t.beta > 0, "translog: beta must be positive");
}

Preference::Preference(PiecewiseLinearE f) : v_(std::move(f)), n_(0) {
  const PiecewiseLinearE& w = std::get<PiecewiseLinearE>(v_);
  require(!w.coeffs.empty(), "pwl: empty coefficient set");
  n_ = static_cast<int>(w.coeffs[0].size());
  require(n_ >= 1, "pwl: empty coefficient row");
  bool strictly_positive_row = false;
  for (const Vec& row : w.coeffs) {
    require(static_cast<int>(row.size()) == n_, "pwl: ragged coefficient rows");
    require(all_nonnegative(row), "pwl: coefficients must be nonnegative");
    require(has_positive(row), "pwl: zero coefficient row");
    strictly_positive_row |=
        std::all_of(row.begin(), row.end(), [](double c) { return c > 0; });
  }
  require(strictly_positive_row, "pwl: need at least one strictly positive row");
}

Preference::Preference(TwoGoodQ f) : v_(std::move(f)), n_(2) {
  const TwoGoodQ& t = std::get<TwoGoodQ>(v_);
  require(!t.z.empty() && t.z.size() == t.q.size(), "two_good_q: table shape mismatch");
  for (std::size_t k = 0; k < t.z.size(); ++k) {
    require(t.z[k] > 0 && std::isfinite(t.z[k]), "two_good_q: breakpoints must be positive");
    require(t.q[k] >= 0, "two_good_q: Q must be nonnegative");
    if (k) {
      require(t.z[k] > t.z[k - 1], "two_good_q: breakpoints must be increasing");
      require(t.q[k] >= t.q[k - 1], "two_good_q: Q must be nondecreasing");
    }
  }
}

Preference::Preference(Mixture f) : v_(std::move(f)), n_(0) {
  const Mixture& m = std::get<Mixture>(v_);
  require(!m.components.empty(), "mixture: no components");
  require(m.weights.size() == m.components.size(), "mixture: weight/component mismatch");
  n_ = m.components[0].dimension();
  for (const Preference& c : m.components)
    require(c.dimension() == n_, "mixture: components disagree on dimension");
  require(std::abs(vsum(m.weights) - 1.0) <= 1e-12, "mixture: weights must sum to one");
}

bool Preference::operator==(const Preference& other) const {
  if (n_ != other.n_ || v_.index() != other.v_.index()) return false;
  return std::visit(
      [&](const auto& a) -> bool {
        using T = std::decay_t<decltype(a)>;
        const T& b = std::get<T>(other.v_);
        if constexpr (std::is_same_v<T, Linear> || std::is_same_v<T, Leontief>) {
          return a.v == b.v;
        } else if constexpr (std::is_same_v<T, CobbDouglas>) {
          return a.a == b.a;
        } else if constexpr (std::is_same_v<T, CES>) {
          return a.a == b.a && a.sigma == b.sigma;
        } else if constexpr (std::is_same_v<T, Translog>) {
          return a.alpha == b.alpha && a.beta == b.beta;
        } else if constexpr (std::is_same_v<T, PiecewiseLinearE>) {
          return a.coeffs == b.coeffs;
        } else if constexpr (std::is_same_v<T, TwoGoodQ>) {
          return a.z == b.z && a.q == b.q;
        } else {
          return a.weights == b.weights && a.components == b.components;
        }
      },
      v_);
}

double Population::total_budget() const {
  double b = 0;
  for (const Agent& a : agents) b += a.budget;
  return b;
}

int Population::dimension() const {
  require(!agents.empty(), "population: no agents");
  return agents[0].pref.dimension();
}

void Population::validate() const {
  require(!agents.empty(), "population: no agents");
  const int n = agents[0].pref.dimension();
  for (const Agent& a : agents) {
    require(a.budget > 0 && std::isfinite(a.budget), "population: budgets must be positive");
    require(a.pref.dimension() == n, "population: agents disagree on dimension");
  }
}

// ---------------------------------------------------------------------------
// The two-good share table
// ---------------------------------------------------------------------------

namespace {

// Step value of Q at z.  The table value applies on [z_k, z_{k+1}) and is
// held constant outside the table range.  When z hits a breakpoint where the
// value jumps, the left limit is reported (it favors good 1, matching the
// lowest-index tie rule) and *at_jump is set.
double table_value(const TwoGoodQ& t, double z, bool* at_jump) {
  if (at_jump) *at_jump = false;
  const auto it = std::upper_bound(t.z.begin(), t.z.end(), z);
  const int k = static_cast<int>(it - t.z.begin()) - 1;  // z in [z_k, z_{k+1})
  if (k < 0) return t.q.front();
  if (z == t.z[k] && k > 0 && t.q[k] != t.q[k - 1]) {
    if (at_jump) *at_jump = true;
    return t.q[k - 1];
  }
  return t.q[k];
}

// Integral over [w0, w1] of dw/(w + c).
double segment_integral(double w0, double w1, double c) {
  if (std::isinf(c)) return 0.0;
  return std::log((w1 + c) / (w0 + c));
}

// ln pi(z) = integral_1^z dw/(w + Q(w)) with Q stepwise from the table.
// Each segment's value is sampled at its midpoint, which never lands on a
// breakpoint.
double log_pi(const TwoGoodQ& t, double z) {
  double a = 1.0, b = z, sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  double total = 0.0, w0 = a;
  for (std::size_t k = 0; k < t.z.size() && w0 < b; ++k) {
    if (t.z[k] <= w0) continue;
    const double w1 = std::min(t.z[k], b);
    total += segment_integral(w0, w1, table_value(t, 0.5 * (w0 + w1), nullptr));
    w0 = w1;
  }
  if (w0 < b) total += segment_integral(w0, b, table_value(t, 0.5 * (w0 + b), nullptr));
  return sign * total;
}

// ---------------------------------------------------------------------------
// log expenditure
// ---------------------------------------------------------------------------

struct LogExpenditureVisitor {
  const Vec& p;

  double operator()(const Linear& f) const {
    double best = kInf;
    for (std::size_t i = 0; i < f.v.size(); ++i)
      if (f.v[i] > 0) best = std::min(best, std::log(p[i]) - std::log(f.v[i]));
    return best;
  }
  double operator()(const Leontief& f) const { return std::log(dot(f.v, p)); }
  double operator()(const CobbDouglas& f) const {
    double s = 0;
    for (std::size_t i = 0; i < f.a.size(); ++i)
      if (f.a[i] != 0) s += f.a[i] * std::log(p[i]);
    return s;
  }
  double operator()(const CES& f) const {
    Vec t(f.a.size());
    for (std::size_t i = 0; i < f.a.size(); ++i)
      t[i] = (1.0 - f.sigma) * (std::log(p[i]) - std::log(f.a[i]));
    return log_sum_exp(t) / (1.0 - f.sigma);
  }
  double operator()(const Translog& f) const {
    const double c = std::log(p[0]) - std::log(p[1]);
    const double c_lo = -(1.0 - f.alpha) / f.beta;
    const double c_hi = f.alpha / f.beta;
    if (c < c_lo)
      return std::log(p[0]) + (1.0 - f.alpha) * (1.0 - f.alpha) / (2.0 * f.beta);
    if (c > c_hi) return std::log(p[1]) + f.alpha * f.alpha / (2.0 * f.beta);
    return f.alpha * std::log(p[0]) + (1.0 - f.alpha) * std::log(p[1]) -
           0.5 * f.beta * c * c;
  }
  double operator()(const PiecewiseLinearE& f) const {
    double best = kInf;
    for (const Vec& row : f.coeffs) best = std::min(best, dot(row, p));
    return std::log(best);
  }
  double operator()(const TwoGoodQ& f) const {
    return std::log(p[1]) + log_pi(f, p[0] / p[1]);
  }
  double operator()(const Mixture& f) const {
    double s = 0;
    for (std::size_t j = 0; j < f.components.size(); ++j)
      s += f.weights[j] * log_expenditure(f.components[j], p);
    return s;
  }
};

// ---------------------------------------------------------------------------
// Expenditure shares (the core primitive; demand is b * s_i / p_i)
// ---------------------------------------------------------------------------

struct ShareResult {
  Vec s;
  bool unique = true;
  std::string tie;
};

ShareResult shares_impl(const Preference& pref, const Vec& p);

struct SharesVisitor {
  const Vec& p;

  ShareResult operator()(const Linear& f) const {
    // All budget goes to the best value-to-price ratio; ties are flagged and
    // resolved in favor of the lowest good index.
    const int n = static_cast<int>(f.v.size());
    Vec r(n, -kInf);
    double best = -kInf;
    for (int i = 0; i < n; ++i)
      if (f.v[i] > 0) {
        r[i] = std::log(f.v[i]) - std::log(p[i]);
        best = std::max(best, r[i]);
      }
    std::vector<int> tied;
    for (int i = 0; i < n; ++i)
      if (r[i] >= best - 1e-12) tied.push_back(i);
    ShareResult out;
    out.s.assign(n, 0.0);
    out.s[tied.front()] = 1.0;
    if (tied.size() > 1) {
      out.unique = false;
      std::ostringstream oss;
      oss << "tied value-to-price ratio on goods";
      for (int i : tied) oss << ' ' << i;
      out.tie = oss.str();
    }
    return out;
  }
  ShareResult operator()(const Leontief& f) const {
    const double e = dot(f.v, p);
    ShareResult out;
    out.s.resize(f.v.size());
    for (std::size_t i = 0; i < f.v.size(); ++i) out.s[i] = f.v[i] * p[i] / e;
    return out;
  }
  ShareResult operator()(const CobbDouglas& f) const { return {f.a, true, {}}; }
  ShareResult operator()(const CES& f) const {
    Vec t(f.a.size());
    for (std::size_t i = 0; i < f.a.size(); ++i)
      t[i] = (1.0 - f.sigma) * (std::log(p[i]) - std::log(f.a[i]));
    return {softmax(t), true, {}};
  }
  ShareResult operator()(const Translog& f) const {
    const double c = std::log(p[0]) - std::log(p[1]);
    const double s1 = std::clamp(f.alpha - f.beta * c, 0.0, 1.0);
    return {{s1, 1.0 - s1}, true, {}};
  }
  ShareResult operator()(const PiecewiseLinearE& f) const {
    // Active rows of the min share the budget; deterministic selection is
    // the lexicographically smallest active coefficient vector.
    double e = kInf;
    for (const Vec& row : f.coeffs) e = std::min(e, dot(row, p));
    std::vector<const Vec*> active;
    for (const Vec& row : f.coeffs)
      if (dot(row, p) <= e * (1.0 + 1e-12)) active.push_back(&row);
    const Vec* chosen = active.front();
    for (const Vec* row : active)
      if (std::lexicographical_compare(row->begin(), row->end(),
                                       chosen->begin(), chosen->end()))
        chosen = row;
    ShareResult out;
    out.s.resize(chosen->size());
    const double val = dot(*chosen, p);
    for (std::size_t i = 0; i < chosen->size(); ++i)
      out.s[i] = (*chosen)[i] * p[i] / val;
    if (active.size() > 1) {
      out.unique = false;
      out.tie = "multiple active expenditure facets";
    }
    return out;
  }
  ShareResult operator()(const TwoGoodQ& f) const {
    const double z = p[0] / p[1];
    bool at_jump = false;
    const double qv = table_value(f, z, &at_jump);
    const double s1 = std::isinf(qv) ? 0.0 : z / (z + qv);
    ShareResult out{{s1, 1.0 - s1}, true, {}};
    if (at_jump) {
      out.unique = false;
      out.tie = "price ratio at a table jump";
    }
    return out;
  }
  ShareResult operator()(const Mixture& f) const {
    ShareResult out;
    out.s.assign(f.components.empty() ? 0 : f.components[0].dimension(), 0.0);
    for (std::size_t j = 0; j < f.components.size(); ++j) {
      ShareResult part = shares_impl(f.components[j], p);
      for (std::size_t i = 0; i < out.s.size(); ++i)
        out.s[i] += f.weights[j] * part.s[i];
      if (!part.unique) {
        out.unique = false;
        if (!out.tie.empty()) out.tie += "; ";
        out.tie += part.tie;
      }
    }
    return out;
  }
};

ShareResult shares_impl(const Preference& pref, const Vec& p) {
  return std::visit(SharesVisitor{p}, pref.value());
}

}  // namespace

double log_expenditure(const Preference& pref, const Vec& p) {
  check_prices(p, pref.dimension());
  return std::visit(LogExpenditureVisitor{p}, pref.value());
}

DemandResult expenditure_shares(const Preference& pref, const Vec& p) {
  check_prices(p, pref.dimension());
  ShareResult r = shares_impl(pref, p);
  // Enforce the simplex identity exactly; the analytic forms are already
  // normalized up to rounding.
  double s = 0;
  for (double v : r.s) s += v;
  for (double& v : r.s) v /= s;
  return {std::move(r.s), r.unique, std::move(r.tie)};
}

DemandResult demand(const Preference& pref, const Vec& p, double budget) {
  if (!(budget > 0) || !std::isfinite(budget))
    throw std::invalid_argument("demand: budget must be positive");
  DemandResult r = expenditure_shares(pref, p);
  for (std::size_t i = 0; i < r.x.size(); ++i) r.x[i] = budget * r.x[i] / p[i];
  return r;
}

// ---------------------------------------------------------------------------
// Dual utility
// ---------------------------------------------------------------------------

namespace {

// ln <p,x> - ln E(p) evaluated at p = exp(q).
double dual_gap(const Preference& pref, const Vec& x, const Vec& q) {
  Vec p(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) p[i] = std::exp(q[i]);
  double px = 0;
  for (std::size_t i = 0; i < q.size(); ++i) px += p[i] * x[i];
  return std::log(px) - std::visit(LogExpenditureVisitor{p}, pref.value());
}

// inf over positive prices of <p,x>/E(p).  Quasi-convex in p; the scale
// direction is flat, so the search runs in the n-1 log price ratios
// q_i - q_n.  One golden-section search settles two goods; above that a
// Nelder-Mead descent (restarted from a few structured points) handles the
// kinks that defeat coordinate-wise searches, followed by a coordinate
// polish.
double dual_utility_numeric(const Preference& pref, const Vec& x) {
  const int n = pref.dimension();
  if (n == 2) {
    auto f = [&](double t) { return dual_gap(pref, x, {0.5 * t, -0.5 * t}); };
    const double t = golden_min(f, -50.0, 50.0, 220);
    return std::exp(f(t));
  }

  const int dims = n - 1;
  auto eval = [&](const Vec& r) {
    Vec q(n, 0.0);
    for (int i = 0; i < dims; ++i) q[i] = r[i];
    return dual_gap(pref, x, q);
  };

  auto nelder_mead = [&](Vec start, double scale) {
    std::vector<Vec> simplex(dims + 1, start);
    std::vector<double> f(dims + 1);
    for (int i = 0; i < dims; ++i) simplex[i + 1][i] += scale;
    for (int i = 0; i <= dims; ++i) f[i] = eval(simplex[i]);
    for (int iter = 0; iter < 600; ++iter) {
      int hi = 0, lo = 0;
      for (int i = 1; i <= dims; ++i) {
        if (f[i] > f[hi]) hi = i;
        if (f[i] < f[lo]) lo = i;
      }
      if (f[hi] - f[lo] < 1e-14 * (1.0 + std::abs(f[lo]))) break;
      Vec centroid(dims, 0.0);
      for (int i = 0; i <= dims; ++i)
        if (i != hi)
          for (int d = 0; d < dims; ++d) centroid[d] += simplex[i][d] / dims;
      auto blend = [&](double t) {
        Vec r(dims);
        for (int d = 0; d < dims; ++d)
          r[d] = centroid[d] + t * (simplex[hi][d] - centroid[d]);
        return r;
      };
      const Vec reflect = blend(-1.0);
      const double fr = eval(reflect);
      if (fr < f[lo]) {
        const Vec expand = blend(-2.0);
        const double fe = eval(expand);
        simplex[hi] = fe < fr ? expand : reflect;
        f[hi] = std::min(fe, fr);
      } else if (fr < f[hi]) {
        simplex[hi] = reflect;
        f[hi] = fr;
      } else {
        const Vec contract = blend(0.5);
        const double fc = eval(contract);
        if (fc < f[hi]) {
          simplex[hi] = contract;
          f[hi] = fc;
        } else {
          for (int i = 0; i <= dims; ++i) {
            if (i == lo) continue;
            for (int d = 0; d < dims; ++d)
              simplex[i][d] = 0.5 * (simplex[i][d] + simplex[lo][d]);
            f[i] = eval(simplex[i]);
          }
        }
      }
    }
    int lo = 0;
    for (int i = 1; i <= dims; ++i)
      if (f[i] < f[lo]) lo = i;
    return std::make_pair(simplex[lo], f[lo]);
  };

  Vec best(dims, 0.0);
  double cur = eval(best);
  // Restarts: the origin at two scales plus single-ratio extremes; kinky
  // objectives often hide the optimum in a far corner of one ratio.
  std::vector<std::pair<Vec, double>> starts = {{Vec(dims, 0.0), 2.0},
                                                {Vec(dims, 0.0), 8.0}};
  for (int d = 0; d < dims; ++d) {
    Vec r(dims, 0.0);
    r[d] = 5.0;
    starts.push_back({r, 3.0});
    r[d] = -5.0;
    starts.push_back({r, 3.0});
  }
  for (const auto& [start, scale] : starts) {
    const auto [r, fr] = nelder_mead(start, scale);
    if (fr < cur) {
      cur = fr;
      best = r;
    }
  }
  // Coordinate polish.
  for (int cycle = 0; cycle < 30; ++cycle) {
    const double before = cur;
    for (int d = 0; d < dims; ++d) {
      auto along = [&](double v) {
        Vec r = best;
        r[d] = v;
        return eval(r);
      };
      const double v = golden_min(along, best[d] - 30.0, best[d] + 30.0, 180);
      if (along(v) < cur) {
        best[d] = v;
        cur = along(v);
      }
    }
    if (before - cur < 1e-14) break;
  }
  return std::exp(cur);
}

struct UtilityVisitor {
  const Preference& pref;
  const Vec& x;

  double operator()(const Linear& f) const { return dot(f.v, x); }
  double operator()(const Leontief& f) const {
    double u = kInf;
    for (std::size_t i = 0; i < f.v.size(); ++i)
      if (f.v[i] > 0) u = std::min(u, x[i] / f.v[i]);
    return u;
  }
  double operator()(const CobbDouglas& f) const {
    // Exact dual of E = prod p_i^{a_i} is u = prod (x_i/a_i)^{a_i}.
    double s = 0;
    for (std::size_t i = 0; i < f.a.size(); ++i) {
      if (f.a[i] == 0) continue;
      if (x[i] == 0) return 0.0;
      s += f.a[i] * (std::log(x[i]) - std::log(f.a[i]));
    }
    return std::exp(s);
  }
  double operator()(const CES& f) const {
    const double r = (f.sigma - 1.0) / f.sigma;
    Vec t;
    t.reserve(f.a.size());
    for (std::size_t i = 0; i < f.a.size(); ++i) {
      if (x[i] == 0) {
        if (r < 0) return 0.0;  // complements need every good
        continue;
      }
      t.push_back(r * std::log(f.a[i] * x[i]));
    }
    if (t.empty()) return 0.0;
    return std::exp(log_sum_exp(t) / r);
  }
  double operator()(const Translog&) const { return dual_utility_numeric(pref, x); }
  double operator()(const PiecewiseLinearE&) const { return dual_utility_numeric(pref, x); }
  double operator()(const TwoGoodQ&) const { return dual_utility_numeric(pref, x); }
  double operator()(const Mixture&) const { return dual_utility_numeric(pref, x); }
};

}  // namespace

double utility(const Preference& pref, const Vec& x) {
  check_bundle(x, pref.dimension());
  if (!has_positive(x)) throw std::invalid_argument("utility: bundle is identically zero");
  return std::visit(UtilityVisitor{pref, x}, pref.value());
}

Preference preference_from_Q(TwoGoodQ table) {
  return Preference(std::move(table));  // the constructor validates the table
}

// ---------------------------------------------------------------------------
// Distance
// ---------------------------------------------------------------------------

namespace {

// Objective of the sup defining the metric, evaluated at the simplex point
// with log-ratio coordinates tau (tau has n-1 entries, last coordinate 0).
double distance_objective(const Preference& a, const Preference& b,
                          double ref_a, double ref_b, const Vec& tau) {
  const int n = a.dimension();
  Vec p(n);
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    p[i] = std::exp(i < n - 1 ? tau[i] : 0.0);
    sum += p[i];
  }
  double max_abs_log = 0;
  for (int i = 0; i < n; ++i) {
    p[i] /= sum;
    max_abs_log = std::max(max_abs_log, std::abs(std::log(p[i])));
  }
  const double da = std::visit(LogExpenditureVisitor{p}, a.value()) - ref_a;
  const double db = std::visit(LogExpenditureVisitor{p}, b.value()) - ref_b;
  const double denom = 1.0 + max_abs_log;
  return std::abs(da - db) / (denom * denom);
}

}  // namespace

double preference_distance(const Preference& a, const Preference& b, int grid) {
  require(a.dimension() == b.dimension(), "distance: dimension mismatch");
  require(grid >= 100, "distance: grid must be at least 100");
  const int n = a.dimension();
  const Vec ones(n, 1.0);
  const double ref_a = std::visit(LogExpenditureVisitor{ones}, a.value());
  const double ref_b = std::visit(LogExpenditureVisitor{ones}, b.value());

  if (n == 1) return 0.0;  // a single good admits one preference only

  const double span = 30.0;
  if (n == 2) {
    double best = 0, best_t = 0;
    for (int j = 0; j < grid; ++j) {
      const double t = -span + 2.0 * span * j / (grid - 1);
      const double val = distance_objective(a, b, ref_a, ref_b, {t});
      if (val > best) {
        best = val;
        best_t = t;
      }
    }
    // Golden refinement around the grid argmax.
    const double step = 2.0 * span / (grid - 1);
    auto neg = [&](double t) {
      return -distance_objective(a, b, ref_a, ref_b, {t});
    };
    const double t = golden_min(neg, best_t - step, best_t + step, 160);
    return std::max(best, -neg(t));
  }

  // n >= 3: per-axis grid in log-ratio space with local pattern refinement.
  const int per_axis =
      std::max(5, static_cast<int>(std::round(std::pow(grid, 1.0 / (n - 1)))));
  Vec tau(n - 1, 0.0), best_tau(n - 1, 0.0);
  double best = 0;
  std::vector<int> idx(n - 1, 0);
  while (true) {
    for (int d = 0; d < n - 1; ++d)
      tau[d] = -span + 2.0 * span * idx[d] / (per_axis - 1);
    const double val = distance_objective(a, b, ref_a, ref_b, tau);
    if (val > best) {
      best = val;
      best_tau = tau;
    }
    int d = 0;
    while (d < n - 1 && ++idx[d] == per_axis) idx[d++] = 0;
    if (d == n - 1) break;
  }
  double radius = 2.0 * span / (per_axis - 1);
  for (int round = 0; round < 24; ++round) {
    bool improved = false;
    for (int d = 0; d < n - 1; ++d)
      for (double sgn : {-1.0, 1.0}) {
        Vec cand = best_tau;
        cand[d] += sgn * radius;
        const double val = distance_objective(a, b, ref_a, ref_b, cand);
        if (val > best) {
          best = val;
          best_tau = cand;
          improved = true;
        }
      }
    if (!improved) radius *= 0.5;
    if (radius < 1e-10) break;
  }
  return best;
}

}  // namespace homagg
