#pragma once
// Homothetic preference representations and the operations defined directly
// on them: expenditure evaluation, demand, expenditure shares, dual utility,
// construction from a two-good share table, and a metric on preferences.
//
// Every preference is represented through its expenditure function E(p), the
// minimal budget needed to reach utility level one at prices p.  Aggregation
// machinery elsewhere works on ln E, so the central entry point here is
// log_expenditure().  ln E is concave, nondecreasing and satisfies
// ln E(c*p) = ln c + ln E(p).

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace homagg {

using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Input lies outside the preference domain an operation requires
/// (e.g. a non-substitutes preference passed to a decomposition that only
/// exists for substitutes).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Preference families
// ---------------------------------------------------------------------------

/// Perfect substitutes, u(x) = <v,x>.  E(p) = min_{i: v_i>0} p_i/v_i; the
/// consumer spends the whole budget on a good with the best value-to-price
/// ratio.
struct Linear {
  Vec v;  // nonnegative, not identically zero
};

/// Perfect complements, u(x) = min_{i: v_i>0} x_i/v_i.  E(p) = <v,p>.
struct Leontief {
  Vec v;  // nonnegative, not identically zero
};

/// E(p) = prod_i p_i^{a_i} with a in the simplex; expenditure shares are
/// constant and equal to a.
struct CobbDouglas {
  Vec a;
};

/// Constant elasticity of substitution.
/// E(p) = (sum_i (p_i/a_i)^{1-sigma})^{1/(1-sigma)}, sigma > 0, sigma != 1,
/// a strictly positive in the simplex.  Substitutes for sigma > 1,
/// complements for sigma < 1.
struct CES {
  Vec a;
  double sigma;
};

/// Two-good perturbation of Cobb-Douglas.  With c = ln(p1/p2),
///   ln E = ln p1 + (1-alpha)^2/(2 beta)                     for c < -(1-alpha)/beta
///        = alpha ln p1 + (1-alpha) ln p2 - (beta/2) c^2     in between
///        = ln p2 + alpha^2/(2 beta)                         for c > alpha/beta
/// The outer constants make ln E continuous with share s1 = clamp(alpha - beta*c).
struct Translog {
  double alpha;  // in (0,1)
  double beta;   // > 0
};

/// E(p) = min_{c in C} <c,p>.  Upper contour sets have piecewise linear
/// boundary.  Every row must be nonzero and at least one row strictly
/// positive.
struct PiecewiseLinearE {
  std::vector<Vec> coeffs;
};

/// Two-good preference given by a nondecreasing nonnegative step table
/// Q with s1(z,1) = z/(z + Q(z)), z = p1/p2.  +infinity is allowed as a
/// table value.  Q is held constant outside the table range.
struct TwoGoodQ {
  Vec z;  // strictly increasing breakpoints
  Vec q;  // value on [z[k], z[k+1]); nondecreasing, >= 0
};

class Preference;

/// Weighted combination in log-expenditure space:
/// ln E = sum_j w_j ln E_j.  Aggregation of a population always produces
/// weights in the simplex; weights are only required to sum to one, which
/// leaves room for signed combinations used as counterexamples.
struct Mixture {
  Vec weights;
  std::vector<Preference> components;
};

class Preference {
 public:
  using Variant = std::variant<Linear, Leontief, CobbDouglas, CES, Translog,
                               PiecewiseLinearE, TwoGoodQ, Mixture>;

  Preference(Linear f);           // NOLINT: implicit by design
  Preference(Leontief f);         // NOLINT
  Preference(CobbDouglas f);      // NOLINT
  Preference(CES f);              // NOLINT
  Preference(Translog f);         // NOLINT
  Preference(PiecewiseLinearE f); // NOLINT
  Preference(TwoGoodQ f);         // NOLINT
  Preference(Mixture f);          // NOLINT

  int dimension() const { return n_; }
  const Variant& value() const { return v_; }

  template <class T>
  bool is() const { return std::holds_alternative<T>(v_); }
  template <class T>
  const T& as() const { return std::get<T>(v_); }

  bool operator==(const Preference& other) const;

 private:
  Variant v_;
  int n_ = 0;
};

/// One consumer: a preference and a positive budget.
struct Agent {
  Preference pref;
  double budget;
};

/// Finite population; the unit of aggregation and the market input.
struct Population {
  std::vector<Agent> agents;

  double total_budget() const;
  int dimension() const;
  void validate() const;  // nonempty, budgets > 0, matching dimensions
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// ln E(p) for strictly positive prices.
double log_expenditure(const Preference& pref, const Vec& p);

/// Demand or expenditure shares together with a uniqueness flag.  At kink
/// prices (tied value-to-price ratios and the like) demand is a set; the
/// returned bundle is the deterministic selection favoring the lowest good
/// index, `unique` is false and `tie` describes the tie.
struct DemandResult {
  Vec x;
  bool unique = true;
  std::string tie;
};

/// b * grad ln E(p), renormalized so that <p,x> = b holds exactly.
DemandResult demand(const Preference& pref, const Vec& p, double budget);

/// s_i = p_i D_i / b, the gradient of ln E in log prices.  Components sum
/// to one.
DemandResult expenditure_shares(const Preference& pref, const Vec& p);

/// Utility recovered from the expenditure function,
/// u(x) = inf_{p > 0} <p,x> / E(p).  Closed forms are used for the four
/// classical families; otherwise the infimum is computed numerically
/// (golden section for two goods, coordinate searches in log prices above).
/// The numeric path returns the best bound found.
double utility(const Preference& pref, const Vec& x);

/// Builds the unique two-good preference whose share table is the given Q:
/// ln E(z,1) = integral_1^z dw/(w + Q(w)), evaluated in closed form on the
/// step segments.
Preference preference_from_Q(TwoGoodQ table);

/// Metric on preferences:
///   d = sup over the open simplex of
///       |(lnE(p)-lnE(e)) - (lnE'(p)-lnE'(e))| / (1 + max_i |ln p_i|)^2
/// with e = (1,...,1).  The sup is attained in the interior; it is
/// approximated on a log-spaced grid (`grid` points, at least 100) with a
/// golden-section refinement around the grid argmax.  Always <= 2.
double preference_distance(const Preference& a, const Preference& b, int grid);

// Validation helpers shared by the ops (throw std::invalid_argument).
void check_prices(const Vec& p, int n);
void check_bundle(const Vec& x, int n);

}  // namespace homagg
