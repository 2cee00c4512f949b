#pragma once
// Money-metric welfare changes for a price move p0 -> p1 and robust ranges
// of population welfare compatible with an observed aggregate preference.
//
// As functionals of ln E, the equivalent variation is convex and the
// compensating variation concave, so the range of population welfare over
// all decompositions of an aggregate is given by convexification and
// concavification; the area variation is affine and therefore pinned down
// by aggregate behavior alone.

#include <functional>
#include <optional>

#include "homagg/prefcore.hpp"

namespace homagg {

enum class WelfareKind { kEV, kCV, kAV };

struct PriceChange {
  Vec p0;
  Vec p1;
};

/// EV = b (E(p0)/E(p1) - 1), CV = b (1 - E(p1)/E(p0)),
/// AV = b (ln E(p0) - ln E(p1)).  The AV sign is chosen so that
/// CV <= AV <= EV holds for every preference and price change.
double welfare_measure(WelfareKind kind, const Preference& pref, double budget,
                       const PriceChange& change);

/// Sum of individual welfare changes over the population.
double population_welfare(const Population& pop, WelfareKind kind,
                          const PriceChange& change);

struct WelfareRange {
  double lower = 0;
  double upper = 0;
  // Two-agent populations attaining (or approaching) the bounds, when the
  // parametric family can materialize preferences.
  std::optional<Population> lower_witness;
  std::optional<Population> upper_witness;
};

/// One-dimensional parametric family whose log expenditures are affine in
/// the parameter (Cobb-Douglas alpha over two goods is the canonical case).
/// `make` materializes a preference from a parameter value and may be null;
/// when present it is also used to verify affineness.
struct ParametricFamily {
  double lo = 0;
  double hi = 1;
  std::function<Preference(double)> make;
};

/// Range of W = sum_k b_k w(pref_k) over all decompositions of the family
/// member at aggregate_param with total budget B:
///   [B vex[w](param), B cav[w](param)],
/// computed from monotone-chain hulls of w on a grid (the aggregate
/// parameter is inserted as a grid point so bounds at grid values are
/// exact).  Witnesses are the two-point populations supporting the hull
/// segments.
WelfareRange robust_range_parametric(const std::function<double(double)>& w,
                                     const ParametricFamily& family,
                                     double aggregate_param, double B,
                                     int grid = 10000);

/// Robust EV range for a two-good substitutes aggregate.  The lower bound
/// is EV of the aggregate itself (the representative-agent value is the most
/// pessimistic one); the upper bound integrates the linear-consumer EV
///   EV_lin(t) = (p2_0/p2_1) * min(p1_0/p2_0, t) / min(p1_1/p2_1, t) - 1
/// against the unique MRS decomposition of the aggregate.  CES aggregates
/// use the closed-form CDF split at the two kinks of EV_lin; other
/// aggregates use a quantile discretization with quad_nodes atoms.
WelfareRange robust_range_substitutes_ev(const Preference& aggregate, double B,
                                         const PriceChange& change,
                                         int quad_nodes = 4096);

enum class DecompositionDomain {
  kTwoGoodSubstitutes,
  kParametricCobbDouglas,
};

struct SmallChangeRange {
  double width = 0;
  bool large_change_warning = false;  // |dp|/p exceeded 10%
};

/// Second-order width of the robust EV/CV range for a small price change:
///   (B/2) * max Var of <dp, D(p0, 1)> over decompositions
/// = (B/2) (sum_i g_i r_i^2 - (sum_i g_i r_i)^2),  r_i = dp_i / p0_i,
/// where g are the endpoint weights of the extreme decomposition: the
/// aggregate shares s(p0) for two-good substitutes, or the Cobb-Douglas
/// exponents for the parametric domain.  Proportional changes dp = c p0
/// give width zero.
SmallChangeRange small_change_range(const Preference& aggregate, double B,
                                    const Vec& p0, const Vec& dp,
                                    DecompositionDomain domain);

}  // namespace homagg
