#pragma once
// Population aggregation and its cross-checks.  A population of homothetic
// consumers behaves like a single aggregate consumer whose log expenditure
// is the budget-weighted average of the individual ones.  This module also
// evaluates continuous (measure-weighted) aggregation by quadrature, samples
// upper contour sets of the aggregate, and provides the Nash-social-welfare
// primal as an independent oracle for the aggregation identity.

#include "homagg/prefcore.hpp"

namespace homagg {

/// Aggregate preference of a population: a Mixture with weights b_k / B.
/// When every member is Cobb-Douglas (counting unit single-minded linear
/// preferences, whose log expenditure is ln p_i, as Cobb-Douglas vertices)
/// the result collapses exactly to CobbDouglas with a = sum beta_k a_k.
/// No other family collapses; their closed forms are not aggregation
/// invariant.
Preference aggregate_population(const Population& pop);

/// Parametric families a quadrature measure can mix over.
enum class MixtureFamily {
  kLinearMrs,      // param t >= 0: linear v = (t, 1), ln E = ln min(p1/t, p2)
  kLeontiefRatio,  // param z >= 0: Leontief v = (1, z), ln E = ln(p1 + z p2)
  kTranslogLogMrs  // param tau: linear v = (e^{tau/2}, e^{-tau/2})
};

/// Discretization of a probability measure over one parametric family:
/// nodes (params) with weights in the simplex.
struct QuadratureMeasure {
  MixtureFamily family;
  Vec params;
  Vec weights;

  void validate() const;
};

/// Quadrature value of integral ln E_theta(p) dmu(theta):
/// sum_j w_j ln E_{theta_j}(p).
double aggregate_continuous(const QuadratureMeasure& measure, const Vec& p);

/// One sampled boundary point of the upper contour set {u >= level} along a
/// ray through the positive orthant.  `bounded` is false when the contour
/// never crosses the ray (u vanishes on it), in which case x is empty.
struct ContourSample {
  double angle;    // primary ray angle; rays also carried explicitly
  Vec direction;
  Vec x;
  bool bounded;
};

/// Boundary samples of {u >= level} for n = 2 or 3, at least 8 directions.
/// Points satisfy |u(x) - level| below the dual-utility solver tolerance.
std::vector<ContourSample> contour_sample(const Preference& pref,
                                          double level, int directions);

struct EisenbergGaleResult {
  double value = 0;                   // max of prod (u_k(x_k)/beta_k)^{beta_k}
  std::vector<Vec> allocation;        // per-agent bundles, sum to x
  bool converged = true;
  double last_improvement = 0;        // objective change in the final sweep
};

/// Independent oracle: maximizes the budget-weighted Nash social welfare
/// prod_k (u_k(x_k)/beta_k)^{beta_k} over splits sum_k x_k = x by projected
/// gradient over per-good allocation shares, followed by pairwise
/// golden-section transfers.  Oracle scale only (m <= 6, n <= 4); supports
/// the families with closed-form utilities (linear, Leontief, Cobb-Douglas,
/// CES).  The optimum equals utility(aggregate_population(pop), x).
EisenbergGaleResult eisenberg_gale_primal(const Population& pop, const Vec& x);

}  // namespace homagg
