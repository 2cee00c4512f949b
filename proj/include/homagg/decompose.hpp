#pragma once
// Inverse aggregation: reconstruct populations of elementary (linear or
// Leontief) consumers from an aggregate preference, plus the membership
// checks for the two completions and the discrete-choice bridge.
//
// For two substitutable goods the reconstruction is unique: the cumulative
// distribution function of the marginal rate of substitution MRS = v1/v2
// over the population equals 1 - s1(.,1).  For two complements, membership
// in the Leontief completion is equivalent to D1((lambda,1),1) being a
// Stieltjes transform of the distribution of v2/v1.

#include <complex>
#include <functional>
#include <random>

#include "homagg/prefcore.hpp"

namespace homagg {

/// Discrete (or closed-form) distribution of the marginal rate of
/// substitution of a population of two-good linear consumers.  Interior
/// atoms (t_j, w_j) are sorted by t; mass_zero and mass_inf sit on the
/// single-minded endpoints v=(0,1) and v=(1,0).
struct MRSDistribution {
  Vec t;
  Vec w;
  double mass_zero = 0.0;
  double mass_inf = 0.0;
  // Optional analytic CDF mu([0, t)); set for closed-form families.
  std::function<double(double)> cdf_closed;

  double total_mass() const;
  /// mu([0, t)): analytic when available, otherwise the atom sum.
  double cdf(double t) const;
  void validate() const;
};

/// Unique decomposition of a two-good substitutes preference into linear
/// consumers.  CDF(t) = 1 - s1(t,1) is sampled at `grid` quantile-spaced
/// atoms; the endpoint masses are 1 - lim_{z->0+} s1(z,1) at MRS = 0 and
/// lim_{z->inf} s1(z,1) at MRS = inf.  Monotonicity of s1 is checked on a
/// log grid; violations raise DomainError("not substitutes").
MRSDistribution mrs_distribution_from_substitutes(const Preference& pref,
                                                  int grid);

/// Population of at most ceil(1/eps)+1 linear agents whose aggregate shares
/// differ from the preference's by at most eps at every price ratio
/// (verified on a dense grid).  Budgets are proportional to the CDF jump
/// magnitudes and sum to total_budget.  Exact when the preference already
/// is a finite mixture of linear consumers with few enough atoms.
Population linear_population_approximation(const Preference& pref, double eps,
                                           double total_budget = 1.0);

/// Closed-form MRS distribution decomposing a two-good CES preference with
/// sigma > 1 into linear consumers:
///   mu([0,t)) = (a2 t)^{sigma-1} / (a1^{sigma-1} + (a2 t)^{sigma-1}).
/// When nodes > 0 the distribution also carries that many quantile-spaced
/// atoms.
MRSDistribution ces_substitutes_linear_cdf(double a1, double a2, double sigma,
                                           int nodes = 0);

/// Distribution of the Leontief value ratio z = v2/v1 with a density and a
/// fixed quadrature rule (composite Gauss-Legendre on the log axis, which
/// handles the algebraic tails).  Point masses may be given instead of a
/// density.
struct RatioDensity {
  std::function<double(double)> phi;            // density on (0, inf)
  std::vector<std::pair<double, double>> atoms; // alternative: point masses
  double A = std::numeric_limits<double>::quiet_NaN();      // set for the
  double sigma = std::numeric_limits<double>::quiet_NaN();  // CES family
  double y_lo = -60.0, y_hi = 60.0;  // integration range in y = ln z
  int panels = 64;
  int nodes = 24;

  /// integral f(z) dnu(z) over (0, inf).
  double integrate(const std::function<double(double)>& f) const;
  double mass() const;
};

/// Density of the unique Leontief decomposition of a two-good CES
/// preference with complements (0 < sigma < 1):
///   phi(z) = sin(pi sigma) / (pi (A^{-1} z^{2-sigma} - 2 z cos(pi sigma)
///            + A z^{sigma})),   A = (a1/a2)^{1-sigma},
/// obtained by inverting the demand 1/(lambda + A lambda^sigma) across the
/// negative axis.  Integrates to one; its Stieltjes transform recovers the
/// demand.
RatioDensity ces_complements_leontief_density(double a1, double a2,
                                              double sigma);
/// Same density parameterized directly by (A, sigma).
RatioDensity ratio_density_from_A_sigma(double A, double sigma);

/// integral dnu(z)/(lambda+z).  Equals the demand D1((lambda,1),1) of the
/// completion preference the distribution represents.  Raises
/// std::runtime_error when halving the quadrature resolution moves the
/// value (non-convergence).
double stieltjes_transform(const RatioDensity& nu, double lambda);

/// Verification helper: recovers the density of a ratio distribution from a
/// complex-evaluable demand f(lambda) = D1((lambda,1),1) across the negative
/// axis,
///   phi(z) = (f(-z - i eps) - f(-z + i eps)) / (2 pi i),
/// extrapolated in eps.  Intended for checking a candidate density against
/// a demand, not for general inversion.
double stieltjes_perron_density(
    const std::function<std::complex<double>(std::complex<double>)>& demand,
    double z, double eps = 1e-5);

// ---------------------------------------------------------------------------
// Membership checks
// ---------------------------------------------------------------------------

/// Verdict of one derivative-order sign test: +1 pass, -1 fail,
/// 0 inconclusive (value below the noise estimate).
struct OrderCheck {
  int order = 0;
  double value = 0;   // estimated derivative (Richardson extrapolated)
  double noise = 0;
  int verdict = 0;
};

struct MonotonicityReport {
  std::vector<OrderCheck> orders;
  bool pass = true;  // no explicit sign violation
};

/// Checks that central finite differences of D_good in p_good alternate in
/// sign up to `order` (complete monotonicity is necessary for membership in
/// the Leontief completion).  h is the relative step; Richardson
/// extrapolation is applied from order 3 on.
MonotonicityReport complete_monotonicity_check(const Preference& pref,
                                               int good, const Vec& p,
                                               int order, double h);

struct MixedSignEntry {
  int good = 0;              // share index i
  std::vector<int> wrt;      // distinct log-price indices j1..jq
  double value = 0;
  double noise = 0;
  bool ok = true;
};

struct MixedSignReport {
  std::vector<MixedSignEntry> entries;
  bool pass = true;
};

/// Necessary conditions for membership in the linear completion: the mixed
/// log-price partials of expenditure shares,
///   d^q s_i / dln p_{j1} ... dln p_{jq} >= 0
/// for distinct i, j1..jq and q <= q_max <= n-1.  Central differences with
/// Richardson extrapolation at relative step h.
MixedSignReport arum_sign_conditions_check(const Preference& pref,
                                           const Vec& p, int q_max, double h);

/// Additive random utility shocks; only the Gumbel (type-1 extreme value)
/// family is built in: P{eps < x} = exp(-exp(-x/gamma)).
struct GumbelShocks {
  double gamma = 1.0;
};

/// Monte Carlo estimate of the choice probabilities
/// S_i(w) = P{w_i + eps_i > w_j + eps_j for all j != i}.  Identical seeds
/// produce identical output; exact ties are discarded and counted.
Vec arum_choice_probabilities_mc(const GumbelShocks& shocks, const Vec& w,
                                 long samples, std::uint64_t seed,
                                 long* ties_discarded = nullptr);

}  // namespace homagg
