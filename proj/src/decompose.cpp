#include "homagg/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "homagg/numerics.hpp"

namespace homagg {

namespace {

// Share of good 1 at price ratio z.
double s1_at(const Preference& pref, double z) {
  return expenditure_shares(pref, {z, 1.0}).x[0];
}

void check_two_goods(const Preference& pref, const char* who) {
  if (pref.dimension() != 2)
    throw std::invalid_argument(std::string(who) + ": requires two goods");
}

// s1(.,1) must be nonincreasing in the price ratio; checked on a log grid.
void check_substitutes(const Preference& pref, int grid) {
  const int pts = std::max(grid, 200);
  double prev = kInf;
  for (int j = 0; j < pts; ++j) {
    const double z = std::exp(-25.0 + 50.0 * j / (pts - 1));
    const double s = s1_at(pref, z);
    if (s > prev + 1e-9)
      throw DomainError("not substitutes: share of good 1 increases in its relative price");
    prev = s;
  }
}

// Inverse of the nonincreasing s1(.,1) by bisection on ln z.
double invert_share(const Preference& pref, double target) {
  double lo = -30.0, hi = 30.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (s1_at(pref, std::exp(mid)) > target)
      lo = mid;
    else
      hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

// Collects the exact MRS atoms when the preference is a finite nonnegative
// mixture of two-good linear preferences.  Returns false otherwise.
bool collect_linear_atoms(const Preference& pref, double weight,
                          std::map<double, double>* atoms, double* mass_zero,
                          double* mass_inf) {
  if (pref.is<Linear>()) {
    const Vec& v = pref.as<Linear>().v;
    if (v[0] == 0)
      *mass_zero += weight;
    else if (v[1] == 0)
      *mass_inf += weight;
    else
      (*atoms)[v[0] / v[1]] += weight;
    return true;
  }
  if (pref.is<Mixture>()) {
    const Mixture& m = pref.as<Mixture>();
    for (std::size_t j = 0; j < m.components.size(); ++j) {
      if (m.weights[j] < 0) return false;
      if (!collect_linear_atoms(m.components[j], weight * m.weights[j], atoms,
                                mass_zero, mass_inf))
        return false;
    }
    return true;
  }
  return false;
}

}  // namespace

double MRSDistribution::total_mass() const {
  double s = mass_zero + mass_inf;
  for (double wi : w) s += wi;
  return s;
}

double MRSDistribution::cdf(double at) const {
  if (cdf_closed) return cdf_closed(at);
  double s = mass_zero;
  for (std::size_t j = 0; j < t.size() && t[j] < at; ++j) s += w[j];
  return s;
}

void MRSDistribution::validate() const {
  if (t.size() != w.size())
    throw std::invalid_argument("mrs distribution: atom shape mismatch");
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (!(t[j] > 0) || !std::isfinite(t[j]))
      throw std::invalid_argument("mrs distribution: atoms must have finite positive t");
    if (!(w[j] >= 0)) throw std::invalid_argument("mrs distribution: negative weight");
    if (j && t[j] < t[j - 1])
      throw std::invalid_argument("mrs distribution: atoms must be sorted");
  }
  if (!(mass_zero >= 0) || !(mass_inf >= 0))
    throw std::invalid_argument("mrs distribution: negative endpoint mass");
  if (std::abs(total_mass() - 1.0) > 1e-9)
    throw std::invalid_argument("mrs distribution: total mass must be one");
}

MRSDistribution mrs_distribution_from_substitutes(const Preference& pref,
                                                  int grid) {
  check_two_goods(pref, "mrs_distribution_from_substitutes");
  if (grid < 1) throw std::invalid_argument("grid must be positive");

  MRSDistribution out;

  // Finite mixtures of linear preferences decompose exactly.
  std::map<double, double> atoms;
  if (collect_linear_atoms(pref, 1.0, &atoms, &out.mass_zero, &out.mass_inf)) {
    for (const auto& [t, w] : atoms) {
      out.t.push_back(t);
      out.w.push_back(w);
    }
    return out;
  }
  out.mass_zero = out.mass_inf = 0;

  check_substitutes(pref, grid);

  const double s_hi = s1_at(pref, std::exp(-30.0));
  const double s_lo = s1_at(pref, std::exp(30.0));
  out.mass_zero = 1.0 - s_hi;
  out.mass_inf = s_lo;

  const double interior = s_hi - s_lo;
  if (interior <= 1e-14) return out;

  // Quantile-spaced atoms: equal CDF mass per atom bounds the share error
  // of the induced population directly.
  for (int j = 1; j <= grid; ++j) {
    const double level = s_hi - interior * (j - 0.5) / grid;
    out.t.push_back(invert_share(pref, level));
    out.w.push_back(interior / grid);
  }
  // Merge numerically identical atom positions (share jumps cross several
  // quantile levels at one point).
  MRSDistribution merged;
  merged.mass_zero = out.mass_zero;
  merged.mass_inf = out.mass_inf;
  for (std::size_t j = 0; j < out.t.size(); ++j) {
    if (!merged.t.empty() &&
        std::abs(out.t[j] - merged.t.back()) <=
            1e-12 * std::max(1.0, std::abs(merged.t.back()))) {
      merged.w.back() += out.w[j];
    } else {
      merged.t.push_back(out.t[j]);
      merged.w.push_back(out.w[j]);
    }
  }
  return merged;
}

Population linear_population_approximation(const Preference& pref, double eps,
                                           double total_budget) {
  check_two_goods(pref, "linear_population_approximation");
  if (!(eps > 0 && eps < 1))
    throw std::invalid_argument("eps must lie in (0,1)");
  if (!(total_budget > 0))
    throw std::invalid_argument("total budget must be positive");

  const std::size_t max_agents = static_cast<std::size_t>(std::ceil(1.0 / eps)) + 1;

  MRSDistribution mu;
  std::map<double, double> atoms;
  double m0 = 0, mi = 0;
  if (collect_linear_atoms(pref, 1.0, &atoms, &m0, &mi) &&
      atoms.size() + (m0 > 0 ? 1 : 0) + (mi > 0 ? 1 : 0) <= max_agents) {
    // Already a small population of linear consumers: exact, error zero.
    mu.mass_zero = m0;
    mu.mass_inf = mi;
    for (const auto& [t, w] : atoms) {
      mu.t.push_back(t);
      mu.w.push_back(w);
    }
  } else {
    check_substitutes(pref, 400);
    const double s_hi = s1_at(pref, std::exp(-30.0));
    const double s_lo = s1_at(pref, std::exp(30.0));
    mu.mass_zero = 1.0 - s_hi;
    mu.mass_inf = s_lo;
    const double interior = s_hi - s_lo;
    if (interior > 1e-14) {
      // K chunks of CDF mass interior/K each, atom at the chunk midpoint
      // level; the quantized share function stays within interior/(2K) <= eps.
      const int K = std::max(1, static_cast<int>(std::ceil(interior / (2.0 * eps))));
      for (int j = 1; j <= K; ++j) {
        const double level = s_hi - interior * (j - 0.5) / K;
        const double t = invert_share(pref, level);
        if (!mu.t.empty() && std::abs(t - mu.t.back()) <=
                                 1e-12 * std::max(1.0, std::abs(mu.t.back())))
          mu.w.back() += interior / K;
        else {
          mu.t.push_back(t);
          mu.w.push_back(interior / K);
        }
      }
    }
  }

  Population pop;
  if (mu.mass_inf > 1e-15)
    pop.agents.push_back({Preference(Linear{{1.0, 0.0}}), total_budget * mu.mass_inf});
  for (std::size_t j = 0; j < mu.t.size(); ++j)
    if (mu.w[j] > 1e-15)
      pop.agents.push_back({Preference(Linear{{mu.t[j], 1.0}}), total_budget * mu.w[j]});
  if (mu.mass_zero > 1e-15)
    pop.agents.push_back({Preference(Linear{{0.0, 1.0}}), total_budget * mu.mass_zero});
  if (pop.agents.empty())
    pop.agents.push_back({Preference(Linear{{0.0, 1.0}}), total_budget});

  if (pop.agents.size() > max_agents)
    throw std::logic_error("approximation produced too many agents");

  // Verify the share error bound on a dense log grid.
  Population check_pop = pop;
  for (int j = 0; j < 257; ++j) {
    const double z = std::exp(-14.0 + 28.0 * (j + 0.1318) / 256.0);
    double pop_s1 = 0;
    for (const Agent& a : check_pop.agents)
      pop_s1 += a.budget / total_budget * s1_at(a.pref, z);
    if (std::abs(pop_s1 - s1_at(pref, z)) > eps + 1e-9)
      throw std::logic_error("approximation exceeded the share error bound");
  }
  return pop;
}

MRSDistribution ces_substitutes_linear_cdf(double a1, double a2, double sigma,
                                           int nodes) {
  if (!(sigma > 1)) throw std::invalid_argument("ces cdf: requires sigma > 1");
  if (!(a1 > 0 && a2 > 0)) throw std::invalid_argument("ces cdf: weights must be positive");

  MRSDistribution out;
  out.cdf_closed = [a1, a2, sigma](double t) {
    if (t <= 0) return 0.0;
    // (a2 t)^{s-1} / (a1^{s-1} + (a2 t)^{s-1}) as a logistic in logs.
    const double L = (sigma - 1.0) * (std::log(a2 * t) - std::log(a1));
    return 1.0 / (1.0 + std::exp(-L));
  };
  if (nodes > 0) {
    for (int j = 1; j <= nodes; ++j) {
      const double u = (j - 0.5) / nodes;
      out.t.push_back(a1 / a2 * std::pow(u / (1.0 - u), 1.0 / (sigma - 1.0)));
      out.w.push_back(1.0 / nodes);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Leontief completion: ratio densities and the Stieltjes transform
// ---------------------------------------------------------------------------

double RatioDensity::integrate(const std::function<double(double)>& f) const {
  if (!atoms.empty()) {
    double s = 0;
    for (const auto& [z, w] : atoms) s += w * f(z);
    return s;
  }
  if (!phi) throw std::invalid_argument("ratio density: no density or atoms");
  // z = e^y straightens the algebraic tails into exponential ones.
  auto g = [&](double y) {
    const double z = std::exp(y);
    return f(z) * phi(z) * z;
  };
  return integrate_gl(g, y_lo, y_hi, panels, nodes);
}

double RatioDensity::mass() const {
  return integrate([](double) { return 1.0; });
}

RatioDensity ratio_density_from_A_sigma(double A, double sigma) {
  if (!(sigma > 0 && sigma < 1))
    throw std::invalid_argument("ratio density: sigma must lie in (0,1)");
  if (!(A > 0)) throw std::invalid_argument("ratio density: A must be positive");
  RatioDensity nu;
  nu.A = A;
  nu.sigma = sigma;
  const double s = std::sin(M_PI * sigma);
  const double c = std::cos(M_PI * sigma);
  nu.phi = [A, sigma, s, c](double z) {
    if (z <= 0) return 0.0;
    // Inverting the transform 1/(lambda + A lambda^sigma) across the cut
    // gives the middle term -2 z cos(pi sigma); the denominator stays
    // positive by the AM-GM bound on the outer terms.
    const double denom =
        std::pow(z, 2.0 - sigma) / A - 2.0 * z * c + A * std::pow(z, sigma);
    return s / (M_PI * denom);
  };
  return nu;
}

RatioDensity ces_complements_leontief_density(double a1, double a2,
                                              double sigma) {
  if (!(a1 > 0 && a2 > 0))
    throw std::invalid_argument("ces density: weights must be positive");
  if (!(sigma > 0 && sigma < 1))
    throw std::invalid_argument("ces density: requires sigma in (0,1)");
  return ratio_density_from_A_sigma(std::pow(a1 / a2, 1.0 - sigma), sigma);
}

double stieltjes_transform(const RatioDensity& nu, double lambda) {
  if (!(lambda > 0)) throw std::invalid_argument("stieltjes: lambda must be positive");
  auto f = [lambda](double z) { return 1.0 / (lambda + z); };
  const double value = nu.integrate(f);
  if (nu.atoms.empty()) {
    // Convergence check at half the panel count.
    RatioDensity coarse = nu;
    coarse.panels = std::max(1, nu.panels / 2);
    if (std::abs(coarse.integrate(f) - value) > 1e-8 * (1.0 + std::abs(value)))
      throw std::runtime_error("stieltjes: quadrature did not converge");
  }
  return value;
}

double stieltjes_perron_density(
    const std::function<std::complex<double>(std::complex<double>)>& demand,
    double z, double eps) {
  if (!(z > 0)) throw std::invalid_argument("stieltjes-perron: z must be positive");
  if (!(eps > 0)) throw std::invalid_argument("stieltjes-perron: eps must be positive");
  auto at = [&](double e) {
    const std::complex<double> below = demand({-z, -e});
    const std::complex<double> above = demand({-z, e});
    // below = conj(above) for a genuine Stieltjes transform, so the
    // difference is 2 pi i times the density smeared over scale e.
    return (below - above).imag() / (2.0 * M_PI);
  };
  // The finite-eps value approaches the density linearly; extrapolate once.
  const double coarse = at(eps);
  const double fine = at(0.5 * eps);
  return 2.0 * fine - coarse;
}

// ---------------------------------------------------------------------------
// Finite-difference membership checks
// ---------------------------------------------------------------------------

namespace {

double binom(int n, int k) {
  double r = 1;
  for (int j = 1; j <= k; ++j) r = r * (n - j + 1) / j;
  return r;
}

}  // namespace

MonotonicityReport complete_monotonicity_check(const Preference& pref,
                                               int good, const Vec& p,
                                               int order, double h) {
  const int n = pref.dimension();
  check_prices(p, n);
  if (good < 0 || good >= n) throw std::invalid_argument("good index out of range");
  if (order < 0 || order > 6) throw std::invalid_argument("order must lie in [0,6]");
  if (!(h > 0 && h < 0.2)) throw std::invalid_argument("relative step h out of range");

  auto demand_at = [&](double t) {
    Vec pp = p;
    pp[good] = t;
    return demand(pref, pp, 1.0).x[good];
  };
  const double t0 = p[good];
  const double h_abs = h * t0;

  MonotonicityReport report;
  for (int k = 0; k <= order; ++k) {
    OrderCheck chk;
    chk.order = k;
    if (k == 0) {
      chk.value = demand_at(t0);
      chk.noise = 1e-14 * std::max(1.0, std::abs(chk.value));
      chk.verdict = chk.value >= -chk.noise ? +1 : -1;
    } else {
      auto fd = [&](double step, double* fmax) {
        double acc = 0, m = 0;
        for (int j = 0; j <= k; ++j) {
          const double f = demand_at(t0 + (0.5 * k - j) * step);
          m = std::max(m, std::abs(f));
          acc += ((j % 2) ? -1.0 : 1.0) * binom(k, j) * f;
        }
        if (fmax) *fmax = m;
        return acc / std::pow(step, k);
      };
      double fmax = 0;
      const double coarse = fd(h_abs, &fmax);
      const double fine = fd(0.5 * h_abs, nullptr);
      // Richardson extrapolation from order 3 on; coarser orders are clean
      // enough at the default step.
      chk.value = k >= 3 ? (4.0 * fine - coarse) / 3.0 : fine;
      const double roundoff =
          std::pow(2.0, k) * 1e-15 * fmax / std::pow(0.5 * h_abs, k);
      chk.noise = roundoff + std::abs(fine - coarse) / 3.0;
      const double signed_value = (k % 2 == 0) ? chk.value : -chk.value;
      const double band = 1e-7 * std::max(1.0, std::abs(chk.value));
      if (std::abs(chk.value) <= 4.0 * chk.noise)
        chk.verdict = 0;
      else
        chk.verdict = signed_value >= -band ? +1 : -1;
    }
    if (chk.verdict < 0) report.pass = false;
    report.orders.push_back(chk);
  }
  return report;
}

MixedSignReport arum_sign_conditions_check(const Preference& pref,
                                           const Vec& p, int q_max, double h) {
  const int n = pref.dimension();
  check_prices(p, n);
  if (q_max < 1 || q_max > n - 1)
    throw std::invalid_argument("q_max must lie in [1, n-1]");
  if (!(h > 0 && h < 0.2)) throw std::invalid_argument("relative step h out of range");

  auto share_at = [&](int i, const Vec& logshift) {
    Vec pp = p;
    for (int g = 0; g < n; ++g) pp[g] *= std::exp(logshift[g]);
    return expenditure_shares(pref, pp).x[i];
  };

  MixedSignReport report;
  for (int i = 0; i < n; ++i) {
    for (int mask = 1; mask < (1 << n); ++mask) {
      if (mask & (1 << i)) continue;
      const int q = __builtin_popcount(static_cast<unsigned>(mask));
      if (q > q_max) continue;
      std::vector<int> wrt;
      for (int g = 0; g < n; ++g)
        if (mask & (1 << g)) wrt.push_back(g);

      // Mixed central difference in log prices over the index set.
      auto mixed = [&](double step, double* fmax) {
        double acc = 0, m = 0;
        for (int signs = 0; signs < (1 << q); ++signs) {
          Vec shift(n, 0.0);
          double parity = 1.0;
          for (int b = 0; b < q; ++b) {
            const double sg = (signs & (1 << b)) ? 1.0 : -1.0;
            parity *= sg;
            shift[wrt[b]] = sg * step;
          }
          const double f = share_at(i, shift);
          m = std::max(m, std::abs(f));
          acc += parity * f;
        }
        if (fmax) *fmax = m;
        return acc / std::pow(2.0 * step, q);
      };
      double fmax = 0;
      const double coarse = mixed(h, &fmax);
      const double fine = mixed(0.5 * h, nullptr);
      MixedSignEntry entry;
      entry.good = i;
      entry.wrt = wrt;
      entry.value = (4.0 * fine - coarse) / 3.0;
      const double roundoff = std::pow(2.0, q) * 1e-15 * fmax / std::pow(h, q);
      entry.noise = roundoff + std::abs(fine - coarse) / 3.0;
      entry.ok = entry.value >= -std::max(1e-7, 4.0 * entry.noise);
      if (!entry.ok) report.pass = false;
      report.entries.push_back(std::move(entry));
    }
  }
  return report;
}

Vec arum_choice_probabilities_mc(const GumbelShocks& shocks, const Vec& w,
                                 long samples, std::uint64_t seed,
                                 long* ties_discarded) {
  if (!(shocks.gamma > 0)) throw std::invalid_argument("gumbel: gamma must be positive");
  if (samples < 10000) throw std::invalid_argument("need at least 1e4 samples");
  const int n = static_cast<int>(w.size());
  if (n < 2) throw std::invalid_argument("need at least two alternatives");

  std::mt19937_64 eng(seed);
  std::vector<long> counts(n, 0);
  long ties = 0;
  for (long s = 0; s < samples; ++s) {
    double best = -kInf;
    int arg = -1;
    bool tie = false;
    for (int i = 0; i < n; ++i) {
      const double u = uniform01(eng);
      const double eps = -shocks.gamma * std::log(-std::log(u));
      const double val = w[i] + eps;
      if (val > best) {
        best = val;
        arg = i;
        tie = false;
      } else if (val == best) {
        tie = true;
      }
    }
    if (tie) {
      ++ties;
      continue;
    }
    ++counts[arg];
  }
  if (ties_discarded) *ties_discarded = ties;
  const long valid = samples - ties;
  Vec probs(n);
  for (int i = 0; i < n; ++i) probs[i] = static_cast<double>(counts[i]) / valid;
  return probs;
}

}  // namespace homagg
