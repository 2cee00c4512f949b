// Batch front-end over JSON/CSV files for scripted analysis and plot-data
// generation.  Exit codes: 0 success, 2 schema/argument errors, 3 domain
// membership failures, 4 solver non-convergence (partial results are still
// written with "certified": false).  Diagnostics go to stderr as JSON lines.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "homagg/aggregate.hpp"
#include "homagg/decompose.hpp"
#include "homagg/fisher.hpp"
#include "homagg/json_io.hpp"
#include "homagg/numerics.hpp"
#include "homagg/prefcore.hpp"
#include "homagg/welfare.hpp"

namespace {

using namespace homagg;

constexpr int kExitOk = 0;
constexpr int kExitSchema = 2;
constexpr int kExitDomain = 3;
constexpr int kExitSolver = 4;

void diag(const std::string& level, const std::string& message) {
  Json j;
  j["level"] = level;
  j["message"] = message;
  std::string line;
  line = dump_json(j);
  // JSON lines: strip the pretty newlines down to one record per line.
  std::string flat;
  for (char c : line)
    if (c != '\n') flat += c;
  std::cerr << flat << "\n";
}

Vec parse_vec(const std::string& text) {
  Vec out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (...) {
      throw SchemaError("cannot parse number list: " + text);
    }
  }
  if (out.empty()) throw SchemaError("empty number list");
  return out;
}

void emit(const std::string& out_path, const Json& j) {
  if (out_path.empty())
    std::cout << dump_json(j);
  else
    write_text_file(out_path, dump_json(j));
}

WelfareKind parse_kind(const std::string& kind) {
  if (kind == "ev") return WelfareKind::kEV;
  if (kind == "cv") return WelfareKind::kCV;
  if (kind == "av") return WelfareKind::kAV;
  throw SchemaError("unknown welfare kind: " + kind);
}

// ---------------------------------------------------------------------------
// aggregate
// ---------------------------------------------------------------------------

struct AggregateArgs {
  std::string in, out;
  std::string contour_csv;
  double contour_level = 1.0;
  int contour_directions = 64;
};

int run_aggregate(const AggregateArgs& a) {
  const Population pop = population_from_json(load_json_file(a.in));
  const Preference agg = aggregate_population(pop);
  emit(a.out, preference_file_to_json(agg));
  if (!a.contour_csv.empty()) {
    const auto samples = contour_sample(agg, a.contour_level, a.contour_directions);
    std::string csv = "ray_angle";
    for (int i = 1; i <= agg.dimension(); ++i) csv += ",x" + std::to_string(i);
    csv += "\n";
    for (const ContourSample& s : samples) {
      if (!s.bounded) continue;
      csv += format_double(s.angle);
      for (double xi : s.x) csv += "," + format_double(xi);
      csv += "\n";
    }
    write_text_file(a.contour_csv, csv);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// demand-curve / shares-curve
// ---------------------------------------------------------------------------

struct CurveArgs {
  std::string in, out, base;
  int good = 1;
  double pmin = 0.1, pmax = 10.0, budget = 1.0;
  int points = 200;
  int threads = 1;
  bool shares = false;
};

int run_curve(const CurveArgs& a) {
  const Preference pref = preference_from_file_json(load_json_file(a.in));
  const int n = pref.dimension();
  if (a.good < 1 || a.good > n) throw SchemaError("--good out of range");
  if (a.points < 2 || !(a.pmin > 0) || !(a.pmax > a.pmin))
    throw SchemaError("invalid price grid");
  Vec base(n, 1.0);
  if (!a.base.empty()) {
    base = parse_vec(a.base);
    if (static_cast<int>(base.size()) != n) throw SchemaError("--base has wrong dimension");
  }

  // Log-spaced sweep of the selected good's price; other prices fixed.
  std::vector<std::string> rows(a.points);
  const int threads = std::max(1, a.threads);
  auto worker = [&](int first, int last) {
    for (int j = first; j < last; ++j) {
      const double t = std::exp(std::log(a.pmin) +
                                (std::log(a.pmax) - std::log(a.pmin)) * j /
                                    (a.points - 1));
      Vec p = base;
      p[a.good - 1] = t;
      const DemandResult r = a.shares ? expenditure_shares(pref, p)
                                      : demand(pref, p, a.budget);
      std::string row = format_double(t);
      for (double v : r.x) row += "," + format_double(v);
      rows[j] = std::move(row);
    }
  };
  if (threads == 1) {
    worker(0, a.points);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (a.points + threads - 1) / threads;
    for (int k = 0; k < threads; ++k) {
      const int first = k * chunk, last = std::min(a.points, (k + 1) * chunk);
      if (first < last) pool.emplace_back(worker, first, last);
    }
    for (auto& t : pool) t.join();
  }

  std::string csv = "p";
  for (int i = 1; i <= n; ++i)
    csv += std::string(",") + (a.shares ? "s" : "x") + std::to_string(i);
  csv += "\n";
  for (const std::string& row : rows) csv += row + "\n";
  write_text_file(a.out, csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// solve-fisher
// ---------------------------------------------------------------------------

struct FisherArgs {
  std::string in, out;
  double tol = -1;  // default from the market file
};

int run_fisher(const FisherArgs& a) {
  MarketFile m = market_from_json(load_json_file(a.in));
  if (a.tol > 0) m.tol = a.tol;
  const EquilibriumResult r = solve_equilibrium(m.population, m.supply, m.tol);
  emit(a.out, equilibrium_to_json(r));
  if (!r.certified) {
    diag("error", "solver did not certify the requested tolerance; gap = " +
                      format_double(r.gap));
    return kExitSolver;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

struct DecomposeArgs {
  std::string in, out, mode = "mrs";
  int grid = 1000;
  double eps = 0.1;
  double budget = 1.0;
};

int run_decompose(const DecomposeArgs& a) {
  const Preference pref = preference_from_file_json(load_json_file(a.in));
  if (a.mode == "mrs") {
    emit(a.out, mrs_distribution_to_json(
                    mrs_distribution_from_substitutes(pref, a.grid)));
  } else if (a.mode == "population") {
    emit(a.out, population_to_json(
                    linear_population_approximation(pref, a.eps, a.budget)));
  } else if (a.mode == "leontief-density") {
    if (!pref.is<CES>()) throw DomainError("leontief-density mode needs a CES preference");
    const CES& c = pref.as<CES>();
    emit(a.out, ratio_density_to_json(
                    ces_complements_leontief_density(c.a[0], c.a[1], c.sigma)));
  } else {
    throw SchemaError("unknown decompose mode: " + a.mode);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// welfare
// ---------------------------------------------------------------------------

struct WelfareArgs {
  std::string in, out, kind = "ev", p0, p1;
  double budget = 1.0;
};

int run_welfare(const WelfareArgs& a) {
  const Json j = load_json_file(a.in);
  const PriceChange change{parse_vec(a.p0), parse_vec(a.p1)};
  const WelfareKind kind = parse_kind(a.kind);
  Json out;
  if (j.contains("agents")) {
    const Population pop = population_from_json(j);
    out["value"] = population_welfare(pop, kind, change);
    out["budget"] = pop.total_budget();
  } else {
    const Preference pref = preference_from_file_json(j);
    out["value"] = welfare_measure(kind, pref, a.budget, change);
    out["budget"] = a.budget;
  }
  out["kind"] = a.kind;
  emit(a.out, out);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// welfare-range
// ---------------------------------------------------------------------------

struct RangeArgs {
  std::string in, out, hull_csv, domain = "substitutes", kind = "ev", p0, p1;
  double budget = 1.0;
  int nodes = 4096;
  int grid = 10000;
};

int run_range(const RangeArgs& a) {
  const Preference pref = preference_from_file_json(load_json_file(a.in));
  const PriceChange change{parse_vec(a.p0), parse_vec(a.p1)};
  WelfareRange range;
  if (a.domain == "substitutes") {
    if (a.kind != "ev")
      throw SchemaError("the substitutes domain supports --kind ev only");
    range = robust_range_substitutes_ev(pref, a.budget, change, a.nodes);
    emit(a.out, welfare_range_to_json(range));
    return kExitOk;
  }
  if (a.domain != "cobb-douglas")
    throw SchemaError("unknown domain: " + a.domain);
  if (!pref.is<CobbDouglas>() || pref.dimension() != 2)
    throw DomainError("the cobb-douglas domain needs a two-good Cobb-Douglas aggregate");
  const WelfareKind kind = parse_kind(a.kind);
  const PriceChange& ch = change;
  auto w = [kind, ch](double alpha) {
    const Preference p = Preference(CobbDouglas{{alpha, 1.0 - alpha}});
    return welfare_measure(kind, p, 1.0, ch);
  };
  ParametricFamily family;
  family.lo = 0.0;
  family.hi = 1.0;
  family.make = [](double alpha) {
    return Preference(CobbDouglas{{alpha, 1.0 - alpha}});
  };
  const double alpha = pref.as<CobbDouglas>().a[0];
  range = robust_range_parametric(w, family, alpha, a.budget, a.grid);
  emit(a.out, welfare_range_to_json(range));

  if (!a.hull_csv.empty()) {
    // param, w, and both hull envelopes, for plotting.
    const int g = std::min(a.grid, 4000);
    std::vector<double> xs(g + 1), ys(g + 1);
    for (int j = 0; j <= g; ++j) {
      xs[j] = static_cast<double>(j) / g;
      ys[j] = w(xs[j]);
    }
    const std::vector<int> cav = upper_hull_indices(xs, ys);
    const std::vector<int> vex = lower_hull_indices(xs, ys);
    auto envelope = [&](const std::vector<int>& hull, double x) {
      for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
        const double xl = xs[hull[k]], xr = xs[hull[k + 1]];
        if (x >= xl && x <= xr) {
          const double lam = xr == xl ? 1.0 : (xr - x) / (xr - xl);
          return lam * ys[hull[k]] + (1.0 - lam) * ys[hull[k + 1]];
        }
      }
      return ys[hull.back()];
    };
    std::string csv = "param,w,vex,cav\n";
    for (int j = 0; j <= g; ++j) {
      csv += format_double(xs[j]) + "," + format_double(ys[j]) + "," +
             format_double(envelope(vex, xs[j])) + "," +
             format_double(envelope(cav, xs[j])) + "\n";
    }
    write_text_file(a.hull_csv, csv);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// check-membership
// ---------------------------------------------------------------------------

struct CheckArgs {
  std::string in, out, check = "substitutes", p;
  int good = 1;
  int order = 6;
  int qmax = 0;
  double h = 1e-2;
  long samples = 1000000;
  std::int64_t seed = -1;
};

int run_check(const CheckArgs& a) {
  const Preference pref = preference_from_file_json(load_json_file(a.in));
  const int n = pref.dimension();
  Vec p(n, 1.0);
  if (!a.p.empty()) {
    p = parse_vec(a.p);
    if (static_cast<int>(p.size()) != n) throw SchemaError("--p has wrong dimension");
  }
  Json out;
  bool pass = false;
  if (a.check == "substitutes") {
    try {
      mrs_distribution_from_substitutes(pref, 64);
      pass = true;
    } catch (const DomainError& e) {
      out["reason"] = e.what();
    }
  } else if (a.check == "complete-monotonicity") {
    const MonotonicityReport rep =
        complete_monotonicity_check(pref, a.good - 1, p, a.order, a.h);
    pass = rep.pass;
    Json orders = Json::array();
    for (const OrderCheck& c : rep.orders) {
      Json oj;
      oj["order"] = c.order;
      oj["value"] = c.value;
      oj["noise"] = c.noise;
      oj["verdict"] = c.verdict;
      orders.push_back(std::move(oj));
    }
    out["orders"] = std::move(orders);
  } else if (a.check == "arum-signs") {
    const int q = a.qmax > 0 ? a.qmax : n - 1;
    const MixedSignReport rep = arum_sign_conditions_check(pref, p, q, a.h);
    pass = rep.pass;
    Json entries = Json::array();
    for (const MixedSignEntry& e : rep.entries) {
      Json ej;
      ej["good"] = e.good + 1;
      Json wrt = Json::array();
      for (int g : e.wrt) wrt.push_back(g + 1);
      ej["wrt"] = std::move(wrt);
      ej["value"] = e.value;
      ej["ok"] = e.ok;
      entries.push_back(std::move(ej));
    }
    out["entries"] = std::move(entries);
  } else if (a.check == "arum-mc") {
    if (a.seed < 0) throw SchemaError("--seed is required for arum-mc");
    if (!pref.is<CES>() || !(pref.as<CES>().sigma > 1))
      throw DomainError("arum-mc validates the Gumbel bridge for CES substitutes");
    const CES& c = pref.as<CES>();
    Vec w(n);
    for (int i = 0; i < n; ++i) w[i] = -std::log(p[i]) + std::log(c.a[i]);
    const GumbelShocks shocks{1.0 / (c.sigma - 1.0)};
    long ties = 0;
    const Vec probs = arum_choice_probabilities_mc(
        shocks, w, a.samples, static_cast<std::uint64_t>(a.seed), &ties);
    const Vec shares = expenditure_shares(pref, p).x;
    pass = true;
    for (int i = 0; i < n; ++i) {
      const double se = std::sqrt(shares[i] * (1.0 - shares[i]) / a.samples);
      if (std::abs(probs[i] - shares[i]) > 3.0 * se + 1e-12) pass = false;
    }
    out["mc"] = Json(probs);
    out["shares"] = Json(shares);
    out["ties_discarded"] = ties;
  } else {
    throw SchemaError("unknown check: " + a.check);
  }
  out["check"] = a.check;
  out["pass"] = pass;
  emit(a.out, out);
  return pass ? kExitOk : kExitDomain;
}

// ---------------------------------------------------------------------------
// distance
// ---------------------------------------------------------------------------

struct DistanceArgs {
  std::string a, b, out;
  int grid = 512;
};

int run_distance(const DistanceArgs& d) {
  const Preference pa = preference_from_file_json(load_json_file(d.a));
  const Preference pb = preference_from_file_json(load_json_file(d.b));
  Json out;
  out["distance"] = preference_distance(pa, pb, d.grid);
  emit(d.out, out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"homothetic demand aggregation toolkit"};
  app.require_subcommand(1);

  AggregateArgs agg;
  auto* cmd_agg = app.add_subcommand("aggregate",
                                     "aggregate a population into one preference");
  cmd_agg->add_option("--in", agg.in, "population JSON")->required();
  cmd_agg->add_option("--out", agg.out, "output preference JSON");
  cmd_agg->add_option("--contour-csv", agg.contour_csv,
                      "also sample the aggregate's unit contour to CSV");
  cmd_agg->add_option("--contour-level", agg.contour_level, "contour level");
  cmd_agg->add_option("--contour-directions", agg.contour_directions,
                      "rays through the positive orthant");

  CurveArgs dcurve, scurve;
  scurve.shares = true;
  for (auto [cmd_name, args, help] :
       {std::tuple<const char*, CurveArgs*, const char*>{
            "demand-curve", &dcurve, "CSV demand sweep of one good's price"},
        std::tuple<const char*, CurveArgs*, const char*>{
            "shares-curve", &scurve, "CSV share sweep of one good's price"}}) {
    auto* c = app.add_subcommand(cmd_name, help);
    c->add_option("--in", args->in, "preference JSON")->required();
    c->add_option("--out", args->out, "output CSV")->required();
    c->add_option("--good", args->good, "1-based good index to sweep");
    c->add_option("--pmin", args->pmin, "lowest price (log-spaced sweep)");
    c->add_option("--pmax", args->pmax, "highest price");
    c->add_option("--points", args->points, "rows in the sweep");
    c->add_option("--budget", args->budget, "budget (demand-curve only)");
    c->add_option("--base", args->base, "comma list of the fixed prices");
    c->add_option("--threads", args->threads, "parallelize the grid evaluation");
  }

  FisherArgs fisher;
  auto* cmd_fisher = app.add_subcommand("solve-fisher", "competitive equilibrium");
  cmd_fisher->add_option("--in", fisher.in, "market JSON")->required();
  cmd_fisher->add_option("--out", fisher.out, "output equilibrium JSON");
  cmd_fisher->add_option("--tol", fisher.tol, "override the market tolerance");

  DecomposeArgs dec;
  auto* cmd_dec = app.add_subcommand("decompose",
                                     "decompose a two-good aggregate");
  cmd_dec->add_option("--in", dec.in, "preference JSON")->required();
  cmd_dec->add_option("--out", dec.out, "output JSON");
  cmd_dec->add_option("--mode", dec.mode,
                      "mrs | population | leontief-density");
  cmd_dec->add_option("--grid", dec.grid, "quantile atoms for mrs mode");
  cmd_dec->add_option("--eps", dec.eps, "share error for population mode");
  cmd_dec->add_option("--budget", dec.budget, "total budget for population mode");

  WelfareArgs wf;
  auto* cmd_wf = app.add_subcommand("welfare", "EV/CV/AV of a price change");
  cmd_wf->add_option("--in", wf.in, "population or preference JSON")->required();
  cmd_wf->add_option("--kind", wf.kind, "ev | cv | av");
  cmd_wf->add_option("--p0", wf.p0, "old prices, comma list")->required();
  cmd_wf->add_option("--p1", wf.p1, "new prices, comma list")->required();
  cmd_wf->add_option("--budget", wf.budget, "budget for a bare preference");
  cmd_wf->add_option("--out", wf.out, "output JSON");

  RangeArgs rng;
  auto* cmd_rng = app.add_subcommand("welfare-range",
                                     "robust welfare range of an aggregate");
  cmd_rng->add_option("--in", rng.in, "aggregate preference JSON")->required();
  cmd_rng->add_option("--p0", rng.p0, "old prices")->required();
  cmd_rng->add_option("--p1", rng.p1, "new prices")->required();
  cmd_rng->add_option("--domain", rng.domain, "substitutes | cobb-douglas");
  cmd_rng->add_option("--kind", rng.kind, "ev | cv | av");
  cmd_rng->add_option("--budget", rng.budget, "total budget");
  cmd_rng->add_option("--nodes", rng.nodes, "quadrature nodes (substitutes)");
  cmd_rng->add_option("--grid", rng.grid, "hull grid (cobb-douglas)");
  cmd_rng->add_option("--out", rng.out, "output JSON");
  cmd_rng->add_option("--hull-csv", rng.hull_csv, "per-parameter hull CSV");

  CheckArgs chk;
  auto* cmd_chk = app.add_subcommand("check-membership",
                                     "completion membership checks");
  cmd_chk->add_option("--in", chk.in, "preference JSON")->required();
  cmd_chk->add_option("--check", chk.check,
                      "substitutes | complete-monotonicity | arum-signs | arum-mc");
  cmd_chk->add_option("--p", chk.p, "price point, comma list");
  cmd_chk->add_option("--good", chk.good, "1-based good index");
  cmd_chk->add_option("--order", chk.order, "highest derivative order");
  cmd_chk->add_option("--qmax", chk.qmax, "highest mixed-partial order");
  cmd_chk->add_option("--step", chk.h, "relative finite-difference step");
  cmd_chk->add_option("--samples", chk.samples, "Monte Carlo samples");
  cmd_chk->add_option("--seed", chk.seed, "Monte Carlo seed (required for arum-mc)");
  cmd_chk->add_option("--out", chk.out, "output report JSON");

  DistanceArgs dist;
  auto* cmd_dist = app.add_subcommand("distance", "metric between preferences");
  cmd_dist->add_option("--a", dist.a, "first preference JSON")->required();
  cmd_dist->add_option("--b", dist.b, "second preference JSON")->required();
  cmd_dist->add_option("--grid", dist.grid, "grid points for the sup");
  cmd_dist->add_option("--out", dist.out, "output JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    diag("error", e.what());
    return kExitSchema;
  }

  try {
    if (cmd_agg->parsed()) return run_aggregate(agg);
    if (app.get_subcommand("demand-curve")->parsed()) return run_curve(dcurve);
    if (app.get_subcommand("shares-curve")->parsed()) return run_curve(scurve);
    if (cmd_fisher->parsed()) return run_fisher(fisher);
    if (cmd_dec->parsed()) return run_decompose(dec);
    if (cmd_wf->parsed()) return run_welfare(wf);
    if (cmd_rng->parsed()) return run_range(rng);
    if (cmd_chk->parsed()) return run_check(chk);
    if (cmd_dist->parsed()) return run_distance(dist);
  } catch (const SchemaError& e) {
    diag("error", e.what());
    return kExitSchema;
  } catch (const std::invalid_argument& e) {
    diag("error", e.what());
    return kExitSchema;
  } catch (const DomainError& e) {
    diag("error", e.what());
    return kExitDomain;
  } catch (const std::exception& e) {
    diag("error", e.what());
    return kExitSolver;
  }
  return kExitSchema;
}
