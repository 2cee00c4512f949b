#include "homagg/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace homagg {

namespace {

double require_number(const Json& j, const char* what) {
  if (!j.is_number()) throw SchemaError(std::string(what) + ": expected a number");
  return j.get<double>();
}

Vec require_vector(const Json& j, const char* what) {
  if (!j.is_array()) throw SchemaError(std::string(what) + ": expected an array");
  Vec out;
  out.reserve(j.size());
  for (const Json& v : j) out.push_back(require_number(v, what));
  return out;
}

const Json& require_field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw SchemaError(std::string("missing field \"") + key + '"');
  return j.at(key);
}

void check_dimension(const Vec& v, int n, const char* what) {
  if (n > 0 && static_cast<int>(v.size()) != n)
    throw SchemaError(std::string(what) + ": wrong dimension");
}

Json vec_to_json(const Vec& v) { return Json(v); }

}  // namespace

Json preference_to_json(const Preference& pref) {
  Json j;
  if (pref.is<Linear>()) {
    j["kind"] = "linear";
    j["v"] = vec_to_json(pref.as<Linear>().v);
  } else if (pref.is<Leontief>()) {
    j["kind"] = "leontief";
    j["v"] = vec_to_json(pref.as<Leontief>().v);
  } else if (pref.is<CobbDouglas>()) {
    j["kind"] = "cobb_douglas";
    j["a"] = vec_to_json(pref.as<CobbDouglas>().a);
  } else if (pref.is<CES>()) {
    j["kind"] = "ces";
    j["a"] = vec_to_json(pref.as<CES>().a);
    j["sigma"] = pref.as<CES>().sigma;
  } else if (pref.is<Translog>()) {
    j["kind"] = "translog";
    j["alpha"] = pref.as<Translog>().alpha;
    j["beta"] = pref.as<Translog>().beta;
  } else if (pref.is<PiecewiseLinearE>()) {
    j["kind"] = "pwl";
    Json rows = Json::array();
    for (const Vec& row : pref.as<PiecewiseLinearE>().coeffs)
      rows.push_back(vec_to_json(row));
    j["coeffs"] = std::move(rows);
  } else if (pref.is<TwoGoodQ>()) {
    const TwoGoodQ& t = pref.as<TwoGoodQ>();
    j["kind"] = "two_good_q";
    j["z"] = vec_to_json(t.z);
    Json q = Json::array();
    for (double v : t.q) {
      if (std::isinf(v))
        q.push_back("inf");
      else
        q.push_back(v);
    }
    j["q"] = std::move(q);
  } else {
    const Mixture& m = pref.as<Mixture>();
    j["kind"] = "mixture";
    Json comps = Json::array();
    for (std::size_t k = 0; k < m.components.size(); ++k) {
      Json c;
      c["weight"] = m.weights[k];
      c["pref"] = preference_to_json(m.components[k]);
      comps.push_back(std::move(c));
    }
    j["components"] = std::move(comps);
  }
  return j;
}

Preference preference_from_json(const Json& j, int n) {
  const Json& kj = require_field(j, "kind");
  if (!kj.is_string()) throw SchemaError("\"kind\" must be a string");
  const std::string kind = kj.get<std::string>();
  try {
    if (kind == "linear" || kind == "leontief") {
      Vec v = require_vector(require_field(j, "v"), "v");
      check_dimension(v, n, "v");
      if (kind == "linear") return Preference(Linear{std::move(v)});
      return Preference(Leontief{std::move(v)});
    }
    if (kind == "cobb_douglas") {
      Vec a = require_vector(require_field(j, "a"), "a");
      check_dimension(a, n, "a");
      return Preference(CobbDouglas{std::move(a)});
    }
    if (kind == "ces") {
      Vec a = require_vector(require_field(j, "a"), "a");
      check_dimension(a, n, "a");
      const double sigma = require_number(require_field(j, "sigma"), "sigma");
      if (std::abs(sigma - 1.0) <= 1e-9)
        throw SchemaError("ces: sigma within 1e-9 of one is not representable");
      return Preference(CES{std::move(a), sigma});
    }
    if (kind == "translog") {
      if (n > 0 && n != 2) throw SchemaError("translog: requires n = 2");
      return Preference(Translog{require_number(require_field(j, "alpha"), "alpha"),
                                 require_number(require_field(j, "beta"), "beta")});
    }
    if (kind == "pwl") {
      const Json& rows = require_field(j, "coeffs");
      if (!rows.is_array()) throw SchemaError("pwl: coeffs must be an array");
      PiecewiseLinearE w;
      for (const Json& row : rows) {
        w.coeffs.push_back(require_vector(row, "coeffs"));
        check_dimension(w.coeffs.back(), n, "coeffs");
      }
      return Preference(std::move(w));
    }
    if (kind == "two_good_q") {
      if (n > 0 && n != 2) throw SchemaError("two_good_q: requires n = 2");
      TwoGoodQ t;
      t.z = require_vector(require_field(j, "z"), "z");
      const Json& q = require_field(j, "q");
      if (!q.is_array()) throw SchemaError("two_good_q: q must be an array");
      for (const Json& v : q) {
        if (v.is_string() && v.get<std::string>() == "inf")
          t.q.push_back(kInf);
        else
          t.q.push_back(require_number(v, "q"));
      }
      return Preference(std::move(t));
    }
    if (kind == "mixture") {
      const Json& comps = require_field(j, "components");
      if (!comps.is_array() || comps.empty())
        throw SchemaError("mixture: components must be a nonempty array");
      Mixture m;
      for (const Json& c : comps) {
        m.weights.push_back(require_number(require_field(c, "weight"), "weight"));
        m.components.push_back(preference_from_json(require_field(c, "pref"), n));
      }
      return Preference(std::move(m));
    }
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  throw SchemaError("unknown preference kind \"" + kind + '"');
}

Json preference_file_to_json(const Preference& pref) {
  Json j;
  j["n"] = pref.dimension();
  j["pref"] = preference_to_json(pref);
  return j;
}

Preference preference_from_file_json(const Json& j) {
  const int n = static_cast<int>(require_number(require_field(j, "n"), "n"));
  if (n < 1) throw SchemaError("n must be at least 1");
  return preference_from_json(require_field(j, "pref"), n);
}

Json population_to_json(const Population& pop) {
  Json j;
  j["n"] = pop.dimension();
  Json agents = Json::array();
  for (const Agent& a : pop.agents) {
    Json aj;
    aj["budget"] = a.budget;
    aj["pref"] = preference_to_json(a.pref);
    agents.push_back(std::move(aj));
  }
  j["agents"] = std::move(agents);
  return j;
}

Population population_from_json(const Json& j) {
  const int n = static_cast<int>(require_number(require_field(j, "n"), "n"));
  if (n < 1) throw SchemaError("n must be at least 1");
  const Json& agents = require_field(j, "agents");
  if (!agents.is_array() || agents.empty())
    throw SchemaError("agents must be a nonempty array");
  Population pop;
  for (const Json& aj : agents) {
    const double budget = require_number(require_field(aj, "budget"), "budget");
    if (!(budget > 0)) throw SchemaError("budgets must be positive");
    pop.agents.push_back({preference_from_json(require_field(aj, "pref"), n), budget});
  }
  return pop;
}

MarketFile market_from_json(const Json& j) {
  MarketFile m{population_from_json(require_field(j, "population")),
               require_vector(require_field(j, "supply"), "supply"), 1e-8};
  if (j.contains("tol")) m.tol = require_number(j.at("tol"), "tol");
  if (!(m.tol > 0)) throw SchemaError("tol must be positive");
  if (m.supply.size() != static_cast<std::size_t>(m.population.dimension()))
    throw SchemaError("supply dimension does not match the population");
  for (double x : m.supply)
    if (!(x > 0)) throw SchemaError("supply must be strictly positive");
  return m;
}

Json equilibrium_to_json(const EquilibriumResult& r) {
  Json j;
  j["prices"] = vec_to_json(r.prices);
  Json alloc = Json::array();
  for (const Vec& x : r.allocations) alloc.push_back(vec_to_json(x));
  j["allocations"] = std::move(alloc);
  j["gap"] = r.gap;
  j["objective"] = r.objective;
  j["iterations"] = r.iterations;
  j["certified"] = r.certified;
  return j;
}

Json mrs_distribution_to_json(const MRSDistribution& mu) {
  Json j;
  Json atoms = Json::array();
  for (std::size_t k = 0; k < mu.t.size(); ++k) {
    Json a;
    a["t"] = mu.t[k];
    a["w"] = mu.w[k];
    atoms.push_back(std::move(a));
  }
  j["atoms"] = std::move(atoms);
  j["mass_zero"] = mu.mass_zero;
  j["mass_inf"] = mu.mass_inf;
  return j;
}

MRSDistribution mrs_distribution_from_json(const Json& j) {
  MRSDistribution mu;
  for (const Json& a : require_field(j, "atoms")) {
    mu.t.push_back(require_number(require_field(a, "t"), "t"));
    mu.w.push_back(require_number(require_field(a, "w"), "w"));
  }
  mu.mass_zero = require_number(require_field(j, "mass_zero"), "mass_zero");
  mu.mass_inf = require_number(require_field(j, "mass_inf"), "mass_inf");
  mu.validate();
  return mu;
}

Json ratio_density_to_json(const RatioDensity& nu) {
  Json j;
  if (!nu.atoms.empty()) {
    Json atoms = Json::array();
    for (const auto& [z, w] : nu.atoms) {
      Json a;
      a["z"] = z;
      a["w"] = w;
      atoms.push_back(std::move(a));
    }
    j["atoms"] = std::move(atoms);
    return j;
  }
  if (!std::isnan(nu.A)) {
    j["family"] = "ces_complements";
    j["A"] = nu.A;
    j["sigma"] = nu.sigma;
    return j;
  }
  throw SchemaError("only closed-form or atomic ratio densities serialize");
}

RatioDensity ratio_density_from_json(const Json& j) {
  if (j.contains("atoms")) {
    RatioDensity nu;
    for (const Json& a : j.at("atoms"))
      nu.atoms.emplace_back(require_number(require_field(a, "z"), "z"),
                            require_number(require_field(a, "w"), "w"));
    return nu;
  }
  const Json& fam = require_field(j, "family");
  if (!fam.is_string() || fam.get<std::string>() != "ces_complements")
    throw SchemaError("unknown ratio density family");
  try {
    return ratio_density_from_A_sigma(require_number(require_field(j, "A"), "A"),
                                      require_number(require_field(j, "sigma"), "sigma"));
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
}

Json welfare_range_to_json(const WelfareRange& r) {
  Json j;
  j["lower"] = r.lower;
  j["upper"] = r.upper;
  if (r.lower_witness || r.upper_witness) {
    Json w;
    if (r.lower_witness) w["lower"] = population_to_json(*r.lower_witness);
    if (r.upper_witness) w["upper"] = population_to_json(*r.upper_witness);
    j["witnesses"] = std::move(w);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Deterministic writer
// ---------------------------------------------------------------------------

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

void escape_string(const std::string& s, std::string* out) {
  out->push_back('"');
  for (char c : s) {
    switch (c) {
      case '"': *out += "\\\""; break;
      case '\\': *out += "\\\\"; break;
      case '\n': *out += "\\n"; break;
      case '\t': *out += "\\t"; break;
      case '\r': *out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          *out += buf;
        } else {
          out->push_back(c);
        }
    }
  }
  out->push_back('"');
}

void dump_value(const Json& j, int indent, std::string* out) {
  const std::string pad(2 * indent, ' ');
  const std::string pad_in(2 * (indent + 1), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        *out += "{}";
        return;
      }
      *out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) *out += ",\n";
        first = false;
        *out += pad_in;
        escape_string(it.key(), out);
        *out += ": ";
        dump_value(it.value(), indent + 1, out);
      }
      *out += "\n" + pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        *out += "[]";
        return;
      }
      *out += "[\n";
      bool first = true;
      for (const Json& v : j) {
        if (!first) *out += ",\n";
        first = false;
        *out += pad_in;
        dump_value(v, indent + 1, out);
      }
      *out += "\n" + pad + "]";
      return;
    }
    case Json::value_t::string:
      escape_string(j.get<std::string>(), out);
      return;
    case Json::value_t::boolean:
      *out += j.get<bool>() ? "true" : "false";
      return;
    case Json::value_t::number_integer:
      *out += std::to_string(j.get<std::int64_t>());
      return;
    case Json::value_t::number_unsigned:
      *out += std::to_string(j.get<std::uint64_t>());
      return;
    case Json::value_t::number_float:
      *out += format_double(j.get<double>());
      return;
    default:
      *out += "null";
      return;
  }
}

}  // namespace

std::string dump_json(const Json& j) {
  std::string out;
  dump_value(j, 0, &out);
  out += "\n";
  return out;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open input file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw SchemaError(std::string("json parse error in ") + path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

}  // namespace homagg
