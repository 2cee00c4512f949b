#pragma once
// JSON schemas for the file formats the CLI speaks, plus a deterministic
// writer.  Parsing uses nlohmann::json; emission goes through dump_json(),
// which prints every floating-point number with 17 significant digits so
// outputs are byte-identical across runs and round-trip losslessly.
//
// Preference objects:
//   {"kind":"linear","v":[...]}                {"kind":"leontief","v":[...]}
//   {"kind":"cobb_douglas","a":[...]}          {"kind":"ces","a":[...],"sigma":s}
//   {"kind":"translog","alpha":a,"beta":b}     {"kind":"pwl","coeffs":[[...],...]}
//   {"kind":"two_good_q","z":[...],"q":[...]}  ("inf" allowed in q)
//   {"kind":"mixture","components":[{"weight":w,"pref":{...}},...]}
// Files:
//   preference: {"n":int,"pref":{...}}
//   population: {"n":int,"agents":[{"budget":b,"pref":{...}},...]}
//   market:     {"population":{...},"supply":[...],"tol":t}
// sigma values inside [1-1e-9, 1+1e-9] are rejected at parse time.

#include <string>

#include <json.hpp>

#include "homagg/decompose.hpp"
#include "homagg/fisher.hpp"
#include "homagg/prefcore.hpp"
#include "homagg/welfare.hpp"

namespace homagg {

using Json = nlohmann::json;

/// Schema violations raise this (the CLI maps it to exit code 2).
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json preference_to_json(const Preference& pref);
Preference preference_from_json(const Json& j, int n);

Json preference_file_to_json(const Preference& pref);
Preference preference_from_file_json(const Json& j);

Json population_to_json(const Population& pop);
Population population_from_json(const Json& j);

struct MarketFile {
  Population population;
  Vec supply;
  double tol = 1e-8;
};
MarketFile market_from_json(const Json& j);

Json equilibrium_to_json(const EquilibriumResult& r);
Json mrs_distribution_to_json(const MRSDistribution& mu);
MRSDistribution mrs_distribution_from_json(const Json& j);
Json ratio_density_to_json(const RatioDensity& nu);
RatioDensity ratio_density_from_json(const Json& j);
Json welfare_range_to_json(const WelfareRange& r);

/// Deterministic serialization: keys in sorted order (nlohmann's default
/// object ordering), doubles with "%.17g", two-space indentation.
std::string dump_json(const Json& j);

Json load_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// "%.17g" formatting used for every number the CLI emits.
std::string format_double(double x);

}  // namespace homagg
