#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homagg/json_io.hpp"
#include "test_util.hpp"

using namespace homagg;
using homagg::testing::Rng;
using homagg::testing::random_preference;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("homagg_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string cmd = std::string(HOMAGG_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE_BEGIN("json_cli");

TEST_CASE("preference JSON round-trips to an equal value") {
  Rng rng(501);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + rng.pick(3);
    const Preference pref = random_preference(rng, n, false);
    const Json j = preference_to_json(pref);
    const Preference back = preference_from_json(j, n);
    CHECK(back == pref);
    // Text round-trip as well: 17 significant digits are lossless.
    const Json again = Json::parse(dump_json(j));
    CHECK(preference_from_json(again, n) == pref);
  }
}

TEST_CASE("share tables serialize infinity as a sentinel string") {
  const Preference pref(TwoGoodQ{{0.5, 2.0}, {1.0, kInf}});
  const Json j = preference_to_json(pref);
  CHECK(j["q"][1] == "inf");
  CHECK(preference_from_json(Json::parse(dump_json(j)), 2) == pref);
}

TEST_CASE("remaining families round-trip") {
  const Preference pwl(PiecewiseLinearE{{{1, 2, 0.5}, {2, 1, 1}}});
  CHECK(preference_from_json(Json::parse(dump_json(preference_to_json(pwl))), 3) == pwl);
  const Preference tl(Translog{0.4, 0.9});
  CHECK(preference_from_json(Json::parse(dump_json(preference_to_json(tl))), 2) == tl);
}

TEST_CASE("population and market schemas") {
  Population pop;
  pop.agents.push_back({Preference(Linear{{1, 0}}), 1.0});
  pop.agents.push_back({Preference(Linear{{0, 1}}), 2.0});
  const Json j = population_to_json(pop);
  const Population back = population_from_json(j);
  REQUIRE(back.agents.size() == 2);
  CHECK(back.agents[0].pref == pop.agents[0].pref);
  CHECK(back.agents[1].budget == 2.0);

  Json market;
  market["population"] = j;
  market["supply"] = Json::array({2.0, 4.0});
  market["tol"] = 1e-9;
  const MarketFile m = market_from_json(market);
  CHECK(m.supply[1] == 4.0);

  Json bad = market;
  bad["supply"] = Json::array({2.0, -1.0});
  CHECK_THROWS_AS(market_from_json(bad), SchemaError);
}

TEST_CASE("sigma near one is rejected at parse time") {
  Json j;
  j["kind"] = "ces";
  j["a"] = Json::array({0.5, 0.5});
  j["sigma"] = 1.0 + 5e-10;
  CHECK_THROWS_AS(preference_from_json(j, 2), SchemaError);
}

TEST_CASE("cli aggregate reproduces the single-minded example") {
  TempDir dir;
  Population pop;
  pop.agents.push_back({Preference(Linear{{1, 0}}), 1.0});
  pop.agents.push_back({Preference(Linear{{0, 1}}), 2.0});
  write_text_file(dir.file("pop.json"), dump_json(population_to_json(pop)));

  const int rc = run_cli("aggregate --in " + dir.file("pop.json") + " --out " +
                         dir.file("pref.json"));
  REQUIRE(rc == 0);
  const Json out = load_json_file(dir.file("pref.json"));
  CHECK(out["pref"]["kind"] == "cobb_douglas");
  const Preference agg = preference_from_file_json(out);
  REQUIRE(agg.is<CobbDouglas>());
  CHECK(agg.as<CobbDouglas>().a[0] == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("cli aggregate emits contour samples as CSV") {
  TempDir dir;
  Population pop;
  pop.agents.push_back({Preference(Linear{{1, 0}}), 1.0});
  pop.agents.push_back({Preference(Linear{{0, 1}}), 1.0});
  write_text_file(dir.file("pop.json"), dump_json(population_to_json(pop)));
  REQUIRE(run_cli("aggregate --in " + dir.file("pop.json") + " --out " +
                  dir.file("pref.json") + " --contour-csv " + dir.file("c.csv") +
                  " --contour-level 1 --contour-directions 12") == 0);
  std::ifstream in(dir.file("c.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "ray_angle,x1,x2");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    double angle = 0, x1 = 0, x2 = 0;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &angle, &x1, &x2) == 3);
    CHECK(x1 * x2 == doctest::Approx(0.25).epsilon(1e-8));  // geometric mean contour
    ++rows;
  }
  CHECK(rows == 12);
}

TEST_CASE("cli solve-fisher solves the cobb-douglas market") {
  TempDir dir;
  Population pop;
  pop.agents.push_back({Preference(CobbDouglas{{1.0 / 3, 2.0 / 3}}), 3.0});
  Json market;
  market["population"] = population_to_json(pop);
  market["supply"] = Json::array({1.0, 1.0});
  market["tol"] = 1e-8;
  write_text_file(dir.file("market.json"), dump_json(market));

  const int rc = run_cli("solve-fisher --in " + dir.file("market.json") +
                         " --tol 1e-8 --out " + dir.file("eq.json"));
  REQUIRE(rc == 0);
  const Json eq = load_json_file(dir.file("eq.json"));
  CHECK(eq["prices"][0].get<double>() == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(eq["prices"][1].get<double>() == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(eq["gap"].get<double>() <= 1e-8);
  CHECK(eq["certified"].get<bool>());
}

TEST_CASE("cli demand-curve writes a budget-consistent sweep") {
  TempDir dir;
  write_text_file(
      dir.file("pref.json"),
      dump_json(preference_file_to_json(Preference(CES{{0.5, 0.5}, 2.0}))));
  const int rc = run_cli("demand-curve --in " + dir.file("pref.json") +
                         " --good 1 --pmin 0.1 --pmax 10 --points 200 --out " +
                         dir.file("curve.csv"));
  REQUIRE(rc == 0);
  std::ifstream in(dir.file("curve.csv"));
  std::string header;
  std::getline(in, header);
  CHECK(header == "p,x1,x2");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    double p = 0, x1 = 0, x2 = 0;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &p, &x1, &x2) == 3);
    CHECK(std::abs(p * x1 + 1.0 * x2 - 1.0) < 1e-9);  // base price of good 2 is 1
    ++rows;
  }
  CHECK(rows == 200);
}

TEST_CASE("cli output is deterministic") {
  TempDir dir;
  write_text_file(
      dir.file("pref.json"),
      dump_json(preference_file_to_json(Preference(CES{{0.4, 0.6}, 3.0}))));
  for (int round = 0; round < 2; ++round) {
    REQUIRE(run_cli("decompose --in " + dir.file("pref.json") +
                    " --mode mrs --grid 64 --out " +
                    dir.file("mrs" + std::to_string(round) + ".json")) == 0);
    REQUIRE(run_cli("shares-curve --in " + dir.file("pref.json") +
                    " --points 64 --threads " + std::to_string(1 + round) +
                    " --out " + dir.file("s" + std::to_string(round) + ".csv")) == 0);
  }
  CHECK(slurp(dir.file("mrs0.json")) == slurp(dir.file("mrs1.json")));
  CHECK(slurp(dir.file("s0.csv")) == slurp(dir.file("s1.csv")));
}

TEST_CASE("cli exit codes") {
  TempDir dir;
  SUBCASE("schema errors exit 2") {
    write_text_file(dir.file("bad.json"), "{\"n\": 2}\n");
    CHECK(run_cli("aggregate --in " + dir.file("bad.json") + " --out " +
                  dir.file("x.json")) == 2);
  }
  SUBCASE("domain-membership failures exit 3") {
    write_text_file(
        dir.file("comp.json"),
        dump_json(preference_file_to_json(Preference(CES{{0.5, 0.5}, 0.5}))));
    CHECK(run_cli("decompose --in " + dir.file("comp.json") + " --mode mrs --out " +
                  dir.file("x.json")) == 3);
    CHECK(run_cli("check-membership --in " + dir.file("comp.json") +
                  " --check substitutes --out " + dir.file("r.json")) == 3);
  }
  SUBCASE("membership checks pass with exit 0") {
    write_text_file(
        dir.file("subs.json"),
        dump_json(preference_file_to_json(Preference(CES{{0.5, 0.5}, 2.0}))));
    CHECK(run_cli("check-membership --in " + dir.file("subs.json") +
                  " --check substitutes --out " + dir.file("r.json")) == 0);
  }
  SUBCASE("monte carlo checks require a seed") {
    write_text_file(
        dir.file("subs.json"),
        dump_json(preference_file_to_json(Preference(CES{{0.5, 0.5}, 2.0}))));
    CHECK(run_cli("check-membership --in " + dir.file("subs.json") +
                  " --check arum-mc --samples 20000") == 2);
    CHECK(run_cli("check-membership --in " + dir.file("subs.json") +
                  " --check arum-mc --samples 20000 --seed 5 --out " +
                  dir.file("mc.json")) == 0);
  }
}

TEST_CASE("cli welfare handles populations and bare preferences") {
  TempDir dir;
  Population pop;
  pop.agents.push_back({Preference(Linear{{0, 1}}), 2.0});
  pop.agents.push_back({Preference(Linear{{1, 0}}), 1.0});
  write_text_file(dir.file("pop.json"), dump_json(population_to_json(pop)));
  write_text_file(dir.file("agg.json"),
                  dump_json(preference_file_to_json(
                      Preference(CobbDouglas{{1.0 / 3, 2.0 / 3}}))));
  REQUIRE(run_cli("welfare --in " + dir.file("pop.json") +
                  " --kind ev --p0 1,64 --p1 32,32 --out " + dir.file("w1.json")) == 0);
  REQUIRE(run_cli("welfare --in " + dir.file("agg.json") +
                  " --kind ev --p0 1,64 --p1 32,32 --budget 3 --out " +
                  dir.file("w2.json")) == 0);
  CHECK(load_json_file(dir.file("w1.json"))["value"].get<double>() ==
        doctest::Approx(33.0 / 32).epsilon(1e-12));
  CHECK(load_json_file(dir.file("w2.json"))["value"].get<double>() ==
        doctest::Approx(-1.5).epsilon(1e-12));
}

TEST_CASE("cli welfare-range matches the library") {
  TempDir dir;
  write_text_file(dir.file("agg.json"),
                  dump_json(preference_file_to_json(
                      Preference(CobbDouglas{{1.0 / 3, 2.0 / 3}}))));
  REQUIRE(run_cli("welfare-range --in " + dir.file("agg.json") +
                  " --p0 1,64 --p1 32,32 --domain cobb-douglas --budget 3"
                  " --grid 10000 --out " + dir.file("range.json")) == 0);
  const Json r = load_json_file(dir.file("range.json"));
  CHECK(r["lower"].get<double>() == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(r["upper"].get<double>() == doctest::Approx(33.0 / 32).epsilon(1e-9));
  CHECK(r.contains("witnesses"));
}

TEST_SUITE_END();
