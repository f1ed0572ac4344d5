#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "decomp/trace.hpp"
#include "decomp/ufp.hpp"
#include "doctest.h"

namespace {

std::string cli() { return DECOMP_CLI_PATH; }

int run(const std::string& args) {
  const int rc = std::system((cli() + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/decomp_cli_XXXXXX";
    path = mkdtemp(tmpl);
  }
  ~TempDir() {
    if (std::system(("rm -rf " + path).c_str()) != 0) {}
  }
  std::string file(const std::string& name) const { return path + "/" + name; }
};

}  // namespace

TEST_CASE("generate is deterministic and validates flags") {
  TempDir tmp;
  const std::string a = tmp.file("a.json"), b = tmp.file("b.json");
  CHECK(run("generate --nodes 20 --dmax 100 --capacity 1000 --seed 7 -o " + a) == 0);
  CHECK(run("generate --nodes 20 --dmax 100 --capacity 1000 --seed 7 -o " + b) == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(!slurp(a).empty());

  CHECK(run("generate --nodes 20 --dmax 2000 --capacity 1000 --seed 7 -o " +
            tmp.file("c.json")) == 2);
  CHECK(run("generate --nodes 20") == 2);  // missing required flags
  CHECK(run("bogus-subcommand") == 2);

  // generated file parses back
  auto inst = decomp::load_instance(a);
  CHECK(inst.nodes == 20);
  CHECK(!inst.commodities.empty());
}

TEST_CASE("solve writes traces and exact-enum pins both bounds") {
  TempDir tmp;
  const std::string inst = tmp.file("i.json");
  REQUIRE(run("generate --nodes 10 --dmax 40 --capacity 40 --seed 3 "
              "--max-commodities 6 --perturb-rounds -1 -o " + inst) == 0);

  const std::string enum_trace = tmp.file("enum.csv");
  CHECK(run("solve --instance " + inst + " --method exact-enum --trace " +
            enum_trace) == 0);
  auto et = decomp::load_trace(enum_trace);
  REQUIRE(et.records.size() == 1);
  CHECK(et.records[0].lower_bound == et.records[0].upper_bound);
  CHECK(et.termination == "converged");

  const std::string dw_trace = tmp.file("dw.csv");
  CHECK(run("solve --instance " + inst + " --method dw --trace " + dw_trace) == 0);
  auto dt = decomp::load_trace(dw_trace);
  REQUIRE(!dt.records.empty());
  CHECK(dt.termination == "converged");
  const auto& last = dt.records.back();
  CHECK(std::abs(last.lower_bound - et.records[0].lower_bound) <= 2e-3);
  CHECK(last.upper_bound - last.lower_bound <= 1e-3 + 1e-12);

  CHECK(run("solve --instance " + tmp.file("missing.json") +
            " --method dw") == 2);
  CHECK(run("solve --instance " + inst + " --method nope") == 2);
}

TEST_CASE("compare reports per-method gaps") {
  TempDir tmp;
  const std::string inst = tmp.file("i.json");
  REQUIRE(run("generate --nodes 9 --dmax 30 --capacity 30 --seed 5 "
              "--max-commodities 6 -o " + inst) == 0);
  const int rc = std::system((cli() + " compare --instance " + inst +
                              " --methods dw,fenchel > " + tmp.file("out.txt") +
                              " 2>&1")
                                 .c_str());
  CHECK(WEXITSTATUS(rc) == 0);
  const std::string out = slurp(tmp.file("out.txt"));
  CHECK(out.find("exact-enum value=") != std::string::npos);
  CHECK(out.find("dw ") != std::string::npos);
  CHECK(out.find("fenchel ") != std::string::npos);
}

TEST_CASE("aggregating identical traces gives zero-width intervals") {
  TempDir tmp;
  decomp::BoundTrace t;
  t.records.push_back({0.0, 0, 0.0, 10.0, 1, "dw"});
  t.records.push_back({4.0, 1, 6.0, 8.0, 2, "dw"});
  t.termination = "converged";
  decomp::save_trace(t, tmp.file("t1.csv"));
  decomp::save_trace(t, tmp.file("t2.csv"));
  decomp::save_trace(t, tmp.file("t3.csv"));

  const std::string out = tmp.file("agg.csv");
  CHECK(run("aggregate " + tmp.file("t1.csv") + " " + tmp.file("t2.csv") + " " +
            tmp.file("t3.csv") + " --interval 1 -o " + out) == 0);
  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "time_s,runs,lb_mean,lb_ci_low,lb_ci_high,ub_mean,ub_ci_low,ub_ci_high");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string f;
    std::vector<double> v;
    while (std::getline(ss, f, ',')) v.push_back(std::stod(f));
    REQUIRE(v.size() == 8);
    CHECK(v[1] == 3);
    CHECK(v[3] == v[2]);  // lb ci collapses onto the mean
    CHECK(v[4] == v[2]);
    CHECK(v[6] == v[5]);
    CHECK(v[7] == v[5]);
  }
  CHECK(rows == 5);  // t = 0,1,2,3 plus the horizon sample
}
