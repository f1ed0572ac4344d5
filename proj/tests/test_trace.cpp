#include <sstream>

#include "decomp/trace.hpp"
#include "doctest.h"

using namespace decomp;

namespace {

BoundTrace sample_trace() {
  BoundTrace t;
  t.records.push_back({0.0, 0, 0.0, 100.0, 3, "dw"});
  t.records.push_back({20.0, 1, 10.0, 50.0, 9, "dw"});
  t.termination = "converged";
  return t;
}

}  // namespace

TEST_CASE("trace CSV round-trips") {
  auto trace = sample_trace();
  std::stringstream ss;
  write_trace_csv(trace, ss);
  auto back = read_trace_csv(ss);
  CHECK(back.termination == "converged");
  REQUIRE(back.records.size() == 2);
  CHECK(back.records[1].time_s == 20.0);
  CHECK(back.records[1].lower_bound == 10.0);
  CHECK(back.records[1].oracle_calls == 9);
  CHECK(back.records[1].method == "dw");

  std::stringstream again;
  write_trace_csv(back, again);
  CHECK(again.str() == ss.str());
}

TEST_CASE("header and rows are validated") {
  std::stringstream bad("nope\n");
  CHECK_THROWS_AS(read_trace_csv(bad), TraceFormatError);
  std::stringstream short_row(
      "time_s,iteration,lower_bound,upper_bound,oracle_calls,method\n1,2\n");
  CHECK_THROWS_AS(read_trace_csv(short_row), TraceFormatError);
}

TEST_CASE("resampling interpolates linearly") {
  auto s = resample_trace(sample_trace(), 10.0);
  REQUIRE(s.size() == 3);  // t = 0, 10, 20
  CHECK(s[1].time_s == 10.0);
  CHECK(s[1].lower_bound == doctest::Approx(5.0));
  CHECK(s[1].upper_bound == doctest::Approx(75.0));
  CHECK(s[2].time_s == 20.0);
  CHECK(s[2].lower_bound == doctest::Approx(10.0));
}

TEST_CASE("resampling clamps at the ends") {
  auto trace = sample_trace();
  trace.records[0].time_s = 5.0;  // nothing before t=5
  auto s = resample_trace(trace, 2.0);
  CHECK(s[0].time_s == 0.0);
  CHECK(s[0].lower_bound == 0.0);
  CHECK(s[0].upper_bound == 100.0);
  CHECK(s.back().time_s == 20.0);
}

TEST_CASE("interval beyond the horizon still keeps both ends") {
  auto s = resample_trace(sample_trace(), 1000.0);
  REQUIRE(s.size() == 2);
  CHECK(s[0].time_s == 0.0);
  CHECK(s[1].time_s == 20.0);
}

TEST_CASE("constant traces resample to constants") {
  BoundTrace t;
  t.records.push_back({0.0, 0, 4.0, 4.0, 0, "dw"});
  t.records.push_back({9.0, 1, 4.0, 4.0, 0, "dw"});
  for (const auto& p : resample_trace(t, 3.0)) {
    CHECK(p.lower_bound == 4.0);
    CHECK(p.upper_bound == 4.0);
  }
}

TEST_CASE("bootstrap degenerate cases") {
  std::vector<double> constant{3.0, 3.0, 3.0};
  auto ci = bootstrap_ci(constant, 200, 0.95, 1);
  CHECK(ci.lower == 3.0);
  CHECK(ci.upper == 3.0);
  CHECK(ci.mean == 3.0);

  std::vector<double> single{7.5};
  ci = bootstrap_ci(single, 200, 0.95, 1);
  CHECK(ci.lower == 7.5);
  CHECK(ci.upper == 7.5);
}

TEST_CASE("bootstrap of a two-point sample") {
  std::vector<double> two{0.0, 10.0};
  auto ci = bootstrap_ci(two, 1000, 0.95, 42);
  CHECK(ci.mean == doctest::Approx(5.0));
  CHECK(ci.lower >= 0.0);
  CHECK(ci.upper <= 10.0);
  CHECK(ci.lower <= 5.0);
  CHECK(ci.upper >= 5.0);
  // deterministic in the seed
  auto again = bootstrap_ci(two, 1000, 0.95, 42);
  CHECK(again.lower == ci.lower);
  CHECK(again.upper == ci.upper);
}
