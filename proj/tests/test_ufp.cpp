#include <random>
#include <set>
#include <sstream>

#include "decomp/ufp.hpp"
#include "doctest.h"

using namespace decomp;

namespace {

GeneratorParams params(int nodes, std::int64_t dmax, std::int64_t cap) {
  GeneratorParams p;
  p.nodes = nodes;
  p.d_max = dmax;
  p.capacity = cap;
  return p;
}

std::string dump(const UfpInstance& inst) {
  std::ostringstream os;
  write_instance_json(inst, os);
  return os.str();
}

// all loopless paths by DFS, then sort by (length, lexicographic arc ids)
void dfs_paths(const UfpInstance& inst,
               const std::vector<std::vector<int>>& out, int node, int dest,
               std::vector<char>& visited, std::vector<int>& arcs,
               std::vector<std::vector<int>>& found) {
  if (node == dest) {
    found.push_back(arcs);
    return;
  }
  for (int a : out[node]) {
    const int v = inst.arcs[a].head;
    if (visited[v]) continue;
    visited[v] = 1;
    arcs.push_back(a);
    dfs_paths(inst, out, v, dest, visited, arcs, found);
    arcs.pop_back();
    visited[v] = 0;
  }
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  auto a = generate_instance(params(15, 50, 200), 7);
  auto b = generate_instance(params(15, 50, 200), 7);
  CHECK(dump(a) == dump(b));
  auto c = generate_instance(params(15, 50, 200), 8);
  CHECK(dump(a) != dump(c));
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(generate_instance(params(2, 50, 200), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_instance(params(10, 2000, 1000), 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_instance(params(10, 0, 200), 1),
                  std::invalid_argument);
}

TEST_CASE("certificate paths route all demand within capacity") {
  auto inst = generate_instance(params(12, 60, 150), 3);
  REQUIRE(inst.certificate_paths.size() == inst.commodities.size());
  std::vector<std::int64_t> load(inst.arcs.size(), 0);
  for (size_t c = 0; c < inst.commodities.size(); ++c) {
    const auto& com = inst.commodities[c];
    const auto& path = inst.certificate_paths[c];
    REQUIRE(!path.empty());
    CHECK(inst.arcs[path.front()].tail == com.origin);
    CHECK(inst.arcs[path.back()].head == com.destination);
    for (size_t i = 1; i < path.size(); ++i)
      CHECK(inst.arcs[path[i - 1]].head == inst.arcs[path[i]].tail);
    for (int a : path) load[a] += com.demand;
  }
  for (size_t a = 0; a < inst.arcs.size(); ++a)
    CHECK(load[a] <= inst.arcs[a].capacity);
}

TEST_CASE("graph density and connectivity") {
  auto inst = generate_instance(params(20, 50, 200), 5);
  CHECK(inst.arcs.size() >= static_cast<size_t>(3 * 20));
  std::set<std::pair<int, int>> uniq;
  for (const auto& a : inst.arcs) {
    CHECK(a.tail != a.head);
    CHECK(uniq.insert({a.tail, a.head}).second);
  }
  // the embedded cycle guarantees every pair is connected
  for (int v = 1; v < inst.nodes; ++v)
    CHECK(!k_shortest_paths(inst, 0, v, 1).empty());
}

TEST_CASE("perturbation preserves total capacity and the floor of 1") {
  auto inst = generate_instance(params(12, 40, 100), 9);
  std::int64_t before = 0;
  for (const auto& a : inst.arcs) before += a.capacity;
  auto shaken = perturb_capacities(inst, -1, 17);
  std::int64_t after = 0;
  for (const auto& a : shaken.arcs) {
    after += a.capacity;
    CHECK(a.capacity >= 1);
  }
  CHECK(before == after);
  CHECK(dump(perturb_capacities(inst, -1, 17)) == dump(shaken));
}

TEST_CASE("k shortest paths match exhaustive enumeration") {
  std::mt19937_64 seeds(61);
  for (int trial = 0; trial < 8; ++trial) {
    auto inst = generate_instance(params(8, 20, 60), seeds());
    std::vector<std::vector<int>> out(inst.nodes);
    for (size_t a = 0; a < inst.arcs.size(); ++a)
      out[inst.arcs[a].tail].push_back(static_cast<int>(a));

    for (int origin = 0; origin < inst.nodes; ++origin) {
      for (int dest = 0; dest < inst.nodes; ++dest) {
        if (origin == dest) continue;
        std::vector<std::vector<int>> found;
        std::vector<char> visited(inst.nodes, 0);
        std::vector<int> arcs;
        visited[origin] = 1;
        dfs_paths(inst, out, origin, dest, visited, arcs, found);
        std::sort(found.begin(), found.end(),
                  [](const auto& a, const auto& b) {
                    if (a.size() != b.size()) return a.size() < b.size();
                    return a < b;
                  });
        const int k = 4;
        if (found.size() > static_cast<size_t>(k)) found.resize(k);
        auto got = k_shortest_paths(inst, origin, dest, k);
        CHECK(got == found);
      }
    }
  }
}

TEST_CASE("unreachable destinations raise NoPath") {
  UfpInstance inst;
  inst.nodes = 3;
  inst.arcs.push_back({0, 1, 10});
  CHECK_THROWS_AS(k_shortest_paths(inst, 0, 2, 2), NoPath);
  CHECK_THROWS_AS(k_shortest_paths(inst, 0, 0, 2), std::invalid_argument);
}

TEST_CASE("path sets include the certificate path") {
  auto inst = generate_instance(params(12, 60, 80), 13);
  auto ps = build_path_set(inst, 4);
  REQUIRE(ps.paths.size() == inst.commodities.size());
  for (size_t c = 0; c < ps.paths.size(); ++c) {
    CHECK(!ps.paths[c].empty());
    CHECK(ps.paths[c].size() <= 5);  // 4 shortest + possibly the certificate
    CHECK(std::find(ps.paths[c].begin(), ps.paths[c].end(),
                    inst.certificate_paths[c]) != ps.paths[c].end());
  }
}

TEST_CASE("arc-path model shape") {
  auto inst = generate_instance(params(10, 40, 100), 19);
  auto ps = build_path_set(inst, 4);
  auto prob = build_problem(inst, ps);

  size_t path_vars = 0;
  for (const auto& p : ps.paths) path_vars += p.size();
  CHECK(prob.vars.size() == path_vars + prob.blocks.size());
  CHECK(prob.rows.size() == inst.commodities.size());

  // only overflow variables carry cost
  size_t costed = 0;
  for (const auto& v : prob.vars)
    if (v.cost != 0.0) ++costed;
  CHECK(costed == prob.blocks.size());

  for (const auto& blk : prob.blocks) {
    CHECK(blk.data.size() >= 1);
    CHECK(blk.data.capacity >= 1);
    CHECK(blk.flow_exprs.size() == static_cast<size_t>(blk.data.size()));
  }
}

TEST_CASE("instance JSON round-trips") {
  auto inst = generate_instance(params(9, 30, 90), 23);
  std::stringstream ss;
  write_instance_json(inst, ss);
  auto back = read_instance_json(ss);
  CHECK(dump(back) == dump(inst));
}

TEST_CASE("malformed instance JSON is rejected") {
  std::stringstream broken("{\"nodes\": 3, \"arcs\": [{\"tail\": 9}]}");
  CHECK_THROWS_AS(read_instance_json(broken), InstanceFormatError);
  std::stringstream notjson("not json at all");
  CHECK_THROWS_AS(read_instance_json(notjson), InstanceFormatError);
}
