#include "decomp/ufp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>

#include "json.hpp"

namespace decomp {

namespace {

using json = nlohmann::json;

// rng() % n keeps the stream identical across standard libraries, which
// std::shuffle / distributions would not.
std::uint64_t rand_below(std::mt19937_64& rng, std::uint64_t n) {
  return rng() % n;
}

std::vector<std::vector<int>> out_arcs_by_node(const UfpInstance& inst) {
  std::vector<std::vector<int>> out(inst.nodes);
  for (size_t a = 0; a < inst.arcs.size(); ++a)
    out[inst.arcs[a].tail].push_back(static_cast<int>(a));
  return out;  // arc ids ascending because arcs are scanned in order
}

void validate_params(const GeneratorParams& p) {
  if (p.nodes < 3) throw std::invalid_argument("need at least 3 nodes");
  if (p.d_max < 1) throw std::invalid_argument("d_max must be >= 1");
  if (p.capacity < p.d_max)
    throw std::invalid_argument("capacity must be >= d_max");
  if (p.arc_density < 1.0)
    throw std::invalid_argument("arc density must be >= 1");
}

}  // namespace

UfpInstance generate_instance(const GeneratorParams& params,
                              std::uint64_t seed) {
  validate_params(params);
  std::mt19937_64 rng(seed);
  const int n = params.nodes;

  UfpInstance inst;
  inst.nodes = n;
  inst.seed = seed;
  inst.params = params;

  // Hamiltonian cycle on a random permutation keeps every node reachable.
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rand_below(rng, i + 1)]);

  std::set<std::pair<int, int>> present;
  for (int i = 0; i < n; ++i) {
    const int u = perm[i], v = perm[(i + 1) % n];
    inst.arcs.push_back({u, v, params.capacity});
    present.insert({u, v});
  }
  const auto target = static_cast<size_t>(std::llround(params.arc_density * n));
  size_t attempts = 0;
  while (inst.arcs.size() < target && attempts < 1000 * target) {
    ++attempts;
    const int u = static_cast<int>(rand_below(rng, n));
    const int v = static_cast<int>(rand_below(rng, n));
    if (u == v || present.count({u, v})) continue;
    inst.arcs.push_back({u, v, params.capacity});
    present.insert({u, v});
  }

  // Route commodities through residual capacity: the instance stays feasible
  // and the routes double as a feasibility certificate.
  std::vector<std::int64_t> residual;
  for (const auto& a : inst.arcs) residual.push_back(a.capacity);
  const auto out = out_arcs_by_node(inst);
  const std::int64_t lo = std::max<std::int64_t>(1, params.d_max / 2);

  int fails = 0;
  while (fails < params.retry_limit &&
         (params.max_commodities < 0 ||
          static_cast<int>(inst.commodities.size()) < params.max_commodities)) {
    const int origin = static_cast<int>(rand_below(rng, n));

    // BFS over arcs with residual capacity, expanding in arc-id order.
    std::vector<int> parent_arc(n, -1);
    std::vector<char> seen(n, 0);
    seen[origin] = 1;
    std::deque<int> queue{origin};
    std::vector<int> reachable;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int a : out[u]) {
        if (residual[a] < 1) continue;
        const int v = inst.arcs[a].head;
        if (seen[v]) continue;
        seen[v] = 1;
        parent_arc[v] = a;
        reachable.push_back(v);
        queue.push_back(v);
      }
    }
    if (reachable.empty()) {
      ++fails;
      continue;
    }
    const int dest =
        reachable[rand_below(rng, reachable.size())];

    std::vector<int> path;
    for (int v = dest; v != origin; v = inst.arcs[parent_arc[v]].tail)
      path.push_back(parent_arc[v]);
    std::reverse(path.begin(), path.end());

    std::int64_t bottleneck = residual[path[0]];
    for (int a : path) bottleneck = std::min(bottleneck, residual[a]);
    const std::int64_t draw =
        lo + static_cast<std::int64_t>(rand_below(rng, params.d_max - lo + 1));
    const std::int64_t demand = std::min(bottleneck, draw);
    if (demand < 1) {
      ++fails;
      continue;
    }
    for (int a : path) residual[a] -= demand;
    inst.commodities.push_back({origin, dest, demand});
    inst.certificate_paths.push_back(std::move(path));
    fails = 0;
  }

  if (inst.commodities.empty())
    throw GenerationFailure("could not route any commodity");
  return inst;
}

UfpInstance perturb_capacities(UfpInstance instance, long rounds,
                               std::uint64_t seed) {
  if (rounds < 0) rounds = kPerturbRoundsPerNode * instance.nodes;
  if (instance.commodities.empty()) return instance;
  std::mt19937_64 rng(seed);
  const auto out = out_arcs_by_node(instance);

  for (long round = 0; round < rounds; ++round) {
    const auto& c = instance.commodities[rand_below(
        rng, instance.commodities.size())];
    const auto& candidates = out[c.origin];
    if (candidates.size() < 2) continue;
    const size_t i = rand_below(rng, candidates.size());
    size_t j = rand_below(rng, candidates.size() - 1);
    if (j >= i) ++j;
    const int plus = candidates[i], minus = candidates[j];
    if (instance.arcs[minus].capacity <= 1) continue;  // skip the whole round
    ++instance.arcs[plus].capacity;
    --instance.arcs[minus].capacity;
  }
  return instance;
}

std::vector<std::vector<int>> k_shortest_paths(const UfpInstance& instance,
                                               int origin, int destination,
                                               int k) {
  if (origin == destination)
    throw std::invalid_argument("origin equals destination");
  if (origin < 0 || origin >= instance.nodes || destination < 0 ||
      destination >= instance.nodes)
    throw std::invalid_argument("node id out of range");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  const auto out = out_arcs_by_node(instance);

  // Best-first enumeration of loopless paths; the heap order (hop count,
  // then lexicographic arc ids) is exactly the required path order.
  struct State {
    std::vector<int> arcs;
    std::vector<char> visited;
    int node;
  };
  auto later = [](const State& a, const State& b) {
    if (a.arcs.size() != b.arcs.size()) return a.arcs.size() > b.arcs.size();
    return a.arcs > b.arcs;
  };
  std::priority_queue<State, std::vector<State>, decltype(later)> heap(later);
  State start;
  start.visited.assign(instance.nodes, 0);
  start.visited[origin] = 1;
  start.node = origin;
  heap.push(std::move(start));

  std::vector<std::vector<int>> result;
  long pops = 0;
  while (!heap.empty() && static_cast<int>(result.size()) < k) {
    if (++pops > 2000000)
      throw NoPath("path enumeration budget exceeded");
    State s = heap.top();
    heap.pop();
    if (s.node == destination) {
      result.push_back(s.arcs);
      continue;
    }
    for (int a : out[s.node]) {
      const int v = instance.arcs[a].head;
      if (s.visited[v]) continue;
      State next = s;
      next.arcs.push_back(a);
      next.visited[v] = 1;
      next.node = v;
      heap.push(std::move(next));
    }
  }
  if (result.empty()) throw NoPath("destination unreachable");
  return result;
}

PathSet build_path_set(const UfpInstance& instance, int k) {
  PathSet ps;
  for (size_t c = 0; c < instance.commodities.size(); ++c) {
    const auto& com = instance.commodities[c];
    auto paths = k_shortest_paths(instance, com.origin, com.destination, k);
    if (c < instance.certificate_paths.size() &&
        !instance.certificate_paths[c].empty()) {
      const auto& cert = instance.certificate_paths[c];
      if (std::find(paths.begin(), paths.end(), cert) == paths.end())
        paths.push_back(cert);
    }
    ps.paths.push_back(std::move(paths));
  }
  return ps;
}

DecomposableProblem build_problem(const UfpInstance& instance,
                                  const PathSet& paths) {
  if (paths.paths.size() != instance.commodities.size())
    throw std::invalid_argument("path set does not match instance");
  DecomposableProblem prob;

  // x_{c,p} in [0,1] with convexity row per commodity.
  std::vector<std::vector<int>> path_var(instance.commodities.size());
  for (size_t c = 0; c < instance.commodities.size(); ++c) {
    if (paths.paths[c].empty()) throw NoPath("commodity has no path");
    RowSpec convexity;
    convexity.sense = Sense::Eq;
    convexity.rhs = 1.0;
    for (size_t p = 0; p < paths.paths[c].size(); ++p) {
      const int var = static_cast<int>(prob.vars.size());
      prob.vars.push_back({0.0, 1.0, 0.0});
      path_var[c].push_back(var);
      convexity.coeffs.push_back({var, 1.0});
    }
    prob.rows.push_back(std::move(convexity));
  }

  // arc -> commodity -> path vars crossing it
  std::map<int, std::map<int, std::vector<int>>> usage;
  for (size_t c = 0; c < instance.commodities.size(); ++c)
    for (size_t p = 0; p < paths.paths[c].size(); ++p)
      for (int a : paths.paths[c][p])
        usage[a][static_cast<int>(c)].push_back(path_var[c][p]);

  for (const auto& [arc, by_commodity] : usage) {
    const int delta = static_cast<int>(prob.vars.size());
    prob.vars.push_back({0.0, kInf, 1.0});  // overflow, unit cost

    ProblemBlock block;
    block.data.capacity = instance.arcs[arc].capacity;
    for (const auto& [c, vars] : by_commodity) {
      block.data.demands.push_back(instance.commodities[c].demand);
      LinearExpr expr;
      for (int v : vars) expr.terms.push_back({v, 1.0});
      block.flow_exprs.push_back(std::move(expr));
    }
    block.overflow_expr.terms.push_back({delta, 1.0});
    prob.blocks.push_back(std::move(block));
  }
  return prob;
}

void write_instance_json(const UfpInstance& inst, std::ostream& out) {
  json j;
  j["nodes"] = inst.nodes;
  j["arcs"] = json::array();
  for (const auto& a : inst.arcs)
    j["arcs"].push_back({{"tail", a.tail},
                         {"head", a.head},
                         {"capacity", a.capacity}});
  j["commodities"] = json::array();
  for (const auto& c : inst.commodities)
    j["commodities"].push_back({{"origin", c.origin},
                                {"destination", c.destination},
                                {"demand", c.demand}});
  j["metadata"] = {
      {"seed", inst.seed},
      {"params",
       {{"nodes", inst.params.nodes},
        {"d_max", inst.params.d_max},
        {"capacity", inst.params.capacity},
        {"arc_density", inst.params.arc_density},
        {"max_commodities", inst.params.max_commodities},
        {"retry_limit", inst.params.retry_limit}}},
      {"certificate_paths", inst.certificate_paths}};
  out << j.dump(2) << '\n';
}

UfpInstance read_instance_json(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InstanceFormatError(std::string("bad instance JSON: ") + e.what());
  }
  try {
    UfpInstance inst;
    inst.nodes = j.at("nodes").get<int>();
    for (const auto& a : j.at("arcs"))
      inst.arcs.push_back({a.at("tail").get<int>(), a.at("head").get<int>(),
                           a.at("capacity").get<std::int64_t>()});
    for (const auto& c : j.at("commodities"))
      inst.commodities.push_back({c.at("origin").get<int>(),
                                  c.at("destination").get<int>(),
                                  c.at("demand").get<std::int64_t>()});
    if (j.contains("metadata")) {
      const auto& m = j["metadata"];
      inst.seed = m.value("seed", std::uint64_t{0});
      if (m.contains("params")) {
        const auto& p = m["params"];
        inst.params.nodes = p.value("nodes", inst.nodes);
        inst.params.d_max = p.value("d_max", std::int64_t{0});
        inst.params.capacity = p.value("capacity", std::int64_t{0});
        inst.params.arc_density = p.value("arc_density", 3.0);
        inst.params.max_commodities = p.value("max_commodities", -1);
        inst.params.retry_limit = p.value("retry_limit", 50);
      }
      if (m.contains("certificate_paths"))
        inst.certificate_paths =
            m["certificate_paths"].get<std::vector<std::vector<int>>>();
    }

    if (inst.nodes < 1) throw InstanceFormatError("bad node count");
    for (const auto& a : inst.arcs)
      if (a.tail < 0 || a.tail >= inst.nodes || a.head < 0 ||
          a.head >= inst.nodes || a.capacity < 1)
        throw InstanceFormatError("bad arc");
    for (const auto& c : inst.commodities)
      if (c.origin < 0 || c.origin >= inst.nodes || c.destination < 0 ||
          c.destination >= inst.nodes || c.demand < 1)
        throw InstanceFormatError("bad commodity");
    return inst;
  } catch (const json::exception& e) {
    throw InstanceFormatError(std::string("bad instance JSON: ") + e.what());
  }
}

void save_instance(const UfpInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InstanceFormatError("cannot open for writing: " + path);
  write_instance_json(inst, out);
}

UfpInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InstanceFormatError("cannot open instance: " + path);
  return read_instance_json(in);
}

}  // namespace decomp
