#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "decomp/decomposition.hpp"

namespace decomp {

inline constexpr int kDefaultPathCount = 4;
inline constexpr long kPerturbRoundsPerNode = 100;

struct Arc {
  int tail = 0;
  int head = 0;
  std::int64_t capacity = 0;
};

struct Commodity {
  int origin = 0;
  int destination = 0;
  std::int64_t demand = 0;
};

struct GeneratorParams {
  int nodes = 0;
  std::int64_t d_max = 0;
  std::int64_t capacity = 0;
  double arc_density = 3.0;   // arcs per node
  int max_commodities = -1;   // unlimited when negative
  int retry_limit = 50;       // consecutive failed commodity draws
};

struct UfpInstance {
  int nodes = 0;
  std::vector<Arc> arcs;
  std::vector<Commodity> commodities;
  // metadata
  std::uint64_t seed = 0;
  GeneratorParams params;
  std::vector<std::vector<int>> certificate_paths;  // arc ids, per commodity
};

/// Candidate routing paths per commodity (arc-id sequences).
struct PathSet {
  std::vector<std::vector<std::vector<int>>> paths;
};

struct GenerationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoPath : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InstanceFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Random instance: a Hamiltonian cycle densified with random arcs, then
/// commodities routed one by one through residual capacity so that the
/// instance is feasible by construction (the routing paths are kept as
/// certificate_paths).
UfpInstance generate_instance(const GeneratorParams& params, std::uint64_t seed);

/// Shifts one unit of capacity between two outgoing arcs of a random
/// commodity origin, `rounds` times (default when rounds < 0: 100 * nodes).
/// Rounds that would push a capacity below 1 are skipped entirely.
UfpInstance perturb_capacities(UfpInstance instance, long rounds,
                               std::uint64_t seed);

/// The k shortest loopless paths ordered by (hop count, lexicographic arc
/// ids). Throws NoPath when the destination is unreachable.
std::vector<std::vector<int>> k_shortest_paths(const UfpInstance& instance,
                                               int origin, int destination,
                                               int k);

/// k shortest paths per commodity, plus its certificate path when absent.
PathSet build_path_set(const UfpInstance& instance, int k);

/// Arc-path model: binary path choice per commodity, one overflow variable
/// per used arc, objective = total overflow. Each used arc becomes a block.
DecomposableProblem build_problem(const UfpInstance& instance,
                                  const PathSet& paths);

void write_instance_json(const UfpInstance& instance, std::ostream& out);
UfpInstance read_instance_json(std::istream& in);
void save_instance(const UfpInstance& instance, const std::string& path);
UfpInstance load_instance(const std::string& path);

}  // namespace decomp
