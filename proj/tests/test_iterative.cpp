#include <random>

#include "decomp/iterative.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace decomp;
using namespace testutil;

namespace {

BlockPoint make_outer(std::mt19937_64& rng, const BlockData& block) {
  std::uniform_real_distribution<double> ud(0.2, 0.8);
  BlockPoint p;
  for (int k = 0; k < block.size(); ++k) p.flows.push_back(ud(rng));
  p.overflow = 0.0;
  return p;
}

}  // namespace

TEST_CASE("segment intersection solves the linear crossing") {
  Cut cut{{1.0, 1.0}, 0.0, 1.0};
  BlockPoint outer{{1.0, 1.0}, 0.0};   // violation 1
  BlockPoint anchor{{0.0, 0.0}, 0.0};  // violation -1
  auto hit = segment_intersection(outer, anchor, cut);
  CHECK(hit.t == doctest::Approx(0.5));
  CHECK(hit.point.flows[0] == doctest::Approx(0.5));

  // cut value constant along the segment -> degenerate
  Cut parallel{{1.0, -1.0}, 0.0, -1.0};
  CHECK_THROWS_AS(segment_intersection(outer, anchor, parallel),
                  DegenerateIntersection);
}

TEST_CASE("iterative separation returns valid boundary-anchored cuts") {
  std::mt19937_64 rng(41);
  int separated = 0;
  for (int trial = 0; trial < 120; ++trial) {
    BlockData block = random_block(rng, 6, 40);
    BlockPoint anchor = random_inner_point(rng, block, 0.05);
    BlockPoint outer = make_outer(rng, block);
    auto res = directional_separate_iterative(outer, anchor, block);
    if (!res) {
      CHECK(in_polyhedron(block, outer, 2e-6));
      continue;
    }
    ++separated;
    CHECK(max_cut_violation(block, res->sep.cut) <= 1e-6);
    CHECK(res->sep.violation > 0);
    CHECK(res->boundary_t > 0.0);
    CHECK(res->boundary_t <= 1.0);
    // facet-count bound on the iteration count: one facet crossed per step
    CHECK(res->iterations <= (1 << block.size()) + block.size() + 2);

    // the boundary point is feasible (within tolerance)
    BlockPoint boundary;
    const double t = res->boundary_t;
    for (int k = 0; k < block.size(); ++k)
      boundary.flows.push_back(outer.flows[k] +
                               t * (anchor.flows[k] - outer.flows[k]));
    boundary.overflow = outer.overflow + t * (anchor.overflow - outer.overflow);
    CHECK(in_polyhedron(block, boundary, 1e-5));
  }
  CHECK(separated > 40);
}

TEST_CASE("iterative matches direct directional separation") {
  std::mt19937_64 rng(42);
  int compared = 0;
  for (int trial = 0; trial < 120; ++trial) {
    BlockData block = random_block(rng, 6, 40);
    BlockPoint anchor = random_inner_point(rng, block, 0.05);
    BlockPoint outer = make_outer(rng, block);
    auto iter = directional_separate_iterative(outer, anchor, block);
    if (!iter) continue;
    std::optional<SeparationResult> direct;
    try {
      direct = separate(outer, block, Normalization::directional(anchor));
    } catch (const UnboundedSeparation&) {
      continue;
    }
    if (!direct) continue;
    auto hit = segment_intersection(outer, anchor, direct->cut);
    CHECK(std::fabs(hit.t - iter->boundary_t) <= 1e-6);
    ++compared;
  }
  CHECK(compared > 30);
}

TEST_CASE("inside points short-circuit") {
  std::mt19937_64 rng(43);
  BlockData block = random_block(rng, 5, 30);
  BlockPoint anchor = random_inner_point(rng, block, 0.3);
  BlockPoint inner = random_inner_point(rng, block, 0.7);
  CHECK(!directional_separate_iterative(inner, anchor, block));
}
