#include <random>

#include "decomp/separation.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace decomp;
using namespace testutil;

namespace {

const Normalization kNorms[] = {
    Normalization::l1(), Normalization::linf(), Normalization::rhs_bound(),
    Normalization::natural()};

BlockPoint outside_point(std::mt19937_64& rng, const BlockData& block) {
  // interior mixture with the overflow squeezed below feasibility
  std::uniform_real_distribution<double> ud(0.25, 0.75);
  BlockPoint p;
  double load = 0;
  for (int k = 0; k < block.size(); ++k) {
    p.flows.push_back(ud(rng));
    load += p.flows.back() * static_cast<double>(block.demands[k]);
  }
  p.overflow = 0.0;
  (void)load;
  return p;
}

}  // namespace

TEST_CASE("pinned two-commodity example") {
  BlockData block{{3, 4}, 5};
  BlockPoint p{{0.9, 0.9}, 0.0};
  auto res = separate(p, block, Normalization::natural());
  REQUIRE(res.has_value());
  // optimal natural cut is 2 f1 + 2 f2 - o <= 2, violated by 1.6
  CHECK(res->violation == doctest::Approx(1.6));
  CHECK(res->cut.rhs == doctest::Approx(2.0));
  CHECK(res->cut.coeffs[0] == doctest::Approx(2.0));
  CHECK(res->cut.coeffs[1] == doctest::Approx(2.0));
  CHECK(res->cut.overflow_coeff == doctest::Approx(-1.0));
  CHECK(max_cut_violation(block, res->cut) <= 1e-9);
  CHECK(res->tight_vertices.size() >= 2);
}

TEST_CASE("cuts from every normalization are valid and violated") {
  std::mt19937_64 rng(31);
  int produced = 0;
  for (int trial = 0; trial < 60; ++trial) {
    BlockData block = random_block(rng, 6, 40);
    BlockPoint p = outside_point(rng, block);
    const bool inside = in_polyhedron(block, p);
    for (const auto& norm : kNorms) {
      std::optional<SeparationResult> res;
      try {
        res = separate(p, block, norm);
      } catch (const UnboundedSeparation&) {
        // RhsBound cannot bound facets through the origin; the point must
        // really be outside for the violation to grow without limit.
        CHECK(!inside);
        continue;
      }
      if (!res) {
        // no violated cut implies the point really is inside
        CHECK(in_polyhedron(block, p, 2e-6));
        continue;
      }
      ++produced;
      CHECK(res->violation > 1e-6);
      CHECK(max_cut_violation(block, res->cut) <= 1e-6);
      CHECK(!inside);
      for (const auto& tv : res->tight_vertices)
        CHECK(std::fabs(res->cut.violation_at(tv)) <= 1e-6);
    }
  }
  CHECK(produced > 50);
}

TEST_CASE("interior points are certified as inside") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 40; ++trial) {
    BlockData block = random_block(rng, 5, 30);
    BlockPoint p = random_inner_point(rng, block, 0.5);
    for (const auto& norm : kNorms) CHECK(!separate(p, block, norm));
  }
}

TEST_CASE("directional normalization needs a direction") {
  BlockData block{{3, 4}, 5};
  BlockPoint p{{0.5, 0.5}, 0.0};
  CHECK_THROWS_AS(separate(p, block, Normalization::directional(p)),
                  UnboundedSeparation);
}

TEST_CASE("directional cuts separate toward the anchor") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 40; ++trial) {
    BlockData block = random_block(rng, 5, 30);
    BlockPoint anchor = random_inner_point(rng, block, 0.1);
    BlockPoint p = outside_point(rng, block);
    if (in_polyhedron(block, p)) continue;
    auto res = separate(p, block, Normalization::directional(anchor));
    REQUIRE(res.has_value());
    CHECK(res->violation > 1e-6);
    CHECK(max_cut_violation(block, res->cut) <= 1e-6);
    // the anchor itself satisfies the cut
    CHECK(res->cut.violation_at(anchor) <= 1e-6);
  }
}

TEST_CASE("dimensionality reduction fixes boundary coordinates") {
  BlockData block{{3, 4, 6}, 8};
  BlockPoint p{{1.0, 0.4, 0.0}, 0.0};
  auto red = reduce_dimension(p, block);
  CHECK(red.free_commodities == std::vector<int>{1});
  CHECK(red.block.demands == std::vector<std::int64_t>{4});
  CHECK(red.block.capacity == 5);  // 8 - 3
  CHECK(red.point.flows == std::vector<double>{0.4});
  REQUIRE(red.fixed.size() == 2);
  CHECK(red.fixed[0] == std::pair<int, int>{0, 1});
  CHECK(red.fixed[1] == std::pair<int, int>{2, 0});
}

TEST_CASE("reduction can leave a negative capacity") {
  BlockData block{{5, 9}, 6};
  BlockPoint p{{0.5, 1.0}, 3.0};
  auto red = reduce_dimension(p, block);
  CHECK(red.block.capacity == -3);
}

TEST_CASE("lifting preserves validity and the violation at the point") {
  std::mt19937_64 rng(34);
  int lifted = 0;
  for (int trial = 0; trial < 80; ++trial) {
    BlockData block = random_block(rng, 6, 40);
    if (block.size() < 3) continue;
    BlockPoint p;
    std::uniform_real_distribution<double> ud(0.3, 0.7);
    std::uniform_int_distribution<int> fx(0, 2);
    for (int k = 0; k < block.size(); ++k) {
      const int f = fx(rng);
      p.flows.push_back(f == 0 ? 0.0 : f == 1 ? 1.0 : ud(rng));
    }
    p.overflow = 0.0;
    auto red = reduce_dimension(p, block);
    if (red.fixed.empty() || red.block.size() == 0) continue;
    auto sep = separate(red.point, red.block, Normalization::natural());
    if (!sep) continue;
    Cut full = lift_cut(sep->cut, red, block);
    ++lifted;
    CHECK(max_cut_violation(block, full) <= 1e-6);
    CHECK(full.violation_at(p) ==
          doctest::Approx(sep->violation).epsilon(1e-7));
  }
  CHECK(lifted > 20);
}

TEST_CASE("pipeline handles fully fixed points") {
  BlockData block{{3, 4}, 5};
  // x = (1,1) needs overflow 2
  BlockPoint outside{{1.0, 1.0}, 1.0};
  auto res = separate_with_reduction(outside, block, Normalization::natural());
  REQUIRE(res.has_value());
  CHECK(res->violation > 1e-6);
  CHECK(max_cut_violation(block, res->cut) <= 1e-6);

  BlockPoint inside{{1.0, 1.0}, 2.0};
  CHECK(!separate_with_reduction(inside, block, Normalization::natural()));
}

TEST_CASE("facet frequency of the sharper normalizations") {
  std::mt19937_64 rng(35);
  int cuts = 0, facets = 0;
  for (int trial = 0; trial < 60; ++trial) {
    BlockData block = random_block(rng, 8, 40);
    BlockPoint p = outside_point(rng, block);
    BlockPoint anchor = random_inner_point(rng, block, 0.2);
    const Normalization norms[] = {Normalization::rhs_bound(),
                                   Normalization::directional(anchor),
                                   Normalization::natural()};
    for (const auto& norm : norms) {
      std::optional<SeparationResult> res;
      try {
        res = separate(p, block, norm);
      } catch (const UnboundedSeparation&) {
        continue;
      }
      if (!res) continue;
      ++cuts;
      if (is_facet(block, res->cut)) ++facets;
    }
  }
  REQUIRE(cuts > 60);
  CHECK(static_cast<double>(facets) >= 0.95 * static_cast<double>(cuts));
}
