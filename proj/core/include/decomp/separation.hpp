#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "decomp/oracle.hpp"

namespace decomp {

/// A point in one block's (f, o) space.
struct BlockPoint {
  std::vector<double> flows;
  double overflow = 0.0;
};

/// Valid inequality pi.f + pi_o.o <= rhs for a block polyhedron.
/// overflow_coeff <= 0 for any cut valid for the overflow ray.
struct Cut {
  std::vector<double> coeffs;
  double overflow_coeff = 0.0;
  double rhs = 0.0;

  double violation_at(const BlockPoint& p) const;
  double violation_at(const BlockVertex& v) const;
};

struct SeparationResult {
  Cut cut;
  double violation = 0.0;
  std::vector<BlockVertex> tight_vertices;
  long oracle_calls = 0;
};

struct Normalization {
  enum class Kind { NormL1, NormLinf, RhsBound, Directional, NaturalUfp };
  Kind kind = Kind::NaturalUfp;
  BlockPoint anchor;  // Directional only

  static Normalization l1() { return {Kind::NormL1, {}}; }
  static Normalization linf() { return {Kind::NormLinf, {}}; }
  static Normalization rhs_bound() { return {Kind::RhsBound, {}}; }
  static Normalization directional(BlockPoint anchor_point) {
    return {Kind::Directional, std::move(anchor_point)};
  }
  static Normalization natural() { return {Kind::NaturalUfp, {}}; }
};

struct UnboundedSeparation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LiftingFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tight overflow vertex for a pattern.
BlockVertex make_vertex(const BlockData& block, std::vector<std::uint8_t> pattern);

/// Solves the separation LP for `point` against the block polyhedron by
/// constraint generation over oracle-produced vertices. Returns the maximally
/// violated normalized cut (certified valid by a final oracle call), or
/// nullopt when the point cannot be separated beyond violation_tol.
std::optional<SeparationResult> separate(const BlockPoint& point,
                                         const BlockData& block,
                                         const Normalization& norm,
                                         double violation_tol = 1e-6,
                                         long* oracle_count = nullptr);

struct ReducedPoint {
  BlockPoint point;
  BlockData block;
  std::vector<int> free_commodities;              // original ids, ascending
  std::vector<std::pair<int, int>> fixed;         // (original id, 0 or 1)
};

/// Drops commodities whose flow sits at 0 or 1 (within fix_tol); capacity is
/// charged for commodities fixed at 1 and may go negative.
ReducedPoint reduce_dimension(const BlockPoint& point, const BlockData& block,
                              double fix_tol = 1e-6);

/// Sequentially lifts a cut valid for the reduced polyhedron back to the full
/// block: fixed-at-1 commodities first (ascending id), then fixed-at-0.
/// The result is validated by a final oracle call.
Cut lift_cut(const Cut& reduced_cut, const ReducedPoint& reduction,
             const BlockData& block, long* oracle_calls = nullptr);

/// reduce_dimension + separate + lift_cut pipeline; tight vertices are
/// extended back to the full block.
std::optional<SeparationResult> separate_with_reduction(
    const BlockPoint& point, const BlockData& block, const Normalization& norm,
    double violation_tol = 1e-6, long* oracle_count = nullptr);

}  // namespace decomp
