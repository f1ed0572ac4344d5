#pragma once

#include <optional>

#include "decomp/separation.hpp"

namespace decomp {

struct DegenerateIntersection : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IterationLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IntersectionResult {
  double t = 0.0;  // parameter along outer -> anchor
  BlockPoint point;
};

/// Intersects the segment [outer, anchor] with the hyperplane of `cut`.
/// Requires the cut violated at `outer` and satisfied at `anchor`; throws
/// DegenerateIntersection when the segment is near-parallel to the cut.
IntersectionResult segment_intersection(const BlockPoint& outer,
                                        const BlockPoint& anchor,
                                        const Cut& cut,
                                        double parallel_tol = 1e-10);

struct IterativeConfig {
  Normalization secondary = Normalization::natural();
  double membership_tol = 1e-6;
  double parallel_tol = 1e-10;
  int max_iters = 10000;
};

struct IterativeResult {
  SeparationResult sep;
  double boundary_t = 0.0;  // parameter of the boundary point on the segment
  int iterations = 0;
};

/// Walks from `outer` toward `anchor` (a point of the block polyhedron),
/// repeatedly separating the current point and projecting onto the cut plane,
/// until the moving point enters the polyhedron. Returns nullopt when `outer`
/// is already inside; otherwise the final cut, re-anchored so its rhs is the
/// exact oracle optimum of its normal vector.
std::optional<IterativeResult> directional_separate_iterative(
    const BlockPoint& outer, const BlockPoint& anchor, const BlockData& block,
    const IterativeConfig& config = {});

}  // namespace decomp
