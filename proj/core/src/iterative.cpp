#include "decomp/iterative.hpp"

#include <cmath>

namespace decomp {

IntersectionResult segment_intersection(const BlockPoint& outer,
                                        const BlockPoint& anchor,
                                        const Cut& cut, double parallel_tol) {
  const double v_out = cut.violation_at(outer);
  const double v_in = cut.violation_at(anchor);
  const double denom = v_out - v_in;
  if (std::fabs(denom) < parallel_tol)
    throw DegenerateIntersection("segment is parallel to the cut plane");
  double t = v_out / denom;
  t = std::min(1.0, std::max(0.0, t));
  IntersectionResult r;
  r.t = t;
  r.point.flows.resize(outer.flows.size());
  for (size_t k = 0; k < outer.flows.size(); ++k)
    r.point.flows[k] = outer.flows[k] + t * (anchor.flows[k] - outer.flows[k]);
  r.point.overflow = outer.overflow + t * (anchor.overflow - outer.overflow);
  return r;
}

std::optional<IterativeResult> directional_separate_iterative(
    const BlockPoint& outer, const BlockPoint& anchor, const BlockData& block,
    const IterativeConfig& config) {
  BlockPoint current = outer;
  double t = 0.0;
  long oracle_calls = 0;
  std::optional<SeparationResult> last;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    auto sep = separate_with_reduction(current, block, config.secondary,
                                       config.membership_tol, &oracle_calls);
    if (!sep) {
      if (!last) return std::nullopt;  // outer point already inside

      // Re-anchor the last cut so the rounded boundary point cannot make it
      // slightly invalid.
      IterativeResult out;
      out.sep = std::move(*last);
      DualWeights w;
      w.profits = out.sep.cut.coeffs;
      w.overflow_price = -out.sep.cut.overflow_coeff;
      if (w.overflow_price < 0) w.overflow_price = 0;
      BlockVertex v = capacity_oracle(block, w);
      ++oracle_calls;
      out.sep.cut.rhs = v.value;
      out.sep.violation = out.sep.cut.violation_at(outer);
      out.sep.oracle_calls = oracle_calls;
      out.boundary_t = t;
      out.iterations = iter;
      return out;
    }

    IntersectionResult hit =
        segment_intersection(outer, anchor, sep->cut, config.parallel_tol);
    if (hit.t <= t)
      throw DegenerateIntersection("no progress along the segment");
    t = hit.t;
    current = std::move(hit.point);
    last = std::move(*sep);
  }
  throw IterationLimit("iterative separation exceeded its iteration budget");
}

}  // namespace decomp
