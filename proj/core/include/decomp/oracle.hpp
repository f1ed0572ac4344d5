#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace decomp {

/// One arc's capacity block: per-commodity demands and the arc capacity.
/// Instance-level blocks always have capacity >= 1; blocks produced by
/// dimensionality reduction may carry capacity <= 0 (the overflow variable
/// absorbs the deficit).
struct BlockData {
  std::vector<std::int64_t> demands;
  std::int64_t capacity = 0;

  int size() const { return static_cast<int>(demands.size()); }
  std::int64_t total_demand() const;
};

/// A vertex (f, o) of the block polyhedron: binary commodity pattern plus the
/// tight overflow o = max(0, sum(f_k D_k) - c). `value` is the oracle
/// objective at this vertex under the weights that produced it.
struct BlockVertex {
  std::vector<std::uint8_t> pattern;
  double overflow = 0.0;
  double value = 0.0;

  std::int64_t load(const BlockData& block) const;
};

/// Linear objective over a block: profit per commodity and a nonnegative
/// price on the overflow variable.
struct DualWeights {
  std::vector<double> profits;
  double overflow_price = 0.0;
};

struct ScaledDualWeights {
  std::vector<std::int64_t> profits;
  std::int64_t overflow_price = 0;
};

struct UnboundedOracle : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct OverflowRisk : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kDualScaleFactor = 1e7;

/// Multiplies each coefficient by `factor` and truncates toward zero.
ScaledDualWeights scale_duals(const DualWeights& weights,
                              double factor = kDualScaleFactor);

/// Exact objective of a pattern (with tight overflow) in the scaled integer
/// domain. Used for case disjunction bookkeeping and exactness checks.
std::int64_t scaled_objective(const BlockData& block,
                              const ScaledDualWeights& weights,
                              std::span<const std::uint8_t> pattern);

/// Maximizes sum(profit_k f_k) - overflow_price * o over the block
/// polyhedron, via two 0-1 knapsacks (overflow zero vs. overflow positive).
/// Coefficients are scaled to integers by `factor` before solving, so the
/// disjunction is decided exactly. Throws UnboundedOracle when
/// overflow_price < 0.
BlockVertex capacity_oracle(const BlockData& block, const DualWeights& weights,
                            double factor = kDualScaleFactor);

/// Same, with pre-scaled integer weights.
BlockVertex capacity_oracle_scaled(const BlockData& block,
                                   const ScaledDualWeights& weights);

}  // namespace decomp
