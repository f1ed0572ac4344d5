#include "decomp/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "decomp/knapsack.hpp"

namespace decomp {

std::int64_t BlockData::total_demand() const {
  std::int64_t t = 0;
  for (auto d : demands) t += d;
  return t;
}

std::int64_t BlockVertex::load(const BlockData& block) const {
  std::int64_t t = 0;
  for (int k = 0; k < block.size(); ++k)
    if (pattern[k]) t += block.demands[k];
  return t;
}

ScaledDualWeights scale_duals(const DualWeights& weights, double factor) {
  if (!(factor > 0)) throw std::invalid_argument("scale factor must be positive");
  // Sums over a block must stay well inside the exactly-representable range.
  constexpr double kMaxScaled = 1e15;
  ScaledDualWeights out;
  out.profits.reserve(weights.profits.size());
  for (double p : weights.profits) {
    const double s = p * factor;
    if (std::fabs(s) > kMaxScaled) throw OverflowRisk("scaled profit too large");
    out.profits.push_back(static_cast<std::int64_t>(std::trunc(s)));
  }
  const double so = weights.overflow_price * factor;
  if (std::fabs(so) > kMaxScaled) throw OverflowRisk("scaled overflow price too large");
  out.overflow_price = static_cast<std::int64_t>(std::trunc(so));
  return out;
}

std::int64_t scaled_objective(const BlockData& block,
                              const ScaledDualWeights& weights,
                              std::span<const std::uint8_t> pattern) {
  std::int64_t profit = 0, load = 0;
  for (int k = 0; k < block.size(); ++k) {
    if (pattern[k]) {
      profit += weights.profits[k];
      load += block.demands[k];
    }
  }
  const std::int64_t overflow = std::max<std::int64_t>(0, load - block.capacity);
  return profit - weights.overflow_price * overflow;
}

BlockVertex capacity_oracle_scaled(const BlockData& block,
                                   const ScaledDualWeights& weights) {
  if (weights.overflow_price < 0)
    throw UnboundedOracle("negative overflow price makes the block problem unbounded");
  const int n = block.size();
  const std::int64_t po = weights.overflow_price;

  bool have_best = false;
  std::int64_t best_value = 0;
  std::vector<std::uint8_t> best_pattern;

  // Case 1: the pattern fits the capacity, overflow stays zero.
  if (block.capacity >= 0) {
    auto ks = solve_knapsack(weights.profits, block.demands, block.capacity);
    std::vector<std::uint8_t> pat(n, 0);
    for (int i : ks.chosen) pat[i] = 1;
    best_value = ks.profit;
    best_pattern = std::move(pat);
    have_best = true;
  }

  // Case 2: the capacity is exceeded; overflow is tight. Complementing the
  // pattern turns this into a knapsack with capacity sum(D) - c.
  const std::int64_t comp_cap = block.total_demand() - block.capacity;
  if (comp_cap >= 0) {
    std::vector<std::int64_t> comp_profits(n);
    std::int64_t constant = po * block.capacity;
    for (int k = 0; k < n; ++k) {
      comp_profits[k] = po * block.demands[k] - weights.profits[k];
      constant += weights.profits[k] - po * block.demands[k];
    }
    auto ks = solve_knapsack(comp_profits, block.demands, comp_cap);
    const std::int64_t value = ks.profit + constant;
    if (!have_best || value > best_value) {  // tie prefers case 1
      std::vector<std::uint8_t> pat(n, 1);
      for (int i : ks.chosen) pat[i] = 0;
      best_value = value;
      best_pattern = std::move(pat);
      have_best = true;
    }
  }

  BlockVertex v;
  v.pattern = std::move(best_pattern);
  if (v.pattern.empty()) v.pattern.assign(n, 0);
  const std::int64_t overflow =
      std::max<std::int64_t>(0, v.load(block) - block.capacity);
  v.overflow = static_cast<double>(overflow);
  v.value = static_cast<double>(best_value);
  return v;
}

BlockVertex capacity_oracle(const BlockData& block, const DualWeights& weights,
                            double factor) {
  if (weights.overflow_price < 0)
    throw UnboundedOracle("negative overflow price makes the block problem unbounded");
  BlockVertex v = capacity_oracle_scaled(block, scale_duals(weights, factor));
  double value = -weights.overflow_price * v.overflow;
  for (int k = 0; k < block.size(); ++k)
    if (v.pattern[k]) value += weights.profits[k];
  v.value = value;
  return v;
}

}  // namespace decomp
