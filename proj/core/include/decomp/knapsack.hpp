#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace decomp {

struct KnapsackSolution {
  std::vector<int> chosen;  // item indices, ascending
  std::int64_t profit = 0;
};

/// Exact 0-1 knapsack. Profits may be negative (such items are never taken);
/// weights must be positive. Dynamic programming over the capacity when it is
/// small enough, branch and bound otherwise.
KnapsackSolution solve_knapsack(std::span<const std::int64_t> profits,
                                std::span<const std::int64_t> weights,
                                std::int64_t capacity);

inline constexpr std::int64_t kDpCapacityLimit = std::int64_t{1} << 20;

}  // namespace decomp
