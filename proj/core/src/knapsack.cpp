#include "decomp/knapsack.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace decomp {

namespace {

KnapsackSolution solve_dp(std::span<const std::int64_t> profits,
                          std::span<const std::int64_t> weights,
                          std::int64_t capacity) {
  const int n = static_cast<int>(profits.size());
  const std::int64_t cap = capacity;
  std::vector<std::int64_t> dp(cap + 1, 0);
  std::vector<std::vector<char>> take(n, std::vector<char>(cap + 1, 0));
  for (int i = 0; i < n; ++i) {
    if (profits[i] <= 0 || weights[i] > cap) continue;
    const std::int64_t w = weights[i], p = profits[i];
    for (std::int64_t c = cap; c >= w; --c) {
      if (dp[c - w] + p > dp[c]) {
        dp[c] = dp[c - w] + p;
        take[i][c] = 1;
      }
    }
  }
  KnapsackSolution sol;
  sol.profit = dp[cap];
  std::int64_t c = cap;
  for (int i = n - 1; i >= 0; --i) {
    if (take[i][c]) {
      sol.chosen.push_back(i);
      c -= weights[i];
    }
  }
  std::reverse(sol.chosen.begin(), sol.chosen.end());
  return sol;
}

struct BnbItem {
  std::int64_t profit, weight;
  int original;
};

struct Bnb {
  std::vector<BnbItem> items;
  std::int64_t capacity;
  std::int64_t best = 0;
  std::vector<char> current, best_set;

  // Fractional relaxation of the remaining items.
  double bound(int depth, std::int64_t value, std::int64_t room) const {
    double b = static_cast<double>(value);
    for (size_t i = depth; i < items.size(); ++i) {
      if (items[i].weight <= room) {
        room -= items[i].weight;
        b += static_cast<double>(items[i].profit);
      } else {
        b += static_cast<double>(items[i].profit) * static_cast<double>(room) /
             static_cast<double>(items[i].weight);
        break;
      }
    }
    return b;
  }

  void dfs(int depth, std::int64_t value, std::int64_t room) {
    if (value > best) {
      best = value;
      best_set = current;
    }
    if (depth == static_cast<int>(items.size())) return;
    if (bound(depth, value, room) <= static_cast<double>(best)) return;
    if (items[depth].weight <= room) {
      current[depth] = 1;
      dfs(depth + 1, value + items[depth].profit, room - items[depth].weight);
      current[depth] = 0;
    }
    dfs(depth + 1, value, room);
  }
};

KnapsackSolution solve_bnb(std::span<const std::int64_t> profits,
                           std::span<const std::int64_t> weights,
                           std::int64_t capacity) {
  Bnb b;
  b.capacity = capacity;
  for (size_t i = 0; i < profits.size(); ++i) {
    if (profits[i] > 0 && weights[i] <= capacity)
      b.items.push_back({profits[i], weights[i], static_cast<int>(i)});
  }
  std::sort(b.items.begin(), b.items.end(), [](const BnbItem& a, const BnbItem& c) {
    return a.profit * c.weight > c.profit * a.weight;
  });
  b.current.assign(b.items.size(), 0);
  b.best_set = b.current;
  b.dfs(0, 0, capacity);
  KnapsackSolution sol;
  sol.profit = b.best;
  for (size_t i = 0; i < b.items.size(); ++i)
    if (b.best_set[i]) sol.chosen.push_back(b.items[i].original);
  std::sort(sol.chosen.begin(), sol.chosen.end());
  return sol;
}

}  // namespace

KnapsackSolution solve_knapsack(std::span<const std::int64_t> profits,
                                std::span<const std::int64_t> weights,
                                std::int64_t capacity) {
  if (profits.size() != weights.size())
    throw std::invalid_argument("profits/weights size mismatch");
  for (auto w : weights)
    if (w <= 0) throw std::invalid_argument("knapsack weights must be positive");
  if (capacity < 0) throw std::invalid_argument("knapsack capacity must be >= 0");
  if (capacity <= kDpCapacityLimit) return solve_dp(profits, weights, capacity);
  return solve_bnb(profits, weights, capacity);
}

}  // namespace decomp
