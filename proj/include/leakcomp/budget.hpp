#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace leakcomp {

// Thrown when an operation would exceed its enumeration budget or class ceiling.
class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

// Default budget: 4^13 simulated accesses across the enumeration tree.
inline constexpr std::uint64_t kDefaultEnumerationBudget = 67'108'864;

// Default ceiling on the number of distinct congruence classes.
inline constexpr std::size_t kDefaultClassCeiling = 1'000'000;

struct EnumerationBudget {
  std::uint64_t max_nodes = kDefaultEnumerationBudget;
};

// Node count of the depth<=max_len enumeration tree over `alphabet` blocks
// (excluding the root), saturating at uint64 max instead of overflowing.
inline std::uint64_t enumeration_tree_size(int alphabet, int max_len) {
  constexpr std::uint64_t kMax = UINT64_MAX;
  std::uint64_t total = 0;
  std::uint64_t level = 1;
  for (int depth = 1; depth <= max_len; ++depth) {
    if (level > kMax / static_cast<std::uint64_t>(alphabet)) return kMax;
    level *= static_cast<std::uint64_t>(alphabet);
    if (total > kMax - level) return kMax;
    total += level;
  }
  return total;
}

inline void check_enumeration_budget(int alphabet, int max_len,
                                     const EnumerationBudget& budget) {
  const std::uint64_t need = enumeration_tree_size(alphabet, max_len);
  if (need > budget.max_nodes) {
    throw BudgetError("enumeration of alphabet " + std::to_string(alphabet) +
                      " up to length " + std::to_string(max_len) + " needs " +
                      std::to_string(need) + " simulated accesses, over the budget of " +
                      std::to_string(budget.max_nodes));
  }
}

enum class Parallelism { Serial, Auto };

}  // namespace leakcomp
