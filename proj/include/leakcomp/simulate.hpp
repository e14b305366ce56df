#pragma once

#include "leakcomp/policy.hpp"

namespace leakcomp {

// Cumulative misses per prefix; entry i counts misses on the first i accesses,
// so entry 0 is always 0 and steps are 0 or 1.
struct MissProfile {
  std::vector<int> cumulative;

  int total() const { return cumulative.back(); }
};

int count_misses(const CacheAlgorithm& alg, const Trace& trace);
int count_misses(const CacheAlgorithm& alg, const Trace& trace, Configuration start);

MissProfile miss_profile(const CacheAlgorithm& alg, const Trace& trace);

// Entry i = Q(prefix) - P(prefix) for the length-i prefix; steps are in
// {-1, 0, +1} since each access hits or misses per algorithm independently.
std::vector<int> diff_profile(const CacheAlgorithm& p, const CacheAlgorithm& q,
                              const Trace& trace);

}  // namespace leakcomp
