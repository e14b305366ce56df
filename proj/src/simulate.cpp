#include "leakcomp/simulate.hpp"

namespace leakcomp {

int count_misses(const CacheAlgorithm& alg, const Trace& trace) {
  return count_misses(alg, trace, initial_configuration(alg));
}

int count_misses(const CacheAlgorithm& alg, const Trace& trace, Configuration start) {
  int misses = 0;
  for (BlockId block : trace) {
    if (!update_in_place(alg, start.state, start.content, block)) ++misses;
  }
  return misses;
}

MissProfile miss_profile(const CacheAlgorithm& alg, const Trace& trace) {
  MissProfile profile;
  profile.cumulative.reserve(trace.size() + 1);
  profile.cumulative.push_back(0);
  Configuration config = initial_configuration(alg);
  int misses = 0;
  for (BlockId block : trace) {
    if (!update_in_place(alg, config.state, config.content, block)) ++misses;
    profile.cumulative.push_back(misses);
  }
  return profile;
}

std::vector<int> diff_profile(const CacheAlgorithm& p, const CacheAlgorithm& q,
                              const Trace& trace) {
  std::vector<int> diff;
  diff.reserve(trace.size() + 1);
  diff.push_back(0);
  Configuration config_p = initial_configuration(p);
  Configuration config_q = initial_configuration(q);
  int delta = 0;
  for (BlockId block : trace) {
    if (!update_in_place(q, config_q.state, config_q.content, block)) ++delta;
    if (!update_in_place(p, config_p.state, config_p.content, block)) --delta;
    diff.push_back(delta);
  }
  return diff;
}

}  // namespace leakcomp
