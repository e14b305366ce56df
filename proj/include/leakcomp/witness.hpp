#pragma once

#include <set>

#include "leakcomp/budget.hpp"
#include "leakcomp/simulate.hpp"

namespace leakcomp {

// A set of traces sharing one length.
class TraceSet {
 public:
  TraceSet() = default;
  explicit TraceSet(std::set<Trace> traces);

  // Throws std::invalid_argument when the trace length disagrees.
  void insert(Trace trace);

  int length() const { return length_ < 0 ? 0 : length_; }
  bool empty() const { return traces_.empty(); }
  std::size_t size() const { return traces_.size(); }
  const std::set<Trace>& traces() const { return traces_; }

 private:
  int length_ = -1;
  std::set<Trace> traces_;
};

// A trace t' of |t| accesses with P(t') = Q(t') = Q(t): Q(t) fresh blocks that
// miss in both algorithms, then repeats of the last one. Verified by
// simulation before being returned.
Trace build_equalizing_trace(const CacheAlgorithm& p, const CacheAlgorithm& q,
                             const Trace& t);

// Given Q-equivalent traces with P(t1) <= target <= P(t2), builds a trace of
// the same length with exactly `target` P-misses and the shared Q-miss count:
// the shortest prefix on which Q-P matches the required offset, extended by
// fresh both-miss blocks and padded with hits.
Trace interpolate_trace(const CacheAlgorithm& p, const CacheAlgorithm& q,
                        const Trace& t1, const Trace& t2, int target_misses);

// The P-dense, Q-equivalent set spanned by two endpoints: one interpolated
// trace per P-miss count between the endpoints, endpoints included.
TraceSet build_dense_set(const CacheAlgorithm& p, const CacheAlgorithm& q,
                         const Trace& t1, const Trace& t2);

struct GapResult {
  Trace trace;  // lexicographically first maximizer
  int gap = 0;
};

// Maximizes |P(t) - Q(t)| over all traces of the given length drawn from the
// first `alphabet_size` blocks.
GapResult max_gap_search(const CacheAlgorithm& p, const CacheAlgorithm& q, int length,
                         int alphabet_size, const EnumerationBudget& budget = {},
                         Parallelism parallelism = Parallelism::Auto);

}  // namespace leakcomp
