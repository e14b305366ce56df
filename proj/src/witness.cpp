#include "leakcomp/witness.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "detail/trace_enum.hpp"

namespace leakcomp {

TraceSet::TraceSet(std::set<Trace> traces) {
  for (const Trace& trace : traces) {
    if (length_ < 0) {
      length_ = static_cast<int>(trace.size());
    } else if (static_cast<int>(trace.size()) != length_) {
      throw std::invalid_argument("trace sets hold traces of one common length");
    }
  }
  traces_ = std::move(traces);
}

void TraceSet::insert(Trace trace) {
  if (length_ < 0) {
    length_ = static_cast<int>(trace.size());
  } else if (static_cast<int>(trace.size()) != length_) {
    throw std::invalid_argument("trace sets hold traces of one common length");
  }
  traces_.insert(std::move(trace));
}

namespace {

// Smallest `count` block ids outside every alphabet passed in.
std::vector<BlockId> fresh_blocks(int count, std::initializer_list<const Trace*> used) {
  std::set<BlockId> taken;
  for (const Trace* trace : used) {
    taken.insert(trace->begin(), trace->end());
  }
  std::vector<BlockId> out;
  BlockId candidate = 0;
  while (static_cast<int>(out.size()) < count) {
    if (!taken.contains(candidate)) out.push_back(candidate);
    ++candidate;
  }
  return out;
}

}  // namespace

Trace build_equalizing_trace(const CacheAlgorithm& p, const CacheAlgorithm& q,
                             const Trace& t) {
  if (t.empty()) {
    throw std::invalid_argument("equalizing trace construction needs a nonempty trace");
  }
  const int length = static_cast<int>(t.size());
  const int target = count_misses(q, t);

  Trace out = fresh_blocks(target, {&t});
  out.resize(length, out.back());

  if (count_misses(p, out) != target || count_misses(q, out) != target) {
    throw std::logic_error("equalizing trace failed verification for " +
                           trace_to_string(out));
  }
  return out;
}

Trace interpolate_trace(const CacheAlgorithm& p, const CacheAlgorithm& q,
                        const Trace& t1, const Trace& t2, int target_misses) {
  if (t1.size() != t2.size()) {
    throw std::invalid_argument("interpolation endpoints must share a length");
  }
  const int shared_q = count_misses(q, t1);
  if (count_misses(q, t2) != shared_q) {
    throw std::invalid_argument("interpolation endpoints must be Q-equivalent");
  }
  const int p1 = count_misses(p, t1);
  const int p2 = count_misses(p, t2);
  if (target_misses < p1 || target_misses > p2) {
    throw std::invalid_argument("interpolation target " + std::to_string(target_misses) +
                                " outside [" + std::to_string(p1) + ", " +
                                std::to_string(p2) + "]");
  }
  if (target_misses == p1) return t1;
  if (target_misses == p2) return t2;

  // Whichever endpoint brackets the target from the right side carries a
  // prefix where Q - P equals exactly shared_q - target; the diff moves by at
  // most one per access, so the shortest such prefix exists.
  const Trace& source = target_misses <= shared_q ? t1 : t2;
  const std::vector<int> diff = diff_profile(p, q, source);
  const int wanted = shared_q - target_misses;
  std::size_t prefix_len = 0;
  while (prefix_len < diff.size() && diff[prefix_len] != wanted) ++prefix_len;
  if (prefix_len == diff.size()) {
    throw std::logic_error("interpolation found no prefix with offset " +
                           std::to_string(wanted) + " on " + trace_to_string(source));
  }

  Trace out(source.begin(), source.begin() + prefix_len);
  const int misses_so_far = count_misses(q, out);
  for (BlockId block : fresh_blocks(shared_q - misses_so_far, {&t1, &t2})) {
    out.push_back(block);
  }
  out.resize(t1.size(), out.back());

  if (count_misses(p, out) != target_misses || count_misses(q, out) != shared_q) {
    throw std::logic_error("interpolated trace failed verification: " +
                           trace_to_string(out) + " expected (" +
                           std::to_string(target_misses) + ", " +
                           std::to_string(shared_q) + "), got (" +
                           std::to_string(count_misses(p, out)) + ", " +
                           std::to_string(count_misses(q, out)) + ")");
  }
  return out;
}

TraceSet build_dense_set(const CacheAlgorithm& p, const CacheAlgorithm& q,
                         const Trace& t1, const Trace& t2) {
  const Trace& low = count_misses(p, t1) <= count_misses(p, t2) ? t1 : t2;
  const Trace& high = count_misses(p, t1) <= count_misses(p, t2) ? t2 : t1;
  const int from = count_misses(p, low);
  const int to = count_misses(p, high);

  TraceSet set;
  for (int target = from; target <= to; ++target) {
    set.insert(interpolate_trace(p, q, low, high, target));
  }
  return set;
}

namespace {

struct GapVisitor {
  int target_depth;
  bool found = false;
  int best_gap = -1;
  Trace best{};

  bool visit(int depth, int misses_p, int misses_q, std::span<const BlockId> prefix) {
    const int gap = misses_p > misses_q ? misses_p - misses_q : misses_q - misses_p;
    if (depth == target_depth) {
      if (gap > best_gap) {
        best_gap = gap;
        best.assign(prefix.begin(), prefix.end());
        found = true;
      }
      return false;
    }
    // the gap moves by at most one per access; prune subtrees that cannot win
    return gap + (target_depth - depth) > best_gap;
  }

  GapVisitor fork() const { return GapVisitor{target_depth}; }

  void merge(GapVisitor&& other) {
    if (!other.found) return;
    if (!found || other.best_gap > best_gap ||
        (other.best_gap == best_gap && other.best < best)) {
      found = true;
      best_gap = other.best_gap;
      best = std::move(other.best);
    }
  }
};

}  // namespace

GapResult max_gap_search(const CacheAlgorithm& p, const CacheAlgorithm& q, int length,
                         int alphabet_size, const EnumerationBudget& budget,
                         Parallelism parallelism) {
  if (length < 1) {
    throw std::invalid_argument("gap search needs a positive trace length");
  }
  if (alphabet_size < 2) {
    throw std::invalid_argument("alphabet size must be at least 2");
  }
  check_enumeration_budget(alphabet_size, length, budget);

  GapVisitor visitor{length};
  detail::enumerate_traces(p, q, length, alphabet_size, visitor, parallelism);
  return GapResult{std::move(visitor.best), visitor.best_gap};
}

}  // namespace leakcomp
