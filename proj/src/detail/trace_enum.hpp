#pragma once

#include <algorithm>
#include <cstring>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "leakcomp/budget.hpp"
#include "leakcomp/policy.hpp"

namespace leakcomp::detail {

// Snapshot of one enumeration node: the configuration pair and miss counters
// reached by a specific prefix. Used to hand subtrees to worker threads.
struct EnumSeed {
  ControlState state_p = 0;
  ControlState state_q = 0;
  std::vector<BlockId> content_p;
  std::vector<BlockId> content_q;
  int misses_p = 0;
  int misses_q = 0;
  std::vector<BlockId> prefix;
};

// Depth-first walk over every trace in {0..alphabet-1}^(<=max_len).
//
// The visitor sees each nonempty prefix exactly once:
//   bool visit(int depth, int misses_p, int misses_q, std::span<const BlockId> prefix)
// and returning false prunes the subtree below that prefix. The parallel
// driver additionally requires
//   Visitor fork() const   -- empty-result copy
//   void merge(Visitor&&)  -- fold a fork's results back in (commutative)
template <typename Visitor>
class TraceEnumerator {
 public:
  TraceEnumerator(const CacheAlgorithm& p, const CacheAlgorithm& q, int max_len,
                  int alphabet)
      : p_(p),
        q_(q),
        max_len_(max_len),
        alphabet_(alphabet),
        cap_p_(p.capacity()),
        cap_q_(q.capacity()) {
    state_p_.assign(max_len + 1, p.initial_state());
    state_q_.assign(max_len + 1, q.initial_state());
    content_p_.assign(static_cast<std::size_t>(max_len + 1) * cap_p_, kNoBlock);
    content_q_.assign(static_cast<std::size_t>(max_len + 1) * cap_q_, kNoBlock);
    misses_p_.assign(max_len + 1, 0);
    misses_q_.assign(max_len + 1, 0);
    prefix_.assign(std::max(max_len, 1), 0);
  }

  // Replaces the depth-0 root with a previously captured node.
  void seed(const EnumSeed& s) {
    state_p_[0] = s.state_p;
    state_q_[0] = s.state_q;
    std::copy(s.content_p.begin(), s.content_p.end(), content_p_.begin());
    std::copy(s.content_q.begin(), s.content_q.end(), content_q_.begin());
    misses_p_[0] = s.misses_p;
    misses_q_[0] = s.misses_q;
    base_depth_ = static_cast<int>(s.prefix.size());
    prefix_.assign(static_cast<std::size_t>(base_depth_) + max_len_, 0);
    std::copy(s.prefix.begin(), s.prefix.end(), prefix_.begin());
  }

  void run(Visitor& visitor) {
    if (max_len_ > 0) descend(0, visitor);
  }

  // Collects the frontier at `depth` instead of descending past it.
  void run_collecting(Visitor& visitor, int split_depth, std::vector<EnumSeed>& seeds) {
    split_depth_ = split_depth;
    seeds_ = &seeds;
    if (max_len_ > 0) descend(0, visitor);
    split_depth_ = -1;
    seeds_ = nullptr;
  }

 private:
  void descend(int local_depth, Visitor& visitor) {
    const int next = local_depth + 1;
    BlockId* const child_p = &content_p_[static_cast<std::size_t>(next) * cap_p_];
    BlockId* const child_q = &content_q_[static_cast<std::size_t>(next) * cap_q_];
    const BlockId* const cur_p = &content_p_[static_cast<std::size_t>(local_depth) * cap_p_];
    const BlockId* const cur_q = &content_q_[static_cast<std::size_t>(local_depth) * cap_q_];
    for (BlockId block = 0; block < alphabet_; ++block) {
      std::memcpy(child_p, cur_p, sizeof(BlockId) * cap_p_);
      std::memcpy(child_q, cur_q, sizeof(BlockId) * cap_q_);
      state_p_[next] = state_p_[local_depth];
      state_q_[next] = state_q_[local_depth];
      const bool hit_p =
          update_in_place(p_, state_p_[next], std::span<BlockId>(child_p, cap_p_), block);
      const bool hit_q =
          update_in_place(q_, state_q_[next], std::span<BlockId>(child_q, cap_q_), block);
      misses_p_[next] = misses_p_[local_depth] + (hit_p ? 0 : 1);
      misses_q_[next] = misses_q_[local_depth] + (hit_q ? 0 : 1);
      prefix_[base_depth_ + local_depth] = block;
      const int depth = base_depth_ + next;
      const bool keep = visitor.visit(
          depth, misses_p_[next], misses_q_[next],
          std::span<const BlockId>(prefix_.data(), static_cast<std::size_t>(depth)));
      if (!keep) continue;
      if (seeds_ && next == split_depth_) {
        EnumSeed s;
        s.state_p = state_p_[next];
        s.state_q = state_q_[next];
        s.content_p.assign(child_p, child_p + cap_p_);
        s.content_q.assign(child_q, child_q + cap_q_);
        s.misses_p = misses_p_[next];
        s.misses_q = misses_q_[next];
        s.prefix.assign(prefix_.begin(), prefix_.begin() + depth);
        seeds_->push_back(std::move(s));
        continue;
      }
      if (next < max_len_) descend(next, visitor);
    }
  }

  const CacheAlgorithm& p_;
  const CacheAlgorithm& q_;
  int max_len_;
  int alphabet_;
  int cap_p_;
  int cap_q_;
  int base_depth_ = 0;
  int split_depth_ = -1;
  std::vector<EnumSeed>* seeds_ = nullptr;
  std::vector<ControlState> state_p_, state_q_;
  std::vector<BlockId> content_p_, content_q_;
  std::vector<int> misses_p_, misses_q_;
  std::vector<BlockId> prefix_;
};

inline int enumeration_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Walks the whole tree through `visitor`. The parallel path splits at a fixed
// prefix depth and merges per-prefix forks in prefix order, so results match
// the serial reference exactly as long as merge is order-insensitive or the
// forks are combined with a canonical tie-break.
template <typename Visitor>
void enumerate_traces(const CacheAlgorithm& p, const CacheAlgorithm& q, int max_len,
                      int alphabet, Visitor& visitor,
                      Parallelism parallelism = Parallelism::Auto) {
  const int threads = parallelism == Parallelism::Serial ? 1 : enumeration_threads();
  const std::uint64_t work = enumeration_tree_size(alphabet, max_len);
  if (threads <= 1 || max_len < 3 || work < 1u << 16) {
    TraceEnumerator<Visitor> walker(p, q, max_len, alphabet);
    walker.run(visitor);
    return;
  }

#ifdef _OPENMP
  int split_depth = 1;
  std::uint64_t width = static_cast<std::uint64_t>(alphabet);
  while (split_depth < max_len - 1 && split_depth < 8 &&
         width < 4u * static_cast<std::uint64_t>(threads)) {
    ++split_depth;
    width *= static_cast<std::uint64_t>(alphabet);
  }

  std::vector<EnumSeed> seeds;
  seeds.reserve(width);
  {
    TraceEnumerator<Visitor> walker(p, q, split_depth, alphabet);
    walker.run_collecting(visitor, split_depth, seeds);
  }

  std::vector<Visitor> forks(seeds.size(), visitor.fork());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    TraceEnumerator<Visitor> walker(p, q, max_len - split_depth, alphabet);
    walker.seed(seeds[i]);
    walker.run(forks[i]);
  }
  for (auto& fork : forks) visitor.merge(std::move(fork));
#else
  TraceEnumerator<Visitor> walker(p, q, max_len, alphabet);
  walker.run(visitor);
#endif
}

}  // namespace leakcomp::detail
