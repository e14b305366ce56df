#include "leakcomp/leak.hpp"

#include <algorithm>
#include <ostream>
#include <tuple>

#include "detail/trace_enum.hpp"
#include "leakcomp/congruence.hpp"
#include "leakcomp/simulate.hpp"

namespace leakcomp {

bool ObservationSet::contiguous() const {
  if (values.empty()) return true;
  return static_cast<int>(values.size()) == *values.rbegin() - *values.begin() + 1;
}

ObservationSet observations(const CacheAlgorithm& alg, const TraceSet& set) {
  ObservationSet image;
  for (const Trace& trace : set.traces()) {
    image.values.insert(count_misses(alg, trace));
  }
  return image;
}

int default_alphabet_size(const CacheAlgorithm& p, const CacheAlgorithm& q) {
  return p.capacity() + q.capacity();
}

int ratio_from_pairs(const std::set<std::pair<int, int>>& pairs) {
  // pairs are sorted by p then q; a per-q min/max sweep needs them by q
  std::map<int, std::pair<int, int>> span_by_q;  // q -> (min p, max p)
  for (const auto& [p, q] : pairs) {
    auto [it, inserted] = span_by_q.try_emplace(q, std::pair{p, p});
    if (!inserted) {
      it->second.first = std::min(it->second.first, p);
      it->second.second = std::max(it->second.second, p);
    }
  }
  int widest = 0;
  for (const auto& [q, span] : span_by_q) {
    widest = std::max(widest, span.second - span.first);
  }
  return 1 + widest;
}

namespace {

// Per-depth bitmaps over (p, q); cheap to set per node, decoded into sets at
// the end. p and q never exceed the depth, so depth+1 rows of depth+1 bits do.
class LayerBitmaps {
 public:
  LayerBitmaps(int max_len) : max_len_(max_len), side_(max_len + 1) {
    const std::size_t words_per_layer = (side_ * side_ + 63) / 64;
    bits_.assign(static_cast<std::size_t>(max_len + 1) * words_per_layer, 0);
    words_per_layer_ = words_per_layer;
  }

  bool visit(int depth, int misses_p, int misses_q, std::span<const BlockId>) {
    const std::size_t cell =
        static_cast<std::size_t>(misses_p) * side_ + static_cast<std::size_t>(misses_q);
    bits_[depth * words_per_layer_ + cell / 64] |= 1ull << (cell % 64);
    return true;
  }

  LayerBitmaps fork() const { return LayerBitmaps(max_len_); }

  void merge(LayerBitmaps&& other) {
    for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  }

  std::vector<std::set<std::pair<int, int>>> decode() const {
    std::vector<std::set<std::pair<int, int>>> layers(max_len_ + 1);
    layers[0].insert({0, 0});
    for (int depth = 1; depth <= max_len_; ++depth) {
      for (std::size_t cell = 0; cell < side_ * side_; ++cell) {
        if (bits_[depth * words_per_layer_ + cell / 64] >> (cell % 64) & 1) {
          layers[depth].insert({static_cast<int>(cell / side_),
                                static_cast<int>(cell % side_)});
        }
      }
    }
    return layers;
  }

 private:
  int max_len_;
  std::size_t side_;
  std::size_t words_per_layer_ = 0;
  std::vector<std::uint64_t> bits_;
};

}  // namespace

std::vector<std::set<std::pair<int, int>>> enumerate_miss_pair_layers(
    const CacheAlgorithm& p, const CacheAlgorithm& q, int max_len, int alphabet_size,
    const EnumerationBudget& budget, Parallelism parallelism) {
  if (alphabet_size < 2) {
    throw std::invalid_argument("alphabet size must be at least 2");
  }
  if (max_len < 0) {
    throw std::invalid_argument("trace length must be non-negative");
  }
  check_enumeration_budget(alphabet_size, max_len, budget);
  LayerBitmaps collector(max_len);
  detail::enumerate_traces(p, q, max_len, alphabet_size, collector, parallelism);
  return collector.decode();
}

MissPairSet achievable_pairs(const CacheAlgorithm& p, const CacheAlgorithm& q, int length,
                             int alphabet_size, const EnumerationBudget& budget,
                             Parallelism parallelism) {
  auto layers = enumerate_miss_pair_layers(p, q, length, alphabet_size, budget, parallelism);
  MissPairSet out;
  out.length = length;
  out.alphabet_size = alphabet_size;
  out.pairs = std::move(layers[length]);
  return out;
}

LeakRatioTable leak_ratio_bruteforce(const CacheAlgorithm& p, const CacheAlgorithm& q,
                                     int max_len, int alphabet_size,
                                     const EnumerationBudget& budget,
                                     Parallelism parallelism) {
  const auto layers =
      enumerate_miss_pair_layers(p, q, max_len, alphabet_size, budget, parallelism);
  LeakRatioTable table;
  table.alphabet_size = alphabet_size;
  table.engine = Engine::Brute;
  table.entries[0] = 1;
  for (int length = 1; length <= max_len; ++length) {
    table.entries[length] = ratio_from_pairs(layers[length]);
  }
  return table;
}

LeakRatioTable leak_ratio_quotient(const CacheAlgorithm& p, const CacheAlgorithm& q,
                                   int max_len, std::size_t class_ceiling) {
  LeakRatioTable table;
  table.alphabet_size = 0;
  table.engine = Engine::Quotient;
  table.entries[0] = 1;

  // Layered reachability over (class, p, q): the canonical relabeling folds
  // congruent configuration pairs together, and an unbounded block universe
  // realizes exactly one fresh successor per class.
  std::vector<PairClass> classes;
  std::unordered_map<PairClass, int, PairClassHash> class_index;
  std::vector<std::vector<std::tuple<int, bool, bool>>> successor_cache;

  const auto intern = [&](const PairClass& cls) {
    auto [it, inserted] = class_index.try_emplace(cls, static_cast<int>(classes.size()));
    if (inserted) {
      if (classes.size() >= class_ceiling) {
        throw BudgetError("quotient ratio engine exceeded the class ceiling of " +
                          std::to_string(class_ceiling));
      }
      classes.push_back(cls);
      successor_cache.emplace_back();
    }
    return it->second;
  };

  const int initial =
      intern(canonicalize(initial_configuration(p), initial_configuration(q)).cls);

  std::set<std::tuple<int, int, int>> layer{{initial, 0, 0}};
  for (int length = 1; length <= max_len; ++length) {
    std::set<std::tuple<int, int, int>> next;
    for (const auto& [cls_id, misses_p, misses_q] : layer) {
      if (successor_cache[cls_id].empty()) {
        // intern() may grow successor_cache, so collect locally before storing
        std::vector<std::tuple<int, bool, bool>> cached;
        for (const auto& s : class_successors(classes[cls_id], p, q)) {
          cached.emplace_back(intern(s.cls), s.miss_p, s.miss_q);
        }
        successor_cache[cls_id] = std::move(cached);
      }
      for (const auto& [target, miss_p, miss_q] : successor_cache[cls_id]) {
        next.emplace(target, misses_p + (miss_p ? 1 : 0), misses_q + (miss_q ? 1 : 0));
      }
    }
    layer.swap(next);

    std::set<std::pair<int, int>> pairs;
    for (const auto& [cls_id, misses_p, misses_q] : layer) {
      pairs.emplace(misses_p, misses_q);
    }
    table.entries[length] = ratio_from_pairs(pairs);
  }
  return table;
}

namespace {

struct ScanVisitor {
  long long p_scale, q_scale, offset;  // violation: p * p_scale > q * q_scale + offset
  bool found = false;
  int best_depth = 0;
  Trace best{};

  bool visit(int depth, int misses_p, int misses_q, std::span<const BlockId> prefix) {
    if (found && depth >= best_depth) return false;
    if (misses_p * p_scale > misses_q * q_scale + offset) {
      found = true;
      best_depth = depth;
      best.assign(prefix.begin(), prefix.end());
      return false;
    }
    return !found || depth + 1 < best_depth;
  }

  ScanVisitor fork() const { return ScanVisitor{p_scale, q_scale, offset}; }

  void merge(ScanVisitor&& other) {
    if (!other.found) return;
    if (!found || other.best_depth < best_depth ||
        (other.best_depth == best_depth && other.best < best)) {
      found = true;
      best_depth = other.best_depth;
      best = std::move(other.best);
    }
  }
};

}  // namespace

std::optional<Trace> miss_competitive_scan(const CacheAlgorithm& p,
                                           const CacheAlgorithm& q, Rational r, Rational c,
                                           int max_len, int alphabet_size,
                                           const EnumerationBudget& budget,
                                           Parallelism parallelism) {
  if (r.num <= 0 || r.den <= 0) {
    throw std::invalid_argument("competitiveness factor r must be positive");
  }
  if (c.den <= 0 || c.num < 0) {
    throw std::invalid_argument("additive slack c must be non-negative");
  }
  if (alphabet_size < 2) {
    throw std::invalid_argument("alphabet size must be at least 2");
  }
  check_enumeration_budget(alphabet_size, max_len, budget);

  // p > (rn/rd) q + (cn/cd)  <=>  p*rd*cd > rn*cd*q + cn*rd
  ScanVisitor visitor{r.den * c.den, r.num * c.den, c.num * r.den};
  detail::enumerate_traces(p, q, max_len, alphabet_size, visitor, parallelism);
  if (!visitor.found) return std::nullopt;
  return visitor.best;
}

void write_ratio_csv(std::ostream& out, const LeakRatioTable& forward,
                     const LeakRatioTable& backward) {
  out << "length,ratio_P_Q,ratio_Q_P\n";
  for (const auto& [length, ratio] : forward.entries) {
    if (length == 0) continue;
    out << length << ',' << ratio << ',' << backward.entries.at(length) << '\n';
  }
}

void write_pairs_csv(std::ostream& out,
                     const std::vector<std::set<std::pair<int, int>>>& layers) {
  out << "length,p,q\n";
  for (std::size_t length = 1; length < layers.size(); ++length) {
    for (const auto& [p, q] : layers[length]) {
      out << length << ',' << p << ',' << q << '\n';
    }
  }
}

}  // namespace leakcomp
