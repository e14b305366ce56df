#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "leakcomp/budget.hpp"
#include "leakcomp/witness.hpp"

namespace leakcomp {

enum class Engine { Brute, Quotient };

// Distinct miss counts of a trace set under one algorithm; the size is the
// number of timing observations an adversary can tell apart.
struct ObservationSet {
  std::set<int> values;

  std::size_t size() const { return values.size(); }
  bool contiguous() const;  // dense: the image is a contiguous integer range
};

ObservationSet observations(const CacheAlgorithm& alg, const TraceSet& set);

// Joint image of all length-l traces over the first `alphabet_size` blocks
// under the two miss counters.
struct MissPairSet {
  int length = 0;
  int alphabet_size = 0;
  std::set<std::pair<int, int>> pairs;
};

MissPairSet achievable_pairs(const CacheAlgorithm& p, const CacheAlgorithm& q, int length,
                             int alphabet_size, const EnumerationBudget& budget = {},
                             Parallelism parallelism = Parallelism::Auto);

// layers[i] = achievable (p, q) pairs at prefix length i, for i = 0..max_len.
std::vector<std::set<std::pair<int, int>>> enumerate_miss_pair_layers(
    const CacheAlgorithm& p, const CacheAlgorithm& q, int max_len, int alphabet_size,
    const EnumerationBudget& budget = {}, Parallelism parallelism = Parallelism::Auto);

// n_P + n_Q: the last accessed block is cached by both, so at most
// n_P + n_Q - 1 distinct blocks are cached across a configuration pair and one
// alphabet block always misses in both.
int default_alphabet_size(const CacheAlgorithm& p, const CacheAlgorithm& q);

// Leak ratio at one length: 1 + the widest spread of p within a single q.
int ratio_from_pairs(const std::set<std::pair<int, int>>& pairs);

struct LeakRatioTable {
  std::map<int, int> entries;  // length -> ratio; entry 0 = 1 by convention
  int alphabet_size = 0;       // 0 when the engine does not bound the alphabet
  Engine engine = Engine::Quotient;

  int max_length() const { return entries.empty() ? 0 : entries.rbegin()->first; }
};

// Exhaustive-enumeration engine over a bounded alphabet.
LeakRatioTable leak_ratio_bruteforce(const CacheAlgorithm& p, const CacheAlgorithm& q,
                                     int max_len, int alphabet_size,
                                     const EnumerationBudget& budget = {},
                                     Parallelism parallelism = Parallelism::Auto);

// Congruence-quotient engine: a layered reachability program over canonical
// pair classes, exact for an unbounded block universe.
LeakRatioTable leak_ratio_quotient(const CacheAlgorithm& p, const CacheAlgorithm& q,
                                   int max_len,
                                   std::size_t class_ceiling = kDefaultClassCeiling);

// Bounded search for a trace with P(t) > r*Q(t) + c; returns the shortest such
// trace (lexicographically first among equals) or nullopt when none exists in
// the enumerated space. Absence is not a proof.
std::optional<Trace> miss_competitive_scan(const CacheAlgorithm& p,
                                           const CacheAlgorithm& q, Rational r, Rational c,
                                           int max_len, int alphabet_size,
                                           const EnumerationBudget& budget = {},
                                           Parallelism parallelism = Parallelism::Auto);

// CSV schema: header "length,ratio_P_Q,ratio_Q_P", one row per length >= 1.
void write_ratio_csv(std::ostream& out, const LeakRatioTable& forward,
                     const LeakRatioTable& backward);

// CSV schema: header "length,p,q", one row per achievable pair per length >= 1.
void write_pairs_csv(std::ostream& out,
                     const std::vector<std::set<std::pair<int, int>>>& layers);

}  // namespace leakcomp
