#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <unordered_map>
#include <vector>

#include "leakcomp/budget.hpp"
#include "leakcomp/policy.hpp"

namespace leakcomp {

// Finitely-supported bijection on blocks; identity outside its support.
class Renaming {
 public:
  Renaming() = default;

  BlockId operator()(BlockId block) const;
  BlockId preimage(BlockId block) const;

  // Forces (*this)(from) == to, preserving bijectivity by swapping preimages.
  void map_to(BlockId from, BlockId to);

  Renaming inverted() const;

  // (outer ∘ inner)(b) = outer(inner(b))
  static Renaming composed(const Renaming& outer, const Renaming& inner);

  bool is_identity() const { return forward_.empty(); }

 private:
  void bind(BlockId from, BlockId to);

  std::unordered_map<BlockId, BlockId> forward_;
  std::unordered_map<BlockId, BlockId> backward_;
};

Trace rename(const Renaming& pi, const Trace& trace);
Configuration rename(const Renaming& pi, const Configuration& config);

// Canonical representative of a configuration pair under joint block renaming.
// Contents are relabeled by first occurrence, scanning P's lines then Q's, so
// two pairs are congruent exactly when their canonical forms are equal.
struct PairClass {
  ControlState state_p = 0;
  ControlState state_q = 0;
  std::vector<BlockId> content_p;
  std::vector<BlockId> content_q;

  bool operator==(const PairClass&) const = default;
  auto operator<=>(const PairClass&) const = default;
};

struct PairClassHash {
  std::size_t operator()(const PairClass& cls) const;
};

struct CanonicalForm {
  PairClass cls;
  Renaming witness;  // rename(witness, input contents) == canonical contents
};

CanonicalForm canonicalize(const Configuration& config_p, const Configuration& config_q);

// The existence-style packing used by the finiteness argument: renames both
// contents into the fixed alphabet {0..n_p+n_q-1}, picking the smallest
// available target block at each step. Unlike canonicalize, congruent inputs
// may land on different representatives.
struct PackedPair {
  Configuration config_p;
  Configuration config_q;
  Renaming witness;
};

PackedPair pack_into_shared_alphabet(const Configuration& config_p,
                                     const Configuration& config_q);

// Configurations spelled by a class (canonical ids are ordinary block ids).
std::pair<Configuration, Configuration> class_representative(const PairClass& cls);

struct ClassSuccessor {
  PairClass cls;
  BlockId access = 0;  // block accessed from the representative pair
  bool fresh = false;  // block was cached in neither content
  bool miss_p = false;
  bool miss_q = false;
};

// One successor per distinct cached block plus exactly one fresh access; all
// uncached blocks lead to the same class because evict is block-independent.
std::vector<ClassSuccessor> class_successors(const PairClass& cls,
                                             const CacheAlgorithm& p,
                                             const CacheAlgorithm& q);

struct QuotientEdge {
  int target = -1;
  BlockId access = 0;
  bool fresh = false;
  bool miss_p = false;
  bool miss_q = false;
};

struct QuotientGraph {
  std::vector<PairClass> nodes;                  // nodes[0] = initial class
  std::vector<std::vector<QuotientEdge>> edges;  // parallel to nodes
  std::vector<int> parent;                       // BFS tree; -1 for the root
  std::vector<int> parent_edge;                  // index into edges[parent[i]]

  std::size_t size() const { return nodes.size(); }
};

// Breadth-first closure of the congruence quotient from the initial pair.
// Throws BudgetError when the class ceiling is exceeded.
QuotientGraph quotient_explore(const CacheAlgorithm& p, const CacheAlgorithm& q,
                               std::size_t class_ceiling = kDefaultClassCeiling);

// Cycle nodes[i] --edges[nodes[i]][edge_indices[i]]--> nodes[(i+1) % size].
struct CycleWitness {
  std::vector<int> nodes;
  std::vector<int> edge_indices;
  int net_gain = 0;  // sum of (miss_p - miss_q) along the cycle; nonzero
};

struct BoundednessResult {
  bool unbounded = false;
  std::optional<CycleWitness> cycle;  // present iff unbounded
  std::size_t quotient_size = 0;      // bounds |P(t)-Q(t)| in the bounded case
};

// Unbounded iff some reachable cycle has nonzero net (miss_p - miss_q); cycles
// with positive net are preferred as witnesses when both signs exist.
BoundednessResult classify_boundedness(const QuotientGraph& graph);
BoundednessResult detect_unbounded(const CacheAlgorithm& p, const CacheAlgorithm& q,
                                   std::size_t class_ceiling = kDefaultClassCeiling);

// Base trace, renaming-closed cycle and per-repetition gain extracted from a
// nonzero-gain quotient cycle. direction is +1 when P-Q grows with each
// repetition and -1 when Q-P grows.
struct PumpFamily {
  Trace base;
  Trace cycle;
  Renaming loop_renaming;
  int gain = 0;  // misses gained per repetition; always positive
  int direction = 1;
  long long base_diff = 0;  // P(base) - Q(base)
  Rational rate;            // gain / (|cycle| + 1)
  long long threshold_m =
      0;  // |P - Q| exceeds rate * length for every repetition count above this
};

std::optional<PumpFamily> find_pump_family(const CacheAlgorithm& p,
                                           const CacheAlgorithm& q,
                                           std::size_t class_ceiling = kDefaultClassCeiling);

// tau_m: the base followed by m renaming-shifted copies of the cycle. The
// result is re-verified by simulation; a mismatch is reported as a defect.
Trace pump(const CacheAlgorithm& p, const CacheAlgorithm& q, const PumpFamily& family,
           int repetitions);

}  // namespace leakcomp
