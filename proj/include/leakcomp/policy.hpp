#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "leakcomp/block.hpp"

namespace leakcomp {

// Packed control-state encoding. Each policy documents its own layout; states
// are opaque outside the policy that produced them.
using ControlState = std::uint64_t;

struct Eviction {
  ControlState state;
  int line;
};

// A deterministic finite-control cache machine: a capacity, a transition per
// hit line, and a block-independent evict rule. Shipped policies fill invalid
// lines lowest-index-first before evicting any cached block.
//
// Instances are immutable after construction and safe to share across threads.
class CacheAlgorithm {
 public:
  virtual ~CacheAlgorithm() = default;

  CacheAlgorithm(const CacheAlgorithm&) = delete;
  CacheAlgorithm& operator=(const CacheAlgorithm&) = delete;

  int capacity() const { return capacity_; }
  ControlState initial_state() const { return initial_; }
  const std::string& descriptor() const { return descriptor_; }

  // New control state after a hit on `line`.
  virtual ControlState transition(ControlState state, int line) const = 0;

  // Victim line and new control state for a miss.
  virtual Eviction evict(ControlState state) const = 0;

 protected:
  CacheAlgorithm(int capacity, ControlState initial, std::string descriptor)
      : capacity_(capacity), initial_(initial), descriptor_(std::move(descriptor)) {}

 private:
  int capacity_;
  ControlState initial_;
  std::string descriptor_;
};

using PolicyPtr = std::shared_ptr<const CacheAlgorithm>;

enum class PolicyKind { Lru, Fifo, Plru, Mru, Flru };

// Parsed form of the descriptor grammar:
//   lru:<n>  fifo:<n>  plru:<n>  mru:<n>  flru:<n>:<k>
struct PolicyDescriptor {
  PolicyKind kind = PolicyKind::Lru;
  int capacity = 0;
  int switch_point = 0;  // flru only: accesses spent in FIFO mode

  static PolicyDescriptor parse(std::string_view text);
  std::string to_string() const;
};

// Throws std::invalid_argument on a descriptor that violates its invariants
// (e.g. plru with a non-power-of-two capacity).
PolicyPtr make_policy(const PolicyDescriptor& descriptor);
PolicyPtr make_policy(std::string_view descriptor_text);

// Control state plus per-line content; kNoBlock marks an invalid line.
struct Configuration {
  ControlState state = 0;
  std::vector<BlockId> content;

  bool operator==(const Configuration&) const = default;
};

Configuration initial_configuration(const CacheAlgorithm& alg);

struct UpdateResult {
  Configuration config;
  bool hit;
};

// One memory access under demand paging: on a hit only the control state moves;
// on a miss the victim line chosen by evict() is overwritten with `block`.
UpdateResult update(const CacheAlgorithm& alg, const Configuration& config, BlockId block);

// Allocation-free variant for enumeration loops. Returns true on a hit.
bool update_in_place(const CacheAlgorithm& alg, ControlState& state,
                     std::span<BlockId> content, BlockId block);

}  // namespace leakcomp
