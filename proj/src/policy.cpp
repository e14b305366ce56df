#include "leakcomp/policy.hpp"

#include <bit>
#include <cassert>
#include <charconv>
#include <stdexcept>

namespace leakcomp {

namespace {

// Line permutations are nibble-packed: position i occupies bits 4i..4i+3.
// Position 0 is the next victim; the last position is the most recent line.

ControlState perm_identity(int lines) {
  ControlState perm = 0;
  for (int i = 0; i < lines; ++i) {
    perm |= static_cast<ControlState>(i) << (4 * i);
  }
  return perm;
}

int perm_at(ControlState perm, int pos) {
  return static_cast<int>((perm >> (4 * pos)) & 0xF);
}

ControlState perm_move_to_back(ControlState perm, int lines, int line) {
  int pos = 0;
  while (perm_at(perm, pos) != line) ++pos;
  for (int i = pos; i + 1 < lines; ++i) {
    const ControlState next = (perm >> (4 * (i + 1))) & 0xF;
    perm = (perm & ~(ControlState{0xF} << (4 * i))) | (next << (4 * i));
  }
  const int back = lines - 1;
  perm = (perm & ~(ControlState{0xF} << (4 * back))) |
         (static_cast<ControlState>(line) << (4 * back));
  return perm;
}

// Recency permutation: hits and insertions move the touched line to the back,
// so the front is the least recently used line and, because the initial
// permutation is the identity, invalid lines are consumed in index order.
class LruPolicy final : public CacheAlgorithm {
 public:
  explicit LruPolicy(int capacity)
      : CacheAlgorithm(capacity, perm_identity(capacity),
                       "lru:" + std::to_string(capacity)) {}

  ControlState transition(ControlState state, int line) const override {
    return perm_move_to_back(state, capacity(), line);
  }

  Eviction evict(ControlState state) const override {
    const int victim = perm_at(state, 0);
    return {perm_move_to_back(state, capacity(), victim), victim};
  }
};

// Cyclic next-victim pointer; hits leave the state untouched. Starting at
// line 0, the pointer walks the lines in index order, which fills invalid
// lines first and then evicts in insertion order.
class FifoPolicy final : public CacheAlgorithm {
 public:
  explicit FifoPolicy(int capacity)
      : CacheAlgorithm(capacity, 0, "fifo:" + std::to_string(capacity)) {}

  ControlState transition(ControlState state, int /*line*/) const override {
    return state;
  }

  Eviction evict(ControlState state) const override {
    const int victim = static_cast<int>(state);
    return {static_cast<ControlState>((victim + 1) % capacity()), victim};
  }
};

// Tree PLRU: bits 0..n-2 hold the heap-ordered tree (0 = victim search goes
// left), bits 32.. hold a saturating fill count so invalid lines are consumed
// in index order before the tree picks victims.
class PlruPolicy final : public CacheAlgorithm {
 public:
  explicit PlruPolicy(int capacity)
      : CacheAlgorithm(capacity, 0, "plru:" + std::to_string(capacity)) {}

  ControlState transition(ControlState state, int line) const override {
    return with_tree(state, touch(tree_bits(state), line));
  }

  Eviction evict(ControlState state) const override {
    const int fill = fill_count(state);
    if (fill < capacity()) {
      const int victim = fill;
      ControlState next = with_tree(state, touch(tree_bits(state), victim));
      next = with_fill(next, fill + 1);
      return {next, victim};
    }
    const int victim = follow(tree_bits(state));
    return {with_tree(state, touch(tree_bits(state), victim)), victim};
  }

 private:
  static constexpr ControlState kTreeMask = 0xFFFFFFFFu;

  std::uint32_t tree_bits(ControlState state) const {
    return static_cast<std::uint32_t>(state & kTreeMask);
  }
  int fill_count(ControlState state) const { return static_cast<int>(state >> 32); }
  ControlState with_tree(ControlState state, std::uint32_t bits) const {
    return (state & ~kTreeMask) | bits;
  }
  ControlState with_fill(ControlState state, int fill) const {
    return (state & kTreeMask) | (static_cast<ControlState>(fill) << 32);
  }

  std::uint32_t touch(std::uint32_t bits, int line) const {
    int node = 0;
    int lo = 0, hi = capacity();
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if (line < mid) {
        bits |= (1u << node);  // point the victim path away, to the right
        node = 2 * node + 1;
        hi = mid;
      } else {
        bits &= ~(1u << node);
        node = 2 * node + 2;
        lo = mid;
      }
    }
    return bits;
  }

  int follow(std::uint32_t bits) const {
    int node = 0;
    int lo = 0, hi = capacity();
    while (hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      if ((bits >> node) & 1u) {
        node = 2 * node + 2;
        lo = mid;
      } else {
        node = 2 * node + 1;
        hi = mid;
      }
    }
    return lo;
  }
};

// Per-line MRU bits: an access sets the line's bit and, once all bits are
// set, clears the others. The victim is the lowest-index line with bit 0,
// which consumes invalid lines in index order from the all-zero start.
class MruPolicy final : public CacheAlgorithm {
 public:
  explicit MruPolicy(int capacity)
      : CacheAlgorithm(capacity, 0, "mru:" + std::to_string(capacity)) {}

  ControlState transition(ControlState state, int line) const override {
    return touch(state, line);
  }

  Eviction evict(ControlState state) const override {
    const int zeros = std::countr_one(static_cast<std::uint32_t>(state));
    const int victim = zeros < capacity() ? zeros : 0;
    return {touch(state, victim), victim};
  }

 private:
  ControlState touch(ControlState bits, int line) const {
    bits |= ControlState{1} << line;
    const ControlState full = (ControlState{1} << capacity()) - 1;
    if (bits == full) bits = ControlState{1} << line;
    return bits;
  }
};

// FIFO queue order in the low 48 bits plus a saturating access counter in the
// high 16. While the counter is below the switch point hits do not reorder
// (FIFO); afterwards the queue order is read as recency order and the policy
// is plain LRU.
class FlruPolicy final : public CacheAlgorithm {
 public:
  FlruPolicy(int capacity, int switch_point)
      : CacheAlgorithm(capacity, perm_identity(capacity),
                       "flru:" + std::to_string(capacity) + ":" +
                           std::to_string(switch_point)),
        switch_point_(switch_point) {}

  ControlState transition(ControlState state, int line) const override {
    const int count = access_count(state);
    ControlState perm = queue_bits(state);
    if (count >= switch_point_) {
      perm = perm_move_to_back(perm, capacity(), line);
    }
    return pack(perm, bump(count));
  }

  Eviction evict(ControlState state) const override {
    ControlState perm = queue_bits(state);
    const int victim = perm_at(perm, 0);
    perm = perm_move_to_back(perm, capacity(), victim);
    return {pack(perm, bump(access_count(state))), victim};
  }

 private:
  static constexpr ControlState kQueueMask = 0xFFFFFFFFFFFFull;

  int access_count(ControlState state) const { return static_cast<int>(state >> 48); }
  ControlState queue_bits(ControlState state) const { return state & kQueueMask; }
  int bump(int count) const { return count < switch_point_ ? count + 1 : count; }
  ControlState pack(ControlState perm, int count) const {
    return perm | (static_cast<ControlState>(count) << 48);
  }

  int switch_point_;
};

[[noreturn]] void reject(const std::string& why) {
  throw std::invalid_argument("bad policy descriptor: " + why);
}

int parse_int(std::string_view text, const std::string& what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    reject(what + " '" + std::string(text) + "' is not a number");
  }
  return value;
}

}  // namespace

PolicyDescriptor PolicyDescriptor::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t colon = text.find(':', start);
    if (colon == std::string_view::npos) colon = text.size();
    parts.push_back(text.substr(start, colon - start));
    start = colon + 1;
  }
  if (parts.size() < 2) reject("'" + std::string(text) + "' (expected <kind>:<capacity>)");

  PolicyDescriptor d;
  const std::string_view kind = parts[0];
  if (kind == "lru") {
    d.kind = PolicyKind::Lru;
  } else if (kind == "fifo") {
    d.kind = PolicyKind::Fifo;
  } else if (kind == "plru") {
    d.kind = PolicyKind::Plru;
  } else if (kind == "mru") {
    d.kind = PolicyKind::Mru;
  } else if (kind == "flru") {
    d.kind = PolicyKind::Flru;
  } else {
    reject("unknown kind '" + std::string(kind) + "'");
  }
  const bool takes_switch = d.kind == PolicyKind::Flru;
  if (parts.size() != (takes_switch ? 3u : 2u)) {
    reject("'" + std::string(text) + "' has the wrong number of ':' fields");
  }
  d.capacity = parse_int(parts[1], "capacity");
  if (takes_switch) d.switch_point = parse_int(parts[2], "switch point");
  return d;
}

std::string PolicyDescriptor::to_string() const {
  switch (kind) {
    case PolicyKind::Lru:
      return "lru:" + std::to_string(capacity);
    case PolicyKind::Fifo:
      return "fifo:" + std::to_string(capacity);
    case PolicyKind::Plru:
      return "plru:" + std::to_string(capacity);
    case PolicyKind::Mru:
      return "mru:" + std::to_string(capacity);
    case PolicyKind::Flru:
      return "flru:" + std::to_string(capacity) + ":" + std::to_string(switch_point);
  }
  return {};
}

PolicyPtr make_policy(const PolicyDescriptor& d) {
  if (d.capacity < 1) reject("capacity must be positive");
  switch (d.kind) {
    case PolicyKind::Lru:
      if (d.capacity > 16) reject("lru capacity is limited to 16 by the state encoding");
      return std::make_shared<LruPolicy>(d.capacity);
    case PolicyKind::Fifo:
      if (d.capacity > (1 << 20)) reject("fifo capacity is limited to 2^20");
      return std::make_shared<FifoPolicy>(d.capacity);
    case PolicyKind::Plru:
      if ((d.capacity & (d.capacity - 1)) != 0) {
        reject("plru capacity must be a power of two (got " +
               std::to_string(d.capacity) + ")");
      }
      if (d.capacity > 32) reject("plru capacity is limited to 32 by the state encoding");
      return std::make_shared<PlruPolicy>(d.capacity);
    case PolicyKind::Mru:
      if (d.capacity > 32) reject("mru capacity is limited to 32 by the state encoding");
      return std::make_shared<MruPolicy>(d.capacity);
    case PolicyKind::Flru:
      if (d.capacity > 12) reject("flru capacity is limited to 12 by the state encoding");
      if (d.switch_point < 1) reject("flru switch point must be positive");
      if (d.switch_point > 65535) reject("flru switch point is limited to 65535");
      return std::make_shared<FlruPolicy>(d.capacity, d.switch_point);
  }
  reject("unknown kind");
}

PolicyPtr make_policy(std::string_view descriptor_text) {
  return make_policy(PolicyDescriptor::parse(descriptor_text));
}

Configuration initial_configuration(const CacheAlgorithm& alg) {
  Configuration config;
  config.state = alg.initial_state();
  config.content.assign(alg.capacity(), kNoBlock);
  return config;
}

UpdateResult update(const CacheAlgorithm& alg, const Configuration& config,
                    BlockId block) {
  UpdateResult result{config, false};
  result.hit = update_in_place(alg, result.config.state, result.config.content, block);
  return result;
}

bool update_in_place(const CacheAlgorithm& alg, ControlState& state,
                     std::span<BlockId> content, BlockId block) {
  const int lines = alg.capacity();
  for (int j = 0; j < lines; ++j) {
    if (content[j] == block) {
      state = alg.transition(state, j);
      return true;
    }
  }
  const Eviction ev = alg.evict(state);
  assert(ev.line >= 0 && ev.line < lines);
  state = ev.state;
  content[ev.line] = block;
  return false;
}

}  // namespace leakcomp
