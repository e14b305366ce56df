#include "leakcomp/congruence.hpp"

#include <algorithm>
#include <cassert>
#include <deque>
#include <set>
#include <stdexcept>

#include "leakcomp/simulate.hpp"

namespace leakcomp {

BlockId Renaming::operator()(BlockId block) const {
  auto it = forward_.find(block);
  return it == forward_.end() ? block : it->second;
}

BlockId Renaming::preimage(BlockId block) const {
  auto it = backward_.find(block);
  return it == backward_.end() ? block : it->second;
}

void Renaming::bind(BlockId from, BlockId to) {
  if (from == to) {
    forward_.erase(from);
    backward_.erase(to);
  } else {
    forward_[from] = to;
    backward_[to] = from;
  }
}

void Renaming::map_to(BlockId from, BlockId to) {
  const BlockId old_to = (*this)(from);
  if (old_to == to) return;
  const BlockId old_from = preimage(to);
  bind(from, to);
  bind(old_from, old_to);
}

Renaming Renaming::inverted() const {
  Renaming out;
  out.forward_ = backward_;
  out.backward_ = forward_;
  return out;
}

Renaming Renaming::composed(const Renaming& outer, const Renaming& inner) {
  Renaming out;
  for (const auto& [from, mid] : inner.forward_) {
    out.bind(from, outer(mid));
  }
  for (const auto& [from, to] : outer.forward_) {
    if (!inner.forward_.contains(from)) {
      out.bind(from, to);
    }
  }
  return out;
}

Trace rename(const Renaming& pi, const Trace& trace) {
  Trace out;
  out.reserve(trace.size());
  for (BlockId block : trace) out.push_back(pi(block));
  return out;
}

Configuration rename(const Renaming& pi, const Configuration& config) {
  Configuration out;
  out.state = config.state;
  out.content.reserve(config.content.size());
  for (BlockId block : config.content) {
    out.content.push_back(block == kNoBlock ? kNoBlock : pi(block));
  }
  return out;
}

std::size_t PairClassHash::operator()(const PairClass& cls) const {
  std::size_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint64_t value) {
    h ^= value + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  };
  mix(cls.state_p);
  mix(cls.state_q);
  for (BlockId b : cls.content_p) mix(static_cast<std::uint64_t>(b) + 1);
  mix(0x517cc1b727220a95ull);
  for (BlockId b : cls.content_q) mix(static_cast<std::uint64_t>(b) + 1);
  return h;
}

CanonicalForm canonicalize(const Configuration& config_p, const Configuration& config_q) {
  CanonicalForm out;
  out.cls.state_p = config_p.state;
  out.cls.state_q = config_q.state;

  std::vector<std::pair<BlockId, BlockId>> assignment;  // original -> canonical
  auto relabel = [&assignment](const std::vector<BlockId>& content) {
    std::vector<BlockId> relabeled;
    relabeled.reserve(content.size());
    for (BlockId block : content) {
      if (block == kNoBlock) {
        relabeled.push_back(kNoBlock);
        continue;
      }
      BlockId canonical = kNoBlock;
      for (const auto& [from, to] : assignment) {
        if (from == block) {
          canonical = to;
          break;
        }
      }
      if (canonical == kNoBlock) {
        canonical = static_cast<BlockId>(assignment.size());
        assignment.emplace_back(block, canonical);
      }
      relabeled.push_back(canonical);
    }
    return relabeled;
  };
  out.cls.content_p = relabel(config_p.content);
  out.cls.content_q = relabel(config_q.content);

  for (const auto& [from, to] : assignment) {
    out.witness.map_to(from, to);
  }
  return out;
}

PackedPair pack_into_shared_alphabet(const Configuration& config_p,
                                     const Configuration& config_q) {
  const BlockId universe =
      static_cast<BlockId>(config_p.content.size() + config_q.content.size());
  std::set<BlockId> available;
  for (BlockId b = 0; b < universe; ++b) available.insert(b);
  for (const auto* content : {&config_p.content, &config_q.content}) {
    for (BlockId block : *content) {
      if (block != kNoBlock && block < universe) available.erase(block);
    }
  }
  PackedPair out;
  out.config_p.state = config_p.state;
  out.config_q.state = config_q.state;
  Renaming& pi = out.witness;
  for (const auto* content : {&config_p.content, &config_q.content}) {
    for (BlockId block : *content) {
      if (block == kNoBlock || pi(block) < universe) continue;
      assert(!available.empty());
      const BlockId target = *available.begin();
      available.erase(available.begin());
      pi.map_to(block, target);
    }
  }
  out.config_p = rename(pi, config_p);
  out.config_q = rename(pi, config_q);
  return out;
}

std::pair<Configuration, Configuration> class_representative(const PairClass& cls) {
  return {Configuration{cls.state_p, cls.content_p},
          Configuration{cls.state_q, cls.content_q}};
}

std::vector<ClassSuccessor> class_successors(const PairClass& cls,
                                             const CacheAlgorithm& p,
                                             const CacheAlgorithm& q) {
  std::set<BlockId> cached;
  for (BlockId block : cls.content_p) {
    if (block != kNoBlock) cached.insert(block);
  }
  for (BlockId block : cls.content_q) {
    if (block != kNoBlock) cached.insert(block);
  }
  BlockId fresh = 0;
  while (cached.contains(fresh)) ++fresh;

  std::vector<ClassSuccessor> successors;
  successors.reserve(cached.size() + 1);
  auto [rep_p, rep_q] = class_representative(cls);
  for (BlockId block : cached) {
    auto next_p = update(p, rep_p, block);
    auto next_q = update(q, rep_q, block);
    ClassSuccessor s;
    s.cls = canonicalize(next_p.config, next_q.config).cls;
    s.access = block;
    s.fresh = false;
    s.miss_p = !next_p.hit;
    s.miss_q = !next_q.hit;
    successors.push_back(std::move(s));
  }
  {
    auto next_p = update(p, rep_p, fresh);
    auto next_q = update(q, rep_q, fresh);
    ClassSuccessor s;
    s.cls = canonicalize(next_p.config, next_q.config).cls;
    s.access = fresh;
    s.fresh = true;
    s.miss_p = !next_p.hit;
    s.miss_q = !next_q.hit;
    successors.push_back(std::move(s));
  }
  return successors;
}

QuotientGraph quotient_explore(const CacheAlgorithm& p, const CacheAlgorithm& q,
                               std::size_t class_ceiling) {
  QuotientGraph graph;
  std::unordered_map<PairClass, int, PairClassHash> index;

  const auto initial =
      canonicalize(initial_configuration(p), initial_configuration(q)).cls;
  graph.nodes.push_back(initial);
  graph.edges.emplace_back();
  graph.parent.push_back(-1);
  graph.parent_edge.push_back(-1);
  index.emplace(initial, 0);

  std::deque<int> frontier{0};
  while (!frontier.empty()) {
    const int node = frontier.front();
    frontier.pop_front();
    const auto successors = class_successors(graph.nodes[node], p, q);
    for (const auto& s : successors) {
      auto [it, inserted] = index.try_emplace(s.cls, static_cast<int>(graph.nodes.size()));
      if (inserted) {
        if (graph.nodes.size() >= class_ceiling) {
          throw BudgetError("quotient exploration exceeded the class ceiling of " +
                            std::to_string(class_ceiling) + " (at least " +
                            std::to_string(graph.nodes.size() + 1) +
                            " classes reachable)");
        }
        graph.nodes.push_back(s.cls);
        graph.edges.emplace_back();
        graph.parent.push_back(node);
        graph.parent_edge.push_back(static_cast<int>(graph.edges[node].size()));
        frontier.push_back(it->second);
      }
      graph.edges[node].push_back(
          QuotientEdge{it->second, s.access, s.fresh, s.miss_p, s.miss_q});
    }
  }
  return graph;
}

namespace {

int edge_weight(const QuotientEdge& e) {
  return (e.miss_p ? 1 : 0) - (e.miss_q ? 1 : 0);
}

// Iterative Tarjan; returns the component id per node.
std::vector<int> strongly_connected_components(const QuotientGraph& graph) {
  const int n = static_cast<int>(graph.size());
  std::vector<int> component(n, -1), index(n, -1), lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int next_index = 0, next_component = 0;

  struct Frame {
    int node;
    std::size_t edge;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& frame = call.back();
      if (frame.edge < graph.edges[frame.node].size()) {
        const int child = graph.edges[frame.node][frame.edge++].target;
        if (index[child] == -1) {
          index[child] = lowlink[child] = next_index++;
          stack.push_back(child);
          on_stack[child] = true;
          call.push_back({child, 0});
        } else if (on_stack[child]) {
          lowlink[frame.node] = std::min(lowlink[frame.node], index[child]);
        }
        continue;
      }
      const int node = frame.node;
      call.pop_back();
      if (!call.empty()) {
        lowlink[call.back().node] = std::min(lowlink[call.back().node], lowlink[node]);
      }
      if (lowlink[node] == index[node]) {
        while (true) {
          const int member = stack.back();
          stack.pop_back();
          on_stack[member] = false;
          component[member] = next_component;
          if (member == node) break;
        }
        ++next_component;
      }
    }
  }
  return component;
}

// Splices repeated nodes out of a positive-net closed walk until a simple
// cycle remains; some simple sub-cycle keeps a positive net because nets are
// additive under the decomposition.
void reduce_to_simple_cycle(const QuotientGraph& graph, std::vector<int>& nodes,
                            std::vector<int>& edge_indices) {
  while (true) {
    std::unordered_map<int, std::size_t> seen;
    bool spliced = false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      auto [it, inserted] = seen.try_emplace(nodes[i], i);
      if (inserted) continue;
      // nodes[it->second .. i) closes a loop at nodes[i] == nodes[it->second]
      const std::size_t from = it->second;
      int net = 0;
      for (std::size_t k = from; k < i; ++k) {
        net += edge_weight(graph.edges[nodes[k]][edge_indices[k]]);
      }
      int total = 0;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        total += edge_weight(graph.edges[nodes[k]][edge_indices[k]]);
      }
      const bool keep_loop = (total > 0) ? (net > 0) : (net < 0);
      if (keep_loop) {
        nodes.assign(nodes.begin() + from, nodes.begin() + i);
        edge_indices.assign(edge_indices.begin() + from, edge_indices.begin() + i);
      } else {
        nodes.erase(nodes.begin() + from, nodes.begin() + i);
        edge_indices.erase(edge_indices.begin() + from, edge_indices.begin() + i);
      }
      spliced = true;
      break;
    }
    if (!spliced) return;
  }
}

// Finds a simple cycle with sign*net > 0, or nullopt. Exact: within each
// strongly connected component, a walk DP pinned at a start node over exact
// edge counts up to the component size covers every simple cycle.
std::optional<CycleWitness> find_gain_cycle(const QuotientGraph& graph, int sign) {
  const int n = static_cast<int>(graph.size());
  const std::vector<int> component = strongly_connected_components(graph);

  std::vector<std::vector<int>> members(n);
  for (int v = 0; v < n; ++v) members[component[v]].push_back(v);

  constexpr long long kUnreachable = -(1ll << 60);
  for (const auto& scc : members) {
    if (scc.size() == 0) continue;
    const std::size_t size = scc.size();
    if (size == 1) {
      // self loops only
      const int v = scc[0];
      for (std::size_t k = 0; k < graph.edges[v].size(); ++k) {
        const QuotientEdge& e = graph.edges[v][k];
        if (e.target == v && sign * edge_weight(e) > 0) {
          CycleWitness cycle;
          cycle.nodes = {v};
          cycle.edge_indices = {static_cast<int>(k)};
          cycle.net_gain = edge_weight(e);
          return cycle;
        }
      }
      continue;
    }
    std::unordered_map<int, int> local;
    for (std::size_t i = 0; i < size; ++i) local.emplace(scc[i], static_cast<int>(i));

    for (int start : scc) {
      std::vector<long long> gain(size, kUnreachable);
      std::vector<std::vector<std::pair<int, int>>> pred(size + 1);  // (prev local, edge)
      gain[local[start]] = 0;
      std::vector<long long> next_gain(size);
      for (std::size_t steps = 1; steps <= size; ++steps) {
        next_gain.assign(size, kUnreachable);
        pred[steps].assign(size, {-1, -1});
        for (std::size_t i = 0; i < size; ++i) {
          if (gain[i] == kUnreachable) continue;
          const int u = scc[i];
          for (std::size_t k = 0; k < graph.edges[u].size(); ++k) {
            const QuotientEdge& e = graph.edges[u][k];
            if (component[e.target] != component[u]) continue;
            const int j = local[e.target];
            const long long cand = gain[i] + sign * edge_weight(e);
            if (cand > next_gain[j]) {
              next_gain[j] = cand;
              pred[steps][j] = {static_cast<int>(i), static_cast<int>(k)};
            }
          }
        }
        gain.swap(next_gain);
        if (gain[local[start]] != kUnreachable && gain[local[start]] > 0) {
          // Reconstruct the closed walk backwards through the step-indexed preds.
          std::vector<int> nodes(steps), edge_indices(steps);
          int at = local[start];
          for (std::size_t s = steps; s > 0; --s) {
            const auto [prev, edge] = pred[s][at];
            nodes[s - 1] = scc[prev];
            edge_indices[s - 1] = edge;
            at = prev;
          }
          reduce_to_simple_cycle(graph, nodes, edge_indices);
          CycleWitness cycle;
          cycle.nodes = std::move(nodes);
          cycle.edge_indices = std::move(edge_indices);
          cycle.net_gain = 0;
          for (std::size_t i = 0; i < cycle.nodes.size(); ++i) {
            cycle.net_gain +=
                edge_weight(graph.edges[cycle.nodes[i]][cycle.edge_indices[i]]);
          }
          if (sign * cycle.net_gain <= 0) {
            throw std::logic_error("gain-cycle extraction produced net " +
                                   std::to_string(cycle.net_gain));
          }
          return cycle;
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

BoundednessResult classify_boundedness(const QuotientGraph& graph) {
  BoundednessResult result;
  result.quotient_size = graph.size();
  for (int sign : {+1, -1}) {
    if (auto cycle = find_gain_cycle(graph, sign)) {
      result.unbounded = true;
      result.cycle = std::move(cycle);
      return result;
    }
  }
  return result;
}

BoundednessResult detect_unbounded(const CacheAlgorithm& p, const CacheAlgorithm& q,
                                   std::size_t class_ceiling) {
  return classify_boundedness(quotient_explore(p, q, class_ceiling));
}

namespace {

BlockId smallest_uncached(const Configuration& a, const Configuration& b) {
  std::set<BlockId> cached;
  for (BlockId block : a.content) {
    if (block != kNoBlock) cached.insert(block);
  }
  for (BlockId block : b.content) {
    if (block != kNoBlock) cached.insert(block);
  }
  BlockId fresh = 0;
  while (cached.contains(fresh)) ++fresh;
  return fresh;
}

// Replays one abstract edge on a concrete configuration pair and returns the
// concrete block that was accessed.
BlockId instantiate_edge(const QuotientGraph& graph, int source,
                         const QuotientEdge& edge, const CacheAlgorithm& p,
                         const CacheAlgorithm& q, Configuration& config_p,
                         Configuration& config_q) {
  const CanonicalForm canon = canonicalize(config_p, config_q);
  if (!(canon.cls == graph.nodes[source])) {
    throw std::logic_error("pump instantiation desynchronized from the quotient graph");
  }
  const BlockId concrete =
      edge.fresh ? smallest_uncached(config_p, config_q) : canon.witness.preimage(edge.access);
  config_p = update(p, config_p, concrete).config;
  config_q = update(q, config_q, concrete).config;
  return concrete;
}

}  // namespace

std::optional<PumpFamily> find_pump_family(const CacheAlgorithm& p,
                                           const CacheAlgorithm& q,
                                           std::size_t class_ceiling) {
  const QuotientGraph graph = quotient_explore(p, q, class_ceiling);
  const BoundednessResult verdict = classify_boundedness(graph);
  if (!verdict.unbounded) return std::nullopt;
  const CycleWitness& cycle = *verdict.cycle;
  const int entry = cycle.nodes.front();

  // Abstract path from the initial class to the cycle entry, via BFS parents.
  std::vector<std::pair<int, int>> path;  // (node, edge index)
  for (int node = entry; graph.parent[node] != -1; node = graph.parent[node]) {
    path.emplace_back(graph.parent[node], graph.parent_edge[node]);
  }
  std::reverse(path.begin(), path.end());

  PumpFamily family;
  Configuration config_p = initial_configuration(p);
  Configuration config_q = initial_configuration(q);
  for (const auto& [node, edge_index] : path) {
    family.base.push_back(instantiate_edge(graph, node, graph.edges[node][edge_index], p,
                                           q, config_p, config_q));
  }

  const Configuration loop_start_p = config_p;
  const Configuration loop_start_q = config_q;
  for (std::size_t i = 0; i < cycle.nodes.size(); ++i) {
    const int node = cycle.nodes[i];
    family.cycle.push_back(instantiate_edge(graph, node, graph.edges[node][cycle.edge_indices[i]],
                                            p, q, config_p, config_q));
  }

  // pi maps the loop-entry pair onto the pair after one traversal, so repeated
  // cycles are re-instantiated by renaming alone.
  const Renaming before = canonicalize(loop_start_p, loop_start_q).witness;
  const Renaming after = canonicalize(config_p, config_q).witness;
  family.loop_renaming = Renaming::composed(after.inverted(), before);

  family.direction = cycle.net_gain > 0 ? +1 : -1;
  family.gain = cycle.net_gain > 0 ? cycle.net_gain : -cycle.net_gain;
  family.base_diff =
      count_misses(p, family.base) - count_misses(q, family.base);
  const long long cycle_len = static_cast<long long>(family.cycle.size());
  family.rate = Rational{family.gain, cycle_len + 1};

  // Smallest m beyond which (gap_0 + m*gain)*(len_cycle+1) > gain*(len_base + m*len_cycle),
  // monotone in m, so one threshold covers all larger repetition counts.
  const long long oriented_base = family.direction * family.base_diff;
  const long long numerator = family.gain * static_cast<long long>(family.base.size()) -
                              oriented_base * (cycle_len + 1);
  family.threshold_m = numerator < 0 ? 0 : numerator / family.gain + 1;
  return family;
}

Trace pump(const CacheAlgorithm& p, const CacheAlgorithm& q, const PumpFamily& family,
           int repetitions) {
  if (repetitions < 0) {
    throw std::invalid_argument("pump repetition count must be non-negative");
  }
  Trace tau = family.base;
  Trace omega = family.cycle;
  for (int m = 0; m < repetitions; ++m) {
    tau.insert(tau.end(), omega.begin(), omega.end());
    omega = rename(family.loop_renaming, omega);
  }

  const long long diff = count_misses(p, tau) - count_misses(q, tau);
  const long long expected =
      family.base_diff + static_cast<long long>(repetitions) * family.direction * family.gain;
  if (diff != expected) {
    throw std::logic_error("pump verification failed at m=" + std::to_string(repetitions) +
                           ": simulated gap " + std::to_string(diff) + ", expected " +
                           std::to_string(expected));
  }
  if (repetitions > family.threshold_m) {
    const long long gap = diff < 0 ? -diff : diff;
    if (gap * family.rate.den <= family.rate.num * static_cast<long long>(tau.size())) {
      throw std::logic_error("pump rate bound failed at m=" + std::to_string(repetitions));
    }
  }
  return tau;
}

}  // namespace leakcomp
