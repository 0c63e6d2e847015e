#pragma once

// The mutex restriction: on every simple undirected cycle at most one
// channel is nonempty. Configuration classification and a decision
// procedure for finite systems.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "model.hpp"
#include "topology.hpp"

namespace rqcp {

inline ChannelRelation mutex_relation(const TypedTopology& topo, bool weak) {
  return weak ? weak_co_cycle_relation(topo) : co_cycle_relation(topo);
}

inline bool is_mutex_nonempty_set(const ChannelRelation& rel, const std::vector<char>& nonempty) {
  for (const auto& [c, d] : rel) {
    if (nonempty[c] && nonempty[d]) return false;
  }
  return true;
}

inline bool is_mutex_config(const TypedTopology& topo, const Configuration& x, bool weak = false) {
  std::vector<char> nonempty(x.channels.size());
  for (std::size_t c = 0; c < x.channels.size(); ++c) nonempty[c] = !x.channels[c].empty();
  return is_mutex_nonempty_set(mutex_relation(topo, weak), nonempty);
}

struct MutexWitness {
  std::vector<int> control;
  std::vector<int> nonempty;  // channel ids
  int process = 0;
  Action send;
  std::vector<std::pair<int, Action>> trace;  // abstract eager run leading to `control`
};

struct MutexResult {
  bool mutex = true;
  bool short_circuit = false;  // polyforest: no exploration needed
  std::optional<MutexWitness> witness;
  std::size_t states_explored = 0;
};

inline MutexResult check_mutex(const Rqcp& system, bool weak = false) {
  if (!system.is_finite()) throw InputError("mutex check requires empty stack alphabets");
  const auto& topo = system.topology;
  if (topo.num_channels() > 32) throw InputError("mutex check supports at most 32 channels");
  MutexResult result;
  if (is_polyforest(topo)) {
    result.short_circuit = true;
    return result;
  }
  const ChannelRelation rel = mutex_relation(topo, weak);
  std::vector<std::uint32_t> partners(topo.num_channels(), 0);
  for (const auto& [c, d] : rel) partners[c] |= 1u << d;

  using Key = std::pair<std::vector<int>, std::uint32_t>;
  struct Node {
    Key key;
    int parent;
    std::vector<std::pair<int, Action>> via;
  };
  std::vector<Node> nodes;
  std::map<Key, int> index;
  std::deque<int> work;
  auto visit = [&](Key key, int parent, std::vector<std::pair<int, Action>> via) {
    if (index.contains(key)) return;
    index.emplace(key, static_cast<int>(nodes.size()));
    work.push_back(static_cast<int>(nodes.size()));
    nodes.push_back({std::move(key), parent, std::move(via)});
  };
  visit({system.initial_control(), 0u}, -1, {});

  const int np = topo.num_processes();
  while (!work.empty()) {
    const int id = work.front();
    work.pop_front();
    const auto z = nodes[id].key.first;
    const std::uint32_t n = nodes[id].key.second;
    for (int p = 0; p < np; ++p) {
      for (const auto& t : system.processes[p].transitions) {
        if (t.from != z[p]) continue;
        const auto& a = t.action;
        if (a.kind == ActionKind::Recv) continue;  // only inside a rendezvous
        if (a.kind != ActionKind::Send) {
          auto z2 = z;
          z2[p] = t.to;
          visit({z2, n}, id, {{p, a}});
          continue;
        }
        const int c = a.channel;
        if (partners[c] & n & ~(1u << c)) {
          MutexWitness w;
          w.control = z;
          for (int d = 0; d < topo.num_channels(); ++d) {
            if (n & (1u << d)) w.nonempty.push_back(d);
          }
          w.process = p;
          w.send = a;
          for (int cur = id; cur > 0; cur = nodes[cur].parent) {
            w.trace.insert(w.trace.begin(), nodes[cur].via.begin(), nodes[cur].via.end());
          }
          result.mutex = false;
          result.witness = std::move(w);
          result.states_explored = nodes.size();
          return result;
        }
        auto z2 = z;
        z2[p] = t.to;
        visit({z2, n | (1u << c)}, id, {{p, a}});
        if (n & (1u << c)) continue;
        const int r = topo.channels[c].dst;
        for (const auto& u : system.processes[r].transitions) {
          if (u.from != z[r] || u.action.kind != ActionKind::Recv || u.action.channel != c ||
              u.action.message != a.message) {
            continue;
          }
          auto z3 = z2;
          z3[r] = u.to;
          visit({z3, n}, id, {{p, a}, {r, u.action}});
        }
      }
    }
  }
  result.states_explored = nodes.size();
  return result;
}

}  // namespace rqcp
