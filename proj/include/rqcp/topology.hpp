#pragma once

// Structural analysis of typed topologies: convergence, polyforests and
// the relation of channels sharing a simple undirected cycle.

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "model.hpp"

namespace rqcp {

// Alternating sequence p0 c1 p1 ... cn pn; channels.size() + 1 == processes.size().
struct UndirectedPath {
  std::vector<int> processes;
  std::vector<int> channels;

  std::size_t length() const { return channels.size(); }
  bool is_simple() const {
    std::set<int> seen(processes.begin(), processes.end());
    return seen.size() == processes.size();
  }
  auto operator<=>(const UndirectedPath&) const = default;
};

inline std::string format_path(const TypedTopology& topo, const UndirectedPath& path) {
  std::string out = topo.processes[path.processes.front()];
  for (std::size_t i = 0; i < path.channels.size(); ++i) {
    out += " -" + topo.channels[path.channels[i]].name + "- " + topo.processes[path.processes[i + 1]];
  }
  return out;
}

namespace detail {

// Incident (channel, neighbour) pairs per process, channels in id order.
inline std::vector<std::vector<std::pair<int, int>>> incidence(const TypedTopology& topo) {
  std::vector<std::vector<std::pair<int, int>>> adj(topo.processes.size());
  for (int c = 0; c < topo.num_channels(); ++c) {
    const auto& ch = topo.channels[c];
    adj[ch.src].emplace_back(c, ch.dst);
    adj[ch.dst].emplace_back(c, ch.src);
  }
  for (auto& v : adj) std::sort(v.begin(), v.end());
  return adj;
}

}  // namespace detail

// Some simple undirected path whose end processes are unrestricted on the
// end channels, or nullopt when the topology is non-converging.
inline std::optional<UndirectedPath> converging_witness(const TypedTopology& topo) {
  const auto adj = detail::incidence(topo);
  const int np = topo.num_processes();
  std::vector<char> on_path(np, 0);
  UndirectedPath path;
  std::optional<UndirectedPath> found;

  std::function<bool(int)> extend = [&](int p) -> bool {
    for (const auto& [c, q] : adj[p]) {
      if (on_path[q]) continue;
      path.channels.push_back(c);
      path.processes.push_back(q);
      if (!topo.is_restricted(q, c)) {
        found = path;
        return true;
      }
      on_path[q] = 1;
      if (extend(q)) return true;
      on_path[q] = 0;
      path.channels.pop_back();
      path.processes.pop_back();
    }
    return false;
  };

  for (int p0 = 0; p0 < np; ++p0) {
    for (const auto& [c1, q] : adj[p0]) {
      if (topo.is_restricted(p0, c1)) continue;
      path = UndirectedPath{{p0, q}, {c1}};
      if (!topo.is_restricted(q, c1)) return path;
      std::fill(on_path.begin(), on_path.end(), 0);
      on_path[p0] = on_path[q] = 1;
      if (extend(q)) return found;
    }
  }
  return std::nullopt;
}

inline bool is_converging(const TypedTopology& topo) { return converging_witness(topo).has_value(); }

inline bool is_polyforest(const TypedTopology& topo) {
  std::vector<int> parent(topo.processes.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& ch : topo.channels) {
    const int a = find(ch.src), b = find(ch.dst);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

// Biconnected components as channel sets (edge-based Tarjan). Bridges come
// out as singleton components.
inline std::vector<std::vector<int>> biconnected_components(const TypedTopology& topo) {
  const auto adj = detail::incidence(topo);
  const int np = topo.num_processes();
  std::vector<int> disc(np, -1), low(np, 0);
  std::vector<int> edge_stack;
  std::vector<std::vector<int>> comps;
  int timer = 0;

  std::function<void(int, int)> dfs = [&](int u, int parent_edge) {
    disc[u] = low[u] = timer++;
    for (const auto& [c, v] : adj[u]) {
      if (c == parent_edge) continue;
      if (disc[v] == -1) {
        edge_stack.push_back(c);
        dfs(v, c);
        low[u] = std::min(low[u], low[v]);
        if (low[v] >= disc[u]) {
          std::vector<int> comp;
          while (true) {
            const int e = edge_stack.back();
            edge_stack.pop_back();
            comp.push_back(e);
            if (e == c) break;
          }
          std::sort(comp.begin(), comp.end());
          comps.push_back(std::move(comp));
        }
      } else if (disc[v] < disc[u]) {
        edge_stack.push_back(c);
        low[u] = std::min(low[u], disc[v]);
      }
    }
  };
  for (int p = 0; p < np; ++p) {
    if (disc[p] == -1) dfs(p, -1);
  }
  std::sort(comps.begin(), comps.end());
  return comps;
}

using ChannelRelation = std::set<std::pair<int, int>>;

// (c, d) with c != d lying on a common simple undirected cycle; symmetric.
inline ChannelRelation co_cycle_relation(const TypedTopology& topo) {
  ChannelRelation rel;
  for (const auto& comp : biconnected_components(topo)) {
    if (comp.size() < 2) continue;
    for (int c : comp) {
      for (int d : comp) {
        if (c != d) rel.emplace(c, d);
      }
    }
  }
  return rel;
}

// Simple undirected cycles with at most max_len channels. Each cycle starts
// and ends at its smallest process and is oriented so that its first
// channel id is below its last one.
inline std::vector<UndirectedPath> enumerate_simple_cycles(const TypedTopology& topo,
                                                           std::size_t max_len) {
  const auto adj = detail::incidence(topo);
  const int np = topo.num_processes();
  std::vector<UndirectedPath> out;
  std::vector<char> on_path(np, 0);
  UndirectedPath path;

  std::function<void(int, int)> extend = [&](int start, int p) {
    for (const auto& [c, q] : adj[p]) {
      if (std::find(path.channels.begin(), path.channels.end(), c) != path.channels.end()) continue;
      if (q == start) {
        if (path.channels.size() + 1 >= 2 && path.channels.front() < c) {
          UndirectedPath cycle = path;
          cycle.channels.push_back(c);
          cycle.processes.push_back(start);
          out.push_back(std::move(cycle));
        }
        continue;
      }
      if (q < start || on_path[q] || path.channels.size() + 1 >= max_len) continue;
      on_path[q] = 1;
      path.channels.push_back(c);
      path.processes.push_back(q);
      extend(start, q);
      path.channels.pop_back();
      path.processes.pop_back();
      on_path[q] = 0;
    }
  };

  for (int s = 0; s < np; ++s) {
    path = UndirectedPath{{s}, {}};
    on_path[s] = 1;
    extend(s, s);
    on_path[s] = 0;
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Consecutive channels on some simple cycle (the weak variant of the
// co-cycle relation); symmetric.
inline ChannelRelation weak_co_cycle_relation(const TypedTopology& topo) {
  ChannelRelation rel;
  for (const auto& cyc : enumerate_simple_cycles(topo, topo.channels.size())) {
    const std::size_t n = cyc.channels.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int c = cyc.channels[i], d = cyc.channels[(i + 1) % n];
      rel.emplace(c, d);
      rel.emplace(d, c);
    }
  }
  return rel;
}

inline std::string topology_dot(const TypedTopology& topo) {
  std::string out = "digraph topology {\n";
  for (const auto& p : topo.processes) out += "  \"" + p + "\";\n";
  for (int c = 0; c < topo.num_channels(); ++c) {
    const auto& ch = topo.channels[c];
    std::string tail = topo.is_restricted(ch.src, c) ? "dot" : "odot";
    std::string head = topo.is_restricted(ch.dst, c) ? "dot" : "odot";
    out += "  \"" + topo.processes[ch.src] + "\" -> \"" + topo.processes[ch.dst] + "\" [label=\"" +
           ch.name + "\", dir=both, arrowtail=" + tail + ", arrowhead=\"normal" + head + "\"];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace rqcp
