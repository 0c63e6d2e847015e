#pragma once

// Eager reachability. For recursive systems over non-converging typed
// topologies, eager well-bracketed runs are simulated by a single product
// pushdown whose control tracks the active process, the control vector,
// the processes with empty stacks and the growing channels. Finite systems
// use a direct search over (control vector, growing channels).

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "model.hpp"
#include "pushdown.hpp"
#include "topology.hpp"

namespace rqcp {

class ConvergingTopologyError : public InputError {
 public:
  ConvergingTopologyError(const TypedTopology& topo, UndirectedPath w)
      : InputError("typed topology is converging: " + format_path(topo, w)), witness(std::move(w)) {}
  UndirectedPath witness;
};

inline constexpr const char* kDrainLabel = "#drain";
inline constexpr const char* kDoneLabel = "#done";

inline void check_target(const Rqcp& system, const std::vector<int>& target) {
  if (target.size() != system.processes.size()) throw InputError("target vector has the wrong length");
  for (std::size_t p = 0; p < target.size(); ++p) {
    if (target[p] < 0 || target[p] >= system.processes[p].num_states()) {
      throw InputError("target state out of range for process " + system.topology.processes[p]);
    }
  }
}

// Adds to every process a drain state, entered from its target state, that
// pops any own symbol, and a done state reached from drain with an empty
// stack. Returns the augmented system; drain is state |Z^p|, done |Z^p|+1.
inline Rqcp with_drain(const Rqcp& system, const std::vector<int>& target) {
  Rqcp out = system;
  for (std::size_t p = 0; p < out.processes.size(); ++p) {
    auto& pd = out.processes[p];
    const int drain = pd.num_states();
    const int done = drain + 1;
    pd.states.push_back(kDrainLabel);
    pd.states.push_back(kDoneLabel);
    pd.transitions.push_back({target[p], Action::local(kDrainLabel), drain});
    for (int g = 0; g < pd.num_symbols(); ++g) pd.transitions.push_back({drain, Action::pop(g), drain});
    pd.transitions.push_back({drain, Action::local(kDoneLabel), done});
    pd.eps_actions.insert(Action::local(kDoneLabel));
  }
  return out;
}

struct Product {
  PushdownProcess pushdown;
  int accept = -1;  // -1 when the accepting state was never generated
  // Per control state: active, z_0..z_{n-1}, E mask, G mask, peeked symbol or -1.
  std::vector<std::vector<long long>> keys;
  std::size_t transitions = 0;
  long double state_bound = 0;  // |P| prod(|Z^p|+2) 2^|P| 2^|C| (1 + 2|Gamma|) + 1
};

inline Product build_product(const Rqcp& system, const std::vector<int>& target) {
  check_target(system, target);
  const auto& topo = system.topology;
  if (auto w = converging_witness(topo)) throw ConvergingTopologyError(topo, *w);
  const int np = topo.num_processes();
  if (np > 31 || topo.num_channels() > 31) throw InputError("product construction supports at most 31 processes and channels");

  const Rqcp aug = with_drain(system, target);
  std::vector<int> offset(np + 1, 0);
  for (int p = 0; p < np; ++p) offset[p + 1] = offset[p] + 2 * aug.processes[p].num_symbols();
  const int nsym = offset[np];
  std::vector<int> owner(nsym);
  for (int p = 0; p < np; ++p) {
    for (int s = offset[p]; s < offset[p + 1]; ++s) owner[s] = p;
  }
  auto sym = [&](int p, int g, int bottom_tag) { return offset[p] + 2 * g + bottom_tag; };

  Product prod;
  prod.pushdown.stack_alphabet.resize(nsym);
  for (int p = 0; p < np; ++p) {
    for (int g = 0; g < aug.processes[p].num_symbols(); ++g) {
      const std::string base = topo.processes[p] + "." + aug.processes[p].stack_alphabet[g];
      prod.pushdown.stack_alphabet[sym(p, g, 0)] = base;
      prod.pushdown.stack_alphabet[sym(p, g, 1)] = base + "/bottom";
    }
  }

  long double bound = np;
  long double gamma = 0;
  for (const auto& pd : system.processes) {
    bound *= pd.num_states() + 2;
    gamma += pd.num_symbols();
  }
  bound *= std::pow(2.0L, np) * std::pow(2.0L, topo.num_channels()) * (1 + 2 * gamma);
  prod.state_bound = bound + 1;

  using Key = std::vector<long long>;
  std::map<Key, int> index;
  std::deque<int> work;
  auto state_of = [&](const Key& k) {
    auto it = index.find(k);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(prod.keys.size());
    index.emplace(k, id);
    prod.keys.push_back(k);
    prod.pushdown.states.push_back("s" + std::to_string(id));
    work.push_back(id);
    return id;
  };
  auto add = [&](int from, Action a, int to) {
    prod.pushdown.transitions.push_back({from, std::move(a), to});
  };
  const Action step = Action::local("");
  const int iE = 1 + np, iG = 2 + np, iAux = 3 + np;

  Key init(np + 4, 0);
  init[0] = 0;
  for (int p = 0; p < np; ++p) init[1 + p] = aug.processes[p].init;
  init[iE] = (1LL << np) - 1;
  init[iG] = 0;
  init[iAux] = -1;
  prod.pushdown.init = state_of(init);
  if (np == 0) {
    prod.accept = state_of(Key(4, -1));
    add(prod.pushdown.init, step, prod.accept);
    prod.transitions = prod.pushdown.transitions.size();
    return prod;
  }

  auto in_e = [&](const Key& k, int p) { return ((k[iE] >> p) & 1) != 0; };
  auto guard_ok = [&](const Key& k, int p, const Action& a) { return !aug.processes[p].guarded(a) || in_e(k, p); };

  while (!work.empty()) {
    const int id = work.front();
    work.pop_front();
    const Key k = prod.keys[id];
    if (k[0] < 0) continue;  // accepting sink
    if (k[iAux] >= 0) {
      // Second half of a peek: restore the symbol and activate its owner.
      const int s = static_cast<int>(k[iAux]);
      Key k2 = k;
      k2[0] = owner[s];
      k2[iAux] = -1;
      add(id, Action::push(s), state_of(k2));
      continue;
    }
    const int a = static_cast<int>(k[0]);
    const auto& pd = aug.processes[a];
    for (const auto& t : pd.transitions) {
      if (t.from != k[1 + a]) continue;
      const auto& act = t.action;
      Key k2 = k;
      k2[1 + a] = t.to;
      switch (act.kind) {
        case ActionKind::Local:
          if (guard_ok(k, a, act)) add(id, step, state_of(k2));
          break;
        case ActionKind::Push:
          if (in_e(k, a)) {
            k2[iE] &= ~(1LL << a);
            add(id, Action::push(sym(a, act.symbol, 1)), state_of(k2));
          } else {
            add(id, Action::push(sym(a, act.symbol, 0)), state_of(k2));
          }
          break;
        case ActionKind::Pop:
          if (in_e(k, a)) break;
          add(id, Action::pop(sym(a, act.symbol, 0)), state_of(k2));
          k2[iE] |= 1LL << a;
          add(id, Action::pop(sym(a, act.symbol, 1)), state_of(k2));
          break;
        case ActionKind::Send: {
          if (!guard_ok(k, a, act)) break;
          const int c = act.channel;
          Key kg = k2;
          kg[iG] |= 1LL << c;
          add(id, step, state_of(kg));
          if ((k[iG] >> c) & 1) break;
          const int r = topo.channels[c].dst;
          for (const auto& u : aug.processes[r].transitions) {
            if (u.from != k[1 + r] || u.action != Action::recv(c, act.message) || !guard_ok(k, r, u.action)) continue;
            Key k3 = k2;
            k3[1 + r] = u.to;
            add(id, step, state_of(k3));
          }
          break;
        }
        case ActionKind::Recv: {
          const int c = act.channel;
          if ((k[iG] >> c) & 1 || !guard_ok(k, a, act)) break;
          const int s = topo.channels[c].src;
          for (const auto& u : aug.processes[s].transitions) {
            if (u.from != k[1 + s] || u.action != Action::send(c, act.message) || !guard_ok(k, s, u.action)) continue;
            Key k3 = k2;
            k3[1 + s] = u.to;
            add(id, step, state_of(k3));
          }
          break;
        }
      }
    }
    for (int q = 0; q < np; ++q) {
      if (q == a) continue;
      if (in_e(k, q)) {
        Key k2 = k;
        k2[0] = q;
        add(id, step, state_of(k2));
        continue;
      }
      for (int s = offset[q]; s < offset[q + 1]; ++s) {
        Key k2 = k;
        k2[iAux] = s;
        add(id, Action::pop(s), state_of(k2));
      }
    }
    bool all_done = true;
    for (int p = 0; p < np; ++p) all_done = all_done && k[1 + p] == aug.processes[p].num_states() - 1;
    if (all_done) {
      Key acc(np + 4, -1);
      prod.accept = state_of(acc);
      add(id, step, prod.accept);
    }
  }
  prod.transitions = prod.pushdown.transitions.size();
  return prod;
}

struct EagerReachResult {
  bool reachable = false;
  std::size_t states_explored = 0;
  std::size_t product_transitions = 0;
  long double state_bound = 0;
  // Finite explorer only: eager run over (process, action) pairs.
  std::vector<std::pair<int, Action>> trace;
};

inline EagerReachResult eager_state_reach(const Rqcp& system, const std::vector<int>& target) {
  const Product prod = build_product(system, target);
  EagerReachResult r;
  r.states_explored = prod.keys.size();
  r.product_transitions = prod.transitions;
  r.state_bound = prod.state_bound;
  if (prod.accept >= 0) r.reachable = control_reachable(prod.pushdown, prod.pushdown.init).contains(prod.accept);
  return r;
}

struct FiniteEagerExploration {
  std::set<std::vector<int>> vectors;
  std::size_t states_explored = 0;
  std::optional<std::vector<std::pair<int, Action>>> trace_to_target;
};

inline FiniteEagerExploration finite_eager_explore(const Rqcp& system,
                                                   const std::optional<std::vector<int>>& target) {
  if (!system.is_finite()) throw InputError("finite eager reachability requires empty stack alphabets");
  const auto& topo = system.topology;
  if (topo.num_channels() > 63) throw InputError("finite eager reachability supports at most 63 channels");
  using Key = std::pair<std::vector<int>, std::uint64_t>;
  struct Node {
    Key key;
    int parent;
    std::vector<std::pair<int, Action>> via;
  };
  std::vector<Node> nodes;
  std::map<Key, int> index;
  auto visit = [&](Key key, int parent, std::vector<std::pair<int, Action>> via) {
    if (index.contains(key)) return;
    index.emplace(key, static_cast<int>(nodes.size()));
    nodes.push_back({std::move(key), parent, std::move(via)});
  };
  visit({system.initial_control(), 0}, -1, {});
  FiniteEagerExploration out;
  const int np = topo.num_processes();
  for (std::size_t id = 0; id < nodes.size(); ++id) {
    const auto z = nodes[id].key.first;
    const std::uint64_t g = nodes[id].key.second;
    out.vectors.insert(z);
    if (target && z == *target && !out.trace_to_target) {
      std::vector<std::pair<int, Action>> trace;
      for (int cur = static_cast<int>(id); cur > 0; cur = nodes[cur].parent) {
        trace.insert(trace.begin(), nodes[cur].via.begin(), nodes[cur].via.end());
      }
      out.trace_to_target = std::move(trace);
    }
    for (int p = 0; p < np; ++p) {
      for (const auto& t : system.processes[p].transitions) {
        if (t.from != z[p]) continue;
        const auto& a = t.action;
        if (a.kind == ActionKind::Recv) continue;
        auto z2 = z;
        z2[p] = t.to;
        if (a.kind != ActionKind::Send) {
          visit({z2, g}, static_cast<int>(id), {{p, a}});
          continue;
        }
        const int c = a.channel;
        visit({z2, g | (1ULL << c)}, static_cast<int>(id), {{p, a}});
        if ((g >> c) & 1) continue;
        const int r = topo.channels[c].dst;
        for (const auto& u : system.processes[r].transitions) {
          if (u.from != z[r] || u.action != Action::recv(c, a.message)) continue;
          auto z3 = z2;
          z3[r] = u.to;
          visit({z3, g}, static_cast<int>(id), {{p, a}, {r, u.action}});
        }
      }
    }
  }
  out.states_explored = nodes.size();
  return out;
}

inline EagerReachResult finite_eager_reach(const Rqcp& system, const std::vector<int>& target) {
  check_target(system, target);
  auto e = finite_eager_explore(system, target);
  EagerReachResult r;
  r.reachable = e.trace_to_target.has_value();
  r.states_explored = e.states_explored;
  if (e.trace_to_target) r.trace = std::move(*e.trace_to_target);
  return r;
}

inline std::set<std::vector<int>> finite_eager_reachable_vectors(const Rqcp& system) {
  return finite_eager_explore(system, std::nullopt).vectors;
}

}  // namespace rqcp
