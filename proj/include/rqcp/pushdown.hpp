#pragma once

// Single-pushdown analyses: post* saturation over P-automata, control state
// reachability and the empty-stack-to-empty-stack relation.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <set>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "model.hpp"

namespace rqcp {

// States 0..num_control-1 stand for the control states of the pushdown.
// A configuration (z, u) is represented iff the automaton reads u top-first
// followed by the bottom marker from z into an accepting state. The bottom
// marker is symbol id `bottom` (== number of stack symbols); -1 is epsilon.
struct PAutomaton {
  static constexpr int kEpsilon = -1;

  int num_control = 0;
  int num_states = 0;
  int bottom = 0;
  std::set<std::tuple<int, int, int>> transitions;
  std::vector<char> accepting;

  int add_state(bool accept = false) {
    accepting.push_back(accept ? 1 : 0);
    return num_states++;
  }

  // Stack convention as in Configuration: top is the last element.
  bool accepts(int z, const std::vector<int>& stack) const {
    std::vector<int> word(stack.rbegin(), stack.rend());
    word.push_back(bottom);
    std::set<int> cur = eps_closure({z});
    for (int sym : word) {
      std::set<int> next;
      for (int q : cur) {
        auto it = transitions.lower_bound({q, sym, -1});
        for (; it != transitions.end() && std::get<0>(*it) == q && std::get<1>(*it) == sym; ++it) {
          next.insert(std::get<2>(*it));
        }
      }
      cur = eps_closure(next);
      if (cur.empty()) return false;
    }
    return std::any_of(cur.begin(), cur.end(), [&](int q) { return accepting[q] != 0; });
  }

  // Control states with at least one represented stack content.
  std::set<int> nonempty_controls() const {
    // States that reach acceptance reading (Gamma|eps)* bottom.
    std::vector<char> good(num_states, 0);
    std::deque<int> work;
    std::vector<std::vector<int>> rev(num_states);
    for (const auto& [a, s, b] : transitions) {
      if (s == bottom) {
        if (accepting[b] && !good[a]) {
          good[a] = 1;
          work.push_back(a);
        }
      } else {
        rev[b].push_back(a);
      }
    }
    while (!work.empty()) {
      const int q = work.front();
      work.pop_front();
      for (int a : rev[q]) {
        if (!good[a]) {
          good[a] = 1;
          work.push_back(a);
        }
      }
    }
    std::set<int> out;
    for (int z = 0; z < num_control; ++z) {
      if (good[z]) out.insert(z);
    }
    return out;
  }

  // Control states z with (z, empty stack) represented.
  std::set<int> empty_stack_controls() const {
    std::set<int> out;
    for (int z = 0; z < num_control; ++z) {
      if (accepts(z, {})) out.insert(z);
    }
    return out;
  }

 private:
  std::set<int> eps_closure(std::set<int> s) const {
    std::vector<int> work(s.begin(), s.end());
    while (!work.empty()) {
      const int q = work.back();
      work.pop_back();
      auto it = transitions.lower_bound({q, kEpsilon, -1});
      for (; it != transitions.end() && std::get<0>(*it) == q && std::get<1>(*it) == kEpsilon; ++it) {
        if (s.insert(std::get<2>(*it)).second) work.push_back(std::get<2>(*it));
      }
    }
    return s;
  }
};

// Automaton representing the single configuration (z, empty stack).
inline PAutomaton singleton_automaton(const PushdownProcess& pd, int z) {
  PAutomaton a;
  a.num_control = a.num_states = pd.num_states();
  a.bottom = pd.num_symbols();
  a.accepting.assign(a.num_states, 0);
  const int f = a.add_state(true);
  a.transitions.emplace(z, a.bottom, f);
  return a;
}

namespace detail {

struct PdsRule {
  int to = 0;
  int w1 = PAutomaton::kEpsilon;  // new top, or epsilon for a pop
  int w2 = PAutomaton::kEpsilon;  // symbol below the new top for a push
};

inline void check_stack_only(const PushdownProcess& pd) {
  for (const auto& t : pd.transitions) {
    if (t.action.is_communication()) {
      throw InputError("pushdown analysis: communication action present");
    }
    if (t.from < 0 || t.from >= pd.num_states() || t.to < 0 || t.to >= pd.num_states()) {
      throw InputError("pushdown analysis: transition state out of range");
    }
    if (t.action.is_stack() && (t.action.symbol < 0 || t.action.symbol >= pd.num_symbols())) {
      throw InputError("pushdown analysis: stack symbol out of range");
    }
  }
}

struct TripleHash {
  std::size_t operator()(const std::tuple<int, int, int>& t) const noexcept {
    const auto a = static_cast<std::uint64_t>(static_cast<std::uint32_t>(std::get<0>(t)));
    const auto b = static_cast<std::uint64_t>(static_cast<std::uint32_t>(std::get<1>(t) + 1));
    const auto c = static_cast<std::uint64_t>(static_cast<std::uint32_t>(std::get<2>(t)));
    std::uint64_t h = a * 0x9E3779B97F4A7C15ULL ^ (b << 21) ^ (c * 0xC2B2AE3D27D4EB4FULL);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

}  // namespace detail

// post* of the configurations represented by `initial`. Guarded local
// actions only fire on the bottom marker, i.e. with an empty stack.
inline PAutomaton saturate(const PushdownProcess& pd, const PAutomaton& initial) {
  detail::check_stack_only(pd);
  const int nz = pd.num_states();
  const int nsym = pd.num_symbols();
  const int bottom = nsym;
  if (initial.num_control != nz || initial.bottom != bottom) {
    throw InputError("saturate: automaton does not match the pushdown");
  }
  for (const auto& [a, s, b] : initial.transitions) {
    if (b < nz) throw InputError("saturate: initial automaton has a transition into a control state");
    if (s == PAutomaton::kEpsilon) throw InputError("saturate: initial automaton has an epsilon transition");
  }

  // rules[z * (nsym + 1) + gamma]
  const int width = nsym + 1;
  std::vector<std::vector<detail::PdsRule>> rules(static_cast<std::size_t>(nz) * width);
  PAutomaton out = initial;
  std::unordered_map<long long, int> mid_state;  // (target, pushed symbol) -> aux state
  auto mid = [&](int z, int a) {
    const long long key = static_cast<long long>(z) * width + a;
    auto it = mid_state.find(key);
    if (it != mid_state.end()) return it->second;
    const int q = out.add_state(false);
    mid_state.emplace(key, q);
    return q;
  };

  for (const auto& t : pd.transitions) {
    const auto& a = t.action;
    switch (a.kind) {
      case ActionKind::Local:
        if (pd.guarded(a)) {
          rules[t.from * width + bottom].push_back({t.to, bottom, PAutomaton::kEpsilon});
        } else {
          for (int g = 0; g <= nsym; ++g) rules[t.from * width + g].push_back({t.to, g, PAutomaton::kEpsilon});
        }
        break;
      case ActionKind::Push:
        for (int g = 0; g <= nsym; ++g) rules[t.from * width + g].push_back({t.to, a.symbol, g});
        mid(t.to, a.symbol);
        break;
      case ActionKind::Pop:
        rules[t.from * width + a.symbol].push_back({t.to, PAutomaton::kEpsilon, PAutomaton::kEpsilon});
        break;
      default:
        break;
    }
  }

  using Triple = std::tuple<int, int, int>;
  std::unordered_set<Triple, detail::TripleHash> rel;
  // Forward index of rel by source state, and epsilon transitions by target.
  std::vector<std::vector<std::pair<int, int>>> by_source(out.num_states);
  std::vector<std::vector<int>> eps_into(out.num_states);
  std::deque<Triple> work;

  auto grow = [&]() {
    if (static_cast<int>(by_source.size()) < out.num_states) {
      by_source.resize(out.num_states);
      eps_into.resize(out.num_states);
    }
  };
  auto add_rel = [&](const Triple& t) {
    if (!rel.insert(t).second) return false;
    grow();
    const auto& [a, s, b] = t;
    by_source[a].emplace_back(s, b);
    if (s == PAutomaton::kEpsilon) eps_into[b].push_back(a);
    return true;
  };

  for (const auto& t : initial.transitions) {
    if (std::get<0>(t) < nz) {
      work.push_back(t);
    } else {
      add_rel(t);
    }
  }

  while (!work.empty()) {
    const Triple t = work.front();
    work.pop_front();
    if (rel.contains(t)) continue;
    add_rel(t);
    const auto [p, g, q] = t;
    if (g != PAutomaton::kEpsilon) {
      if (p >= nz) continue;
      for (const auto& r : rules[p * width + g]) {
        if (r.w1 == PAutomaton::kEpsilon) {
          work.emplace_back(r.to, PAutomaton::kEpsilon, q);
        } else if (r.w2 == PAutomaton::kEpsilon) {
          work.emplace_back(r.to, r.w1, q);
        } else {
          const int qm = mid(r.to, r.w1);
          grow();
          work.emplace_back(r.to, r.w1, qm);
          const Triple inner{qm, r.w2, q};
          if (add_rel(inner)) {
            for (int p2 : std::vector<int>(eps_into[qm])) work.emplace_back(p2, r.w2, q);
          }
        }
      }
    } else {
      const auto succ = by_source[q];
      for (const auto& [s2, q2] : succ) work.emplace_back(p, s2, q2);
    }
  }

  out.transitions.clear();
  for (const auto& t : rel) out.transitions.insert(t);
  out.accepting.resize(out.num_states, 0);
  return out;
}

// Upper bound on the saturated automaton's transition count.
inline std::size_t saturation_bound(const PushdownProcess& pd, const PAutomaton& initial) {
  const std::size_t aux = static_cast<std::size_t>(pd.num_states()) * pd.num_symbols();
  const std::size_t states = static_cast<std::size_t>(initial.num_states) + aux;
  return states * states * (static_cast<std::size_t>(pd.num_symbols()) + 2);
}

inline PAutomaton post_star(const PushdownProcess& pd, int from) {
  return saturate(pd, singleton_automaton(pd, from));
}

inline std::set<int> control_reachable(const PushdownProcess& pd, int from) {
  return post_star(pd, from).nonempty_controls();
}

// R[z][z'] iff (z', empty) is reachable from (z, empty).
inline std::vector<std::vector<char>> empty_pairs(const PushdownProcess& pd) {
  detail::check_stack_only(pd);
  const int nz = pd.num_states();
  std::vector<std::vector<char>> r(nz, std::vector<char>(nz, 0));
  for (int z = 0; z < nz; ++z) {
    for (int z2 : post_star(pd, z).empty_stack_controls()) r[z][z2] = 1;
  }
  return r;
}

// Pushdown with communication transitions dropped.
inline PushdownProcess strip_communication(const PushdownProcess& pd) {
  PushdownProcess out = pd;
  out.transitions.clear();
  for (const auto& t : pd.transitions) {
    if (!t.action.is_communication()) out.transitions.push_back(t);
  }
  std::set<Action> eps;
  for (const auto& a : pd.eps_actions) {
    if (!a.is_communication()) eps.insert(a);
  }
  out.eps_actions = std::move(eps);
  return out;
}

}  // namespace rqcp
