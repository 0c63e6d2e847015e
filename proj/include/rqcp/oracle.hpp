#pragma once

// Explicit-state reference implementations: bounded exploration of the
// global transition system, eager and phase-bounded enumerations, run
// predicates, and the constructive reordering of mutex runs.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "model.hpp"
#include "mutex.hpp"
#include "phase.hpp"

namespace rqcp {

struct Bounds {
  std::size_t channel_len = 4;
  std::size_t stack_depth = 4;
  std::size_t steps = 14;
};

inline bool within_bounds(const Configuration& x, const Bounds& b) {
  for (const auto& s : x.stacks) {
    if (s.size() > b.stack_depth) return false;
  }
  for (const auto& w : x.channels) {
    if (w.size() > b.channel_len) return false;
  }
  return true;
}

namespace detail {

// Breadth-first search over an abstract state carrying a configuration.
// `expand(state, emit)` calls emit(next_state, process, action) for every
// successor; `config_of` projects a state to its configuration.
template <class State, class Hash>
struct Search {
  std::vector<State> states;
  std::vector<int> parent;
  std::vector<std::size_t> depth;
  std::vector<int> via_process;
  std::vector<Action> via_action;
  bool truncated = false;
  std::unordered_map<State, int, Hash> index;

  template <class Expand, class ConfigOf>
  void run(State init, const Bounds& bounds, Expand expand, ConfigOf config_of) {
    add(std::move(init), -1, 0, -1, Action{});
    for (std::size_t i = 0; i < states.size(); ++i) {
      const std::size_t d = depth[i];
      const State cur = states[i];
      expand(cur, [&](State next, int process, const Action& a) {
        if (!within_bounds(config_of(next), bounds)) {
          truncated = true;
          return;
        }
        if (index.contains(next)) return;
        if (d >= bounds.steps) {
          truncated = true;
          return;
        }
        add(std::move(next), static_cast<int>(i), d + 1, process, a);
      });
    }
  }

  template <class ConfigOf>
  Run run_to(std::size_t i, ConfigOf config_of) const {
    std::vector<std::size_t> chain;
    for (int cur = static_cast<int>(i); cur > 0; cur = parent[cur]) chain.push_back(static_cast<std::size_t>(cur));
    Run r;
    r.initial = config_of(states[0]);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
      r.steps.push_back({via_process[*it], via_action[*it], config_of(states[*it])});
    }
    return r;
  }

 private:
  void add(State s, int par, std::size_t d, int p, const Action& a) {
    index.emplace(s, static_cast<int>(states.size()));
    states.push_back(std::move(s));
    parent.push_back(par);
    depth.push_back(d);
    via_process.push_back(p);
    via_action.push_back(a);
  }
};

template <class Tag>
struct TaggedConfig {
  Configuration config;
  Tag tag{};
  bool operator==(const TaggedConfig&) const = default;
};

template <class Tag>
struct TaggedConfigHash {
  std::size_t operator()(const TaggedConfig<Tag>& s) const noexcept {
    std::size_t h = ConfigurationHash{}(s.config);
    for (auto v : s.tag) h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

}  // namespace detail

struct Exploration {
  detail::Search<Configuration, ConfigurationHash> search;

  const std::vector<Configuration>& configs() const { return search.states; }
  bool truncated() const { return search.truncated; }
  Run run_to(std::size_t i) const {
    return search.run_to(i, [](const Configuration& x) -> const Configuration& { return x; });
  }
  std::set<std::vector<int>> control_vectors() const {
    std::set<std::vector<int>> out;
    for (const auto& x : search.states) out.insert(x.control);
    return out;
  }
};

inline Exploration explore_bounded(const Rqcp& system, const Bounds& bounds,
                                   std::optional<Configuration> start = std::nullopt) {
  Exploration e;
  Configuration init = start ? *start : initial_configuration(system);
  check_configuration(system, init);
  e.search.run(
      std::move(init), bounds,
      [&](const Configuration& x, auto emit) {
        for (auto& m : enabled_moves(system, x)) emit(std::move(m.target), m.process, m.action);
      },
      [](const Configuration& x) -> const Configuration& { return x; });
  return e;
}

struct ControlReachResult {
  std::set<std::vector<int>> vectors;
  bool truncated = false;
  std::size_t states_explored = 0;
  std::optional<Run> witness;  // for the requested target, when reached

  bool contains(const std::vector<int>& v) const { return vectors.contains(v); }
  // Conclusive answer for a target, or nullopt when bounds cut the search.
  std::optional<bool> verdict(const std::vector<int>& target) const {
    if (contains(target)) return true;
    if (truncated) return std::nullopt;
    return false;
  }
};

// Control vectors reachable by eager runs from the initial configuration:
// every receive directly follows its matching send.
inline ControlReachResult eager_reach_bruteforce(const Rqcp& system, const Bounds& bounds,
                                                 std::optional<std::vector<int>> target = std::nullopt) {
  using State = detail::TaggedConfig<std::vector<int>>;  // tag = {pending channel}
  detail::Search<State, detail::TaggedConfigHash<std::vector<int>>> s;
  s.run(
      State{initial_configuration(system), {-1}}, bounds,
      [&](const State& st, auto emit) {
        const int pending = st.tag[0];
        for (auto& m : enabled_moves(system, st.config)) {
          const auto& a = m.action;
          int next_pending = -1;
          if (a.kind == ActionKind::Recv) {
            if (a.channel != pending) continue;
          } else if (a.kind == ActionKind::Send && st.config.channels[a.channel].empty()) {
            next_pending = a.channel;
          }
          emit(State{std::move(m.target), {next_pending}}, m.process, a);
        }
      },
      [](const State& st) -> const Configuration& { return st.config; });
  ControlReachResult r;
  r.truncated = s.truncated;
  r.states_explored = s.states.size();
  for (std::size_t i = 0; i < s.states.size(); ++i) {
    r.vectors.insert(s.states[i].config.control);
    if (target && !r.witness && s.states[i].config.control == *target) {
      r.witness = s.run_to(i, [](const State& st) -> const Configuration& { return st.config; });
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Run predicates

inline bool is_eager_run(const Run& run) {
  std::set<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& pr : matching_pairs(run)) pairs.insert(pr);
  for (std::size_t i = 0; i < run.steps.size(); ++i) {
    if (run.steps[i].action.kind != ActionKind::Recv) continue;
    if (i == 0 || !pairs.contains({i - 1, i})) return false;
  }
  return true;
}

namespace detail {

// Matching push/pop index pairs of one process, or nullopt if its stack
// projection is not a Dyck word.
inline std::optional<std::vector<std::pair<std::size_t, std::size_t>>> stack_pairs(
    const Run& run, int p, std::size_t from, std::size_t to) {
  std::vector<std::pair<std::size_t, int>> open;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = from; i < to; ++i) {
    const auto& s = run.steps[i];
    if (s.process != p) continue;
    if (s.action.kind == ActionKind::Push) {
      open.emplace_back(i, s.action.symbol);
    } else if (s.action.kind == ActionKind::Pop) {
      if (open.empty() || open.back().second != s.action.symbol) return std::nullopt;
      pairs.emplace_back(open.back().first, i);
      open.pop_back();
    }
  }
  if (!open.empty()) return std::nullopt;
  return pairs;
}

}  // namespace detail

inline bool is_well_formed(const Run& run, int p) {
  return detail::stack_pairs(run, p, 0, run.steps.size()).has_value();
}

inline bool is_well_bracketed(const Run& run, int num_processes) {
  // Global nesting over (process, symbol).
  std::vector<std::pair<int, int>> stack;
  for (const auto& s : run.steps) {
    if (s.action.kind == ActionKind::Push) {
      stack.emplace_back(s.process, s.action.symbol);
    } else if (s.action.kind == ActionKind::Pop) {
      if (stack.empty() || stack.back() != std::make_pair(s.process, s.action.symbol)) return false;
      stack.pop_back();
    }
  }
  if (!stack.empty()) return false;
  // Between nested frames of p, every other process is well-formed.
  for (int p = 0; p < num_processes; ++p) {
    const auto pairs = detail::stack_pairs(run, p, 0, run.steps.size());
    if (!pairs) return false;
    for (const auto& [h, k] : *pairs) {
      for (const auto& [i, j] : *pairs) {
        if (!(h < i && j < k)) continue;
        for (int q = 0; q < num_processes; ++q) {
          if (q == p) continue;
          if (!detail::stack_pairs(run, q, h, i + 1) || !detail::stack_pairs(run, q, j, k + 1)) return false;
        }
      }
    }
  }
  return true;
}

inline bool is_mutex_run(const TypedTopology& topo, const Run& run, bool weak = false) {
  const auto rel = mutex_relation(topo, weak);
  auto ok = [&](const Configuration& x) {
    std::vector<char> ne(x.channels.size());
    for (std::size_t c = 0; c < x.channels.size(); ++c) ne[c] = !x.channels[c].empty();
    return is_mutex_nonempty_set(rel, ne);
  };
  if (!ok(run.initial)) return false;
  return std::all_of(run.steps.begin(), run.steps.end(), [&](const Step& s) { return ok(s.config); });
}

// Replays the steps of `run` in the order `order` (a permutation of step
// indices), keeping each step's target control state.
inline std::optional<Run> replay(const Rqcp& system, const Run& run, const std::vector<std::size_t>& order) {
  Run out;
  out.initial = run.initial;
  Configuration cur = run.initial;
  for (std::size_t i : order) {
    const auto& s = run.steps[i];
    auto next = apply_action(system, cur, s.process, s.action, s.config.control[s.process]);
    if (!next) return std::nullopt;
    cur = *next;
    out.steps.push_back({s.process, s.action, cur});
  }
  return out;
}

// An order-equivalent eager run, built by repeatedly scheduling last either
// a trailing local/stack action or unmatched send, or the matched pair that
// closes a cycle of last peers.
inline Run reorder_mutex_to_eager(const Rqcp& system, const Run& run, bool weak = false) {
  if (!is_valid_run(system, run)) throw InputError("reorder: input is not a valid run");
  if (!run.initial.channels_empty()) throw InputError("reorder: input must start with empty channels");
  if (!is_mutex_run(system.topology, run, weak)) throw InputError("reorder: input run is not mutex");

  const auto& topo = system.topology;
  const int np = topo.num_processes();
  std::vector<long> partner(run.steps.size(), -1);
  for (const auto& [snd, rcv] : matching_pairs(run)) {
    partner[snd] = static_cast<long>(rcv);
    partner[rcv] = static_cast<long>(snd);
  }

  std::vector<std::size_t> prefix(run.steps.size());
  for (std::size_t i = 0; i < prefix.size(); ++i) prefix[i] = i;
  std::vector<std::size_t> suffix;  // built back to front
  std::vector<char> in_prefix(run.steps.size(), 1);

  while (!prefix.empty()) {
    std::vector<long> last(np, -1);  // position in `prefix`
    for (std::size_t pos = 0; pos < prefix.size(); ++pos) last[run.steps[prefix[pos]].process] = static_cast<long>(pos);

    auto matched = [&](std::size_t i) { return partner[i] >= 0 && in_prefix[static_cast<std::size_t>(partner[i])]; };
    std::optional<std::size_t> single;
    for (int p = 0; p < np && !single; ++p) {
      if (last[p] < 0) continue;
      const std::size_t i = prefix[static_cast<std::size_t>(last[p])];
      const auto& a = run.steps[i].action;
      if (!a.is_communication() || (a.kind == ActionKind::Send && !matched(i))) single = static_cast<std::size_t>(last[p]);
    }
    if (single) {
      const std::size_t i = prefix[*single];
      suffix.push_back(i);
      in_prefix[i] = 0;
      prefix.erase(prefix.begin() + static_cast<long>(*single));
      continue;
    }

    // Walk last peers from the smallest moving process until a repeat.
    auto peer = [&](int p) {
      const auto& a = run.steps[prefix[static_cast<std::size_t>(last[p])]].action;
      return topo.other_end(a.channel, p);
    };
    int start = 0;
    while (last[start] < 0) ++start;
    std::vector<int> walk;
    std::vector<int> seen_at(np, -1);
    int cur = start;
    while (seen_at[cur] < 0) {
      seen_at[cur] = static_cast<int>(walk.size());
      walk.push_back(cur);
      cur = peer(cur);
    }
    std::vector<int> cycle(walk.begin() + seen_at[cur], walk.end());
    int p0 = cycle.front();
    for (int p : cycle) {
      if (last[p] > last[p0]) p0 = p;
    }
    const int p1 = peer(p0);
    const std::size_t e0 = prefix[static_cast<std::size_t>(last[p0])];
    const std::size_t e1 = prefix[static_cast<std::size_t>(last[p1])];
    if (run.steps[e0].action.kind != ActionKind::Recv || partner[e0] != static_cast<long>(e1)) {
      throw InputError("reorder: last-peer pair is not a matching send/receive; run is not mutex");
    }
    suffix.push_back(e0);
    suffix.push_back(e1);
    in_prefix[e0] = in_prefix[e1] = 0;
    prefix.erase(std::remove_if(prefix.begin(), prefix.end(), [&](std::size_t i) { return i == e0 || i == e1; }),
                 prefix.end());
  }
  std::reverse(suffix.begin(), suffix.end());
  auto out = replay(system, run, suffix);
  if (!out) throw InputError("reorder: reordered run is not executable");
  return *out;
}

// ---------------------------------------------------------------------------
// Phase-bounded enumeration

struct KPhaseResult {
  bool reached = false;
  bool truncated = false;
  std::size_t states_explored = 0;
  std::optional<Run> witness;

  std::optional<bool> verdict() const {
    if (reached) return true;
    if (truncated) return std::nullopt;
    return false;
  }
};

// Runs that split into at most k single-process segments, each compatible
// with some mux, demux or communication-free kind of its process.
inline KPhaseResult kphase_reach_bruteforce(const Rqcp& system, const std::vector<int>& target, int k,
                                            const Bounds& bounds) {
  const auto& topo = system.topology;
  const int np = topo.num_processes();
  std::vector<std::vector<PhaseKind>> kinds(np);
  for (int p = 0; p < np; ++p) {
    kinds[p] = communication_kinds(topo, p);
    kinds[p].push_back(PhaseKind::local());
    if (kinds[p].size() > 32) throw InputError("too many phase kinds for one process");
  }
  auto allowed = [&](int p, const Action& a) {
    std::uint32_t m = 0;
    for (std::size_t i = 0; i < kinds[p].size(); ++i) {
      if (kind_allows(topo, p, kinds[p][i], a)) m |= 1u << i;
    }
    return m;
  };

  // tag = {segments used, segment process, compatible kinds mask}
  using State = detail::TaggedConfig<std::vector<long long>>;
  detail::Search<State, detail::TaggedConfigHash<std::vector<long long>>> s;
  KPhaseResult r;
  s.run(
      State{initial_configuration(system), {0, -1, 0}}, bounds,
      [&](const State& st, auto emit) {
        if (st.config.control == target) return;  // no need to go further
        const long long used = st.tag[0], sp = st.tag[1];
        const auto mask = static_cast<std::uint32_t>(st.tag[2]);
        for (auto& m : enabled_moves(system, st.config)) {
          const std::uint32_t al = allowed(m.process, m.action);
          if (used > 0 && sp == m.process && (mask & al)) {
            emit(State{m.target, {used, sp, static_cast<long long>(mask & al)}}, m.process, m.action);
          }
          if (used < k && al) {
            emit(State{std::move(m.target), {used + 1, m.process, static_cast<long long>(al)}}, m.process,
                 m.action);
          }
        }
      },
      [](const State& st) -> const Configuration& { return st.config; });
  r.states_explored = s.states.size();
  r.truncated = s.truncated;
  for (std::size_t i = 0; i < s.states.size(); ++i) {
    if (s.states[i].config.control == target) {
      r.reached = true;
      r.witness = s.run_to(i, [](const State& st) -> const Configuration& { return st.config; });
      break;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Phase relations

using StackChannelPair = std::pair<std::vector<std::vector<int>>, std::vector<std::vector<int>>>;

struct PhaseRelationResult {
  std::set<StackChannelPair> ends;
  bool truncated = false;
};

// The system in which only the phase process moves, with the phase's
// pushdown; every other process is a one-state pushdown without moves.
inline Rqcp phase_system(const TypedTopology& topo, int num_messages, const Phase& phase,
                         const std::vector<int>& stack_alphabet_sizes) {
  Rqcp sys;
  sys.topology = topo;
  for (int m = 0; m < num_messages; ++m) sys.messages.push_back("m" + std::to_string(m));
  for (int p = 0; p < topo.num_processes(); ++p) {
    if (p == phase.process) {
      sys.processes.push_back(phase.pushdown);
      continue;
    }
    PushdownProcess trivial;
    trivial.states = {"idle"};
    for (int g = 0; g < stack_alphabet_sizes[p]; ++g) trivial.stack_alphabet.push_back("g" + std::to_string(g));
    sys.processes.push_back(std::move(trivial));
  }
  return sys;
}

inline std::vector<int> stack_alphabet_sizes(const MdSequence& seq) {
  std::vector<int> sizes(seq.topology.num_processes(), 0);
  for (const auto& ph : seq.phases) sizes[ph.process] = std::max(sizes[ph.process], ph.pushdown.num_symbols());
  return sizes;
}

inline PhaseRelationResult phase_relation_oracle(const TypedTopology& topo, int num_messages, const Phase& phase,
                                                 const StackChannelPair& start, const Bounds& bounds,
                                                 std::vector<int> alphabet_sizes = {}) {
  if (alphabet_sizes.empty()) {
    alphabet_sizes.assign(topo.num_processes(), 0);
    for (int p = 0; p < topo.num_processes(); ++p) {
      for (int g : start.first[p]) alphabet_sizes[p] = std::max(alphabet_sizes[p], g + 1);
    }
  }
  // Earlier phases of the same process may leave symbols outside this phase's alphabet.
  Phase padded = phase;
  for (int g = padded.pushdown.num_symbols(); g < alphabet_sizes[phase.process]; ++g) {
    padded.pushdown.stack_alphabet.push_back("g" + std::to_string(g));
  }
  alphabet_sizes[phase.process] = padded.pushdown.num_symbols();
  const Rqcp sys = phase_system(topo, num_messages, padded, alphabet_sizes);
  Configuration x;
  x.control.assign(topo.num_processes(), 0);
  x.control[phase.process] = phase.pushdown.init;
  x.stacks = start.first;
  x.channels = start.second;
  const auto e = explore_bounded(sys, bounds, x);
  PhaseRelationResult r;
  r.truncated = e.truncated();
  for (const auto& y : e.configs()) {
    if (y.control[phase.process] == phase.final) r.ends.emplace(y.stacks, y.channels);
  }
  return r;
}

struct SatisfiabilityOracleResult {
  bool satisfiable = false;
  bool truncated = false;

  std::optional<bool> verdict() const {
    if (satisfiable) return true;
    if (truncated) return std::nullopt;
    return false;
  }
};

// Composes the phase relations from all-empty stacks and channels.
inline SatisfiabilityOracleResult md_satisfiable_bruteforce(const MdSequence& seq, const Bounds& bounds) {
  const auto sizes = stack_alphabet_sizes(seq);
  const StackChannelPair empty{std::vector<std::vector<int>>(seq.topology.num_processes()),
                               std::vector<std::vector<int>>(seq.topology.num_channels())};
  std::set<StackChannelPair> frontier{empty};
  SatisfiabilityOracleResult r;
  for (const auto& ph : seq.phases) {
    std::set<StackChannelPair> next;
    for (const auto& start : frontier) {
      auto rel = phase_relation_oracle(seq.topology, seq.num_messages, ph, start, bounds, sizes);
      r.truncated = r.truncated || rel.truncated;
      next.insert(rel.ends.begin(), rel.ends.end());
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  r.satisfiable = frontier.contains(empty);
  return r;
}

}  // namespace rqcp
