#pragma once

// Systems of recursive processes communicating over FIFO channels:
// typed topologies, per-process pushdown systems, configurations, runs and
// the one-step semantics of the global transition system.

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rqcp {

// Raised on malformed input: ill-typed configurations, unknown identifiers,
// systems outside the domain of an algorithm.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Channel {
  std::string name;
  int src = 0;
  int dst = 0;

  auto operator<=>(const Channel&) const = default;
};

struct TypedTopology {
  std::vector<std::string> processes;
  std::vector<Channel> channels;
  // (process, channel) pairs on which the process must have an empty stack.
  std::set<std::pair<int, int>> restricted;

  int num_processes() const { return static_cast<int>(processes.size()); }
  int num_channels() const { return static_cast<int>(channels.size()); }

  bool is_restricted(int process, int channel) const {
    return restricted.contains({process, channel});
  }

  bool is_endpoint(int process, int channel) const {
    const auto& ch = channels[channel];
    return ch.src == process || ch.dst == process;
  }

  // The endpoint of `channel` that is not `process`.
  int other_end(int channel, int process) const {
    const auto& ch = channels[channel];
    return ch.src == process ? ch.dst : ch.src;
  }

  auto operator<=>(const TypedTopology&) const = default;
};

enum class ActionKind : std::uint8_t { Send, Recv, Push, Pop, Local };

struct Action {
  ActionKind kind = ActionKind::Local;
  int channel = -1;
  int message = -1;
  int symbol = -1;
  std::string label;

  static Action send(int channel, int message) {
    return {ActionKind::Send, channel, message, -1, {}};
  }
  static Action recv(int channel, int message) {
    return {ActionKind::Recv, channel, message, -1, {}};
  }
  static Action push(int symbol) { return {ActionKind::Push, -1, -1, symbol, {}}; }
  static Action pop(int symbol) { return {ActionKind::Pop, -1, -1, symbol, {}}; }
  static Action local(std::string label) {
    return {ActionKind::Local, -1, -1, -1, std::move(label)};
  }

  bool is_communication() const {
    return kind == ActionKind::Send || kind == ActionKind::Recv;
  }
  bool is_stack() const { return kind == ActionKind::Push || kind == ActionKind::Pop; }

  auto operator<=>(const Action&) const = default;
};

struct Transition {
  int from = 0;
  Action action;
  int to = 0;

  auto operator<=>(const Transition&) const = default;
};

// A pushdown system. Actions in `eps_actions` fire only on an empty stack.
struct PushdownProcess {
  std::vector<std::string> states;
  int init = 0;
  std::vector<std::string> stack_alphabet;
  std::vector<Transition> transitions;
  std::set<Action> eps_actions;

  int num_states() const { return static_cast<int>(states.size()); }
  int num_symbols() const { return static_cast<int>(stack_alphabet.size()); }
  bool guarded(const Action& a) const { return eps_actions.contains(a); }

  bool has_communication() const {
    return std::any_of(transitions.begin(), transitions.end(),
                       [](const Transition& t) { return t.action.is_communication(); });
  }

  auto operator<=>(const PushdownProcess&) const = default;
};

// Actions of distinct processes are disjoint because every action is
// interpreted relative to its owning process (the index in `processes`).
// A finite system is one whose stack alphabets are all empty.
struct Rqcp {
  TypedTopology topology;
  std::vector<std::string> messages;
  std::vector<PushdownProcess> processes;

  int num_messages() const { return static_cast<int>(messages.size()); }

  bool is_finite() const {
    return std::all_of(processes.begin(), processes.end(),
                       [](const PushdownProcess& p) { return p.num_symbols() == 0; });
  }

  std::vector<int> initial_control() const {
    std::vector<int> v;
    v.reserve(processes.size());
    for (const auto& p : processes) v.push_back(p.init);
    return v;
  }

  auto operator<=>(const Rqcp&) const = default;
};

// Stack tops are the rightmost symbol; channel heads are the leftmost message.
struct Configuration {
  std::vector<int> control;
  std::vector<std::vector<int>> stacks;
  std::vector<std::vector<int>> channels;

  auto operator<=>(const Configuration&) const = default;

  bool channels_empty() const {
    return std::all_of(channels.begin(), channels.end(),
                       [](const auto& w) { return w.empty(); });
  }
};

struct ConfigurationHash {
  std::size_t operator()(const Configuration& x) const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    for (int z : x.control) mix(static_cast<std::size_t>(z));
    for (const auto& s : x.stacks) {
      mix(s.size() + 1000003);
      for (int g : s) mix(static_cast<std::size_t>(g));
    }
    for (const auto& w : x.channels) {
      mix(w.size() + 7919);
      for (int m : w) mix(static_cast<std::size_t>(m));
    }
    return h;
  }
};

inline Configuration initial_configuration(const Rqcp& system) {
  Configuration x;
  x.control = system.initial_control();
  x.stacks.assign(system.processes.size(), {});
  x.channels.assign(system.topology.channels.size(), {});
  return x;
}

struct Step {
  int process = 0;
  Action action;
  Configuration config;  // configuration reached by the step

  auto operator<=>(const Step&) const = default;
};

struct Run {
  Configuration initial;
  std::vector<Step> steps;

  const Configuration& final_config() const {
    return steps.empty() ? initial : steps.back().config;
  }
  std::size_t size() const { return steps.size(); }

  // Configuration before step i.
  const Configuration& before(std::size_t i) const {
    return i == 0 ? initial : steps[i - 1].config;
  }
};

// ---------------------------------------------------------------------------
// Pretty printing

inline std::string format_action(const Rqcp& system, int process, const Action& a) {
  const auto& pd = system.processes[process];
  auto name_or = [](const std::vector<std::string>& names, int i) {
    return (i >= 0 && i < static_cast<int>(names.size())) ? names[i] : std::to_string(i);
  };
  std::vector<std::string> channel_names;
  for (const auto& c : system.topology.channels) channel_names.push_back(c.name);
  switch (a.kind) {
    case ActionKind::Send:
      return name_or(channel_names, a.channel) + "!" + name_or(system.messages, a.message);
    case ActionKind::Recv:
      return name_or(channel_names, a.channel) + "?" + name_or(system.messages, a.message);
    case ActionKind::Push:
      return "push(" + name_or(pd.stack_alphabet, a.symbol) + ")";
    case ActionKind::Pop:
      return "pop(" + name_or(pd.stack_alphabet, a.symbol) + ")";
    case ActionKind::Local:
      return a.label;
  }
  return "?";
}

inline std::string format_control(const Rqcp& system, const std::vector<int>& control) {
  std::string out;
  for (std::size_t p = 0; p < control.size(); ++p) {
    if (p) out += ",";
    const auto& states = system.processes[p].states;
    int z = control[p];
    out += (z >= 0 && z < static_cast<int>(states.size())) ? states[z] : std::to_string(z);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validation

inline std::vector<std::string> validate_topology(const TypedTopology& topo) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& p : topo.processes) {
    if (!seen.insert(p).second) out.push_back("duplicate process \"" + p + "\"");
  }
  seen.clear();
  const int np = topo.num_processes();
  for (const auto& c : topo.channels) {
    if (!seen.insert(c.name).second) out.push_back("duplicate channel \"" + c.name + "\"");
    if (c.src < 0 || c.src >= np || c.dst < 0 || c.dst >= np) {
      out.push_back("channel \"" + c.name + "\": endpoint out of range");
      continue;
    }
    if (c.src == c.dst) out.push_back("channel \"" + c.name + "\": self-loop channel");
  }
  for (const auto& [p, c] : topo.restricted) {
    if (c < 0 || c >= topo.num_channels() || p < 0 || p >= np) {
      out.push_back("restriction (" + std::to_string(p) + "," + std::to_string(c) +
                    ") out of range");
    } else if (!topo.is_endpoint(p, c)) {
      out.push_back("restriction of process \"" + topo.processes[p] + "\" on channel \"" +
                    topo.channels[c].name + "\": not an endpoint");
    }
  }
  return out;
}

inline std::vector<std::string> validate_system(const Rqcp& system) {
  std::vector<std::string> out = validate_topology(system.topology);
  const auto& topo = system.topology;
  if (system.processes.size() != topo.processes.size()) {
    out.push_back("process count mismatch: topology declares " +
                  std::to_string(topo.processes.size()) + ", system defines " +
                  std::to_string(system.processes.size()));
    return out;
  }
  const int nc = topo.num_channels();
  for (int p = 0; p < topo.num_processes(); ++p) {
    const auto& pd = system.processes[p];
    const std::string where = "process \"" + topo.processes[p] + "\"";
    if (pd.states.empty()) {
      out.push_back(where + ": no control states");
      continue;
    }
    if (pd.init < 0 || pd.init >= pd.num_states()) out.push_back(where + ": initial state out of range");

    auto check_action = [&](const Action& a, const std::string& ctx) -> bool {
      switch (a.kind) {
        case ActionKind::Send:
        case ActionKind::Recv: {
          if (a.channel < 0 || a.channel >= nc) {
            out.push_back(where + ": " + ctx + ": unknown channel");
            return false;
          }
          if (a.message < 0 || a.message >= system.num_messages()) {
            out.push_back(where + ": " + ctx + ": unknown message");
            return false;
          }
          const auto& ch = topo.channels[a.channel];
          if (a.kind == ActionKind::Send && ch.src != p) {
            out.push_back(where + ": " + ctx + ": send on channel \"" + ch.name +
                          "\" by a process that is not its source");
            return false;
          }
          if (a.kind == ActionKind::Recv && ch.dst != p) {
            out.push_back(where + ": " + ctx + ": receive on channel \"" + ch.name +
                          "\" by a process that is not its destination");
            return false;
          }
          return true;
        }
        case ActionKind::Push:
        case ActionKind::Pop:
          if (a.symbol < 0 || a.symbol >= pd.num_symbols()) {
            out.push_back(where + ": " + ctx + ": unknown stack symbol");
            return false;
          }
          return true;
        case ActionKind::Local:
          return true;
      }
      return true;
    };

    for (std::size_t i = 0; i < pd.transitions.size(); ++i) {
      const auto& t = pd.transitions[i];
      const std::string ctx = "transition " + std::to_string(i);
      if (t.from < 0 || t.from >= pd.num_states() || t.to < 0 || t.to >= pd.num_states()) {
        out.push_back(where + ": " + ctx + ": state out of range");
      }
      if (!check_action(t.action, ctx)) continue;
      if (t.action.is_communication() && topo.is_restricted(p, t.action.channel) &&
          !pd.guarded(t.action)) {
        out.push_back(where + ": " + ctx + ": restricted " +
                      std::string(t.action.kind == ActionKind::Send ? "send" : "receive") +
                      " not ε-guarded: " + format_action(system, p, t.action));
      }
    }
    for (const auto& a : pd.eps_actions) {
      if (a.is_stack()) {
        out.push_back(where + ": stack action in ε-guarded set: " + format_action(system, p, a));
      } else {
        check_action(a, "ε-guarded action");
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Semantics

inline void check_configuration(const Rqcp& system, const Configuration& x) {
  const auto np = system.processes.size();
  if (x.control.size() != np || x.stacks.size() != np ||
      x.channels.size() != system.topology.channels.size()) {
    throw InputError("configuration shape does not match the system");
  }
  for (std::size_t p = 0; p < np; ++p) {
    const auto& pd = system.processes[p];
    if (x.control[p] < 0 || x.control[p] >= pd.num_states()) {
      throw InputError("configuration: control state out of range for process " +
                       system.topology.processes[p]);
    }
    for (int g : x.stacks[p]) {
      if (g < 0 || g >= pd.num_symbols()) {
        throw InputError("configuration: stack symbol out of range for process " +
                         system.topology.processes[p]);
      }
    }
  }
  for (const auto& w : x.channels) {
    for (int m : w) {
      if (m < 0 || m >= system.num_messages()) throw InputError("configuration: unknown message");
    }
  }
}

// Applies `action` of `process` moving its control to `next_state`, or
// returns nullopt when the action is blocked in `x`.
inline std::optional<Configuration> apply_action(const Rqcp& system, const Configuration& x,
                                                 int process, const Action& action,
                                                 int next_state) {
  const auto& pd = system.processes[process];
  const auto& stack = x.stacks[process];
  if (pd.guarded(action) && !stack.empty()) return std::nullopt;
  Configuration y = x;
  y.control[process] = next_state;
  switch (action.kind) {
    case ActionKind::Local:
      break;
    case ActionKind::Push:
      y.stacks[process].push_back(action.symbol);
      break;
    case ActionKind::Pop:
      if (stack.empty() || stack.back() != action.symbol) return std::nullopt;
      y.stacks[process].pop_back();
      break;
    case ActionKind::Send:
      y.channels[action.channel].push_back(action.message);
      break;
    case ActionKind::Recv: {
      auto& w = y.channels[action.channel];
      if (w.empty() || w.front() != action.message) return std::nullopt;
      w.erase(w.begin());
      break;
    }
  }
  return y;
}

// Fires transition `index` of `process`, or nullopt when it is not enabled.
inline std::optional<Configuration> step(const Rqcp& system, const Configuration& x, int process,
                                         std::size_t index) {
  const auto& t = system.processes[process].transitions.at(index);
  if (x.control[process] != t.from) return std::nullopt;
  return apply_action(system, x, process, t.action, t.to);
}

struct Move {
  int process = 0;
  std::size_t transition = 0;
  Action action;
  Configuration target;
};

inline std::vector<Move> enabled_moves(const Rqcp& system, const Configuration& x) {
  check_configuration(system, x);
  std::vector<Move> moves;
  for (int p = 0; p < static_cast<int>(system.processes.size()); ++p) {
    const auto& pd = system.processes[p];
    for (std::size_t i = 0; i < pd.transitions.size(); ++i) {
      const auto& t = pd.transitions[i];
      if (t.from != x.control[p]) continue;
      if (auto y = apply_action(system, x, p, t.action, t.to)) {
        moves.push_back({p, i, t.action, std::move(*y)});
      }
    }
  }
  return moves;
}

inline bool is_valid_run(const Rqcp& system, const Run& run) {
  try {
    check_configuration(system, run.initial);
  } catch (const InputError&) {
    return false;
  }
  const Configuration* prev = &run.initial;
  for (const auto& s : run.steps) {
    if (s.process < 0 || s.process >= static_cast<int>(system.processes.size())) return false;
    const auto& pd = system.processes[s.process];
    const bool has_transition = std::any_of(
        pd.transitions.begin(), pd.transitions.end(), [&](const Transition& t) {
          return t.from == prev->control[s.process] && t.action == s.action &&
                 t.to == s.config.control[s.process];
        });
    if (!has_transition) return false;
    auto y = apply_action(system, *prev, s.process, s.action, s.config.control[s.process]);
    if (!y || *y != s.config) return false;
    prev = &s.config;
  }
  return true;
}

// Send/receive pairs (0-based step indices) that are matching in the run.
// Receives consuming initial channel content have no partner.
inline std::vector<std::pair<std::size_t, std::size_t>> matching_pairs(const Run& run) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  const std::size_t nc = run.initial.channels.size();
  std::vector<std::vector<std::size_t>> sends(nc);
  std::vector<std::size_t> received(nc, 0);
  for (std::size_t i = 0; i < run.steps.size(); ++i) {
    const auto& a = run.steps[i].action;
    if (a.kind == ActionKind::Send) {
      sends[a.channel].push_back(i);
    } else if (a.kind == ActionKind::Recv) {
      const std::size_t k = received[a.channel]++;
      const std::size_t initial_len = run.initial.channels[a.channel].size();
      if (k >= initial_len && k - initial_len < sends[a.channel].size()) {
        out.emplace_back(sends[a.channel][k - initial_len], i);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Per-process action sequences; two valid runs from the same configuration
// with equal projections end in the same configuration.
inline std::vector<std::vector<Action>> process_projections(const Run& run, int num_processes) {
  std::vector<std::vector<Action>> out(num_processes);
  for (const auto& s : run.steps) out[s.process].push_back(s.action);
  return out;
}

}  // namespace rqcp
