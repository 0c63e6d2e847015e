#pragma once

// Phases (single-process run segments with a target state and a
// communication discipline) and sequences of phases.

#include <string>
#include <vector>

#include "model.hpp"

namespace rqcp {

enum class PhaseTag : std::uint8_t { Mux, Demux, Local };

struct PhaseKind {
  PhaseTag tag = PhaseTag::Local;
  int channel = -1;

  static PhaseKind mux(int c) { return {PhaseTag::Mux, c}; }
  static PhaseKind demux(int c) { return {PhaseTag::Demux, c}; }
  static PhaseKind local() { return {PhaseTag::Local, -1}; }

  auto operator<=>(const PhaseKind&) const = default;
};

inline std::string format_kind(const TypedTopology& topo, const PhaseKind& k) {
  switch (k.tag) {
    case PhaseTag::Mux:
      return "mux(" + topo.channels[k.channel].name + ")";
    case PhaseTag::Demux:
      return "demux(" + topo.channels[k.channel].name + ")";
    case PhaseTag::Local:
      return "local";
  }
  return "?";
}

// Whether `kind` is a legal phase kind for process p.
inline bool kind_valid(const TypedTopology& topo, int p, const PhaseKind& kind) {
  switch (kind.tag) {
    case PhaseTag::Local:
      return true;
    case PhaseTag::Mux:
      return kind.channel >= 0 && kind.channel < topo.num_channels() &&
             topo.channels[kind.channel].src == p && topo.is_restricted(p, kind.channel);
    case PhaseTag::Demux:
      return kind.channel >= 0 && kind.channel < topo.num_channels() &&
             topo.channels[kind.channel].dst == p && topo.is_restricted(p, kind.channel);
  }
  return false;
}

// Mux and demux kinds available to p, in channel order (mux first).
inline std::vector<PhaseKind> communication_kinds(const TypedTopology& topo, int p) {
  std::vector<PhaseKind> out;
  for (int c = 0; c < topo.num_channels(); ++c) {
    if (kind_valid(topo, p, PhaseKind::mux(c))) out.push_back(PhaseKind::mux(c));
  }
  for (int c = 0; c < topo.num_channels(); ++c) {
    if (kind_valid(topo, p, PhaseKind::demux(c))) out.push_back(PhaseKind::demux(c));
  }
  return out;
}

// Whether action a of process p may occur in a phase of the given kind.
inline bool kind_allows(const TypedTopology& topo, int p, const PhaseKind& kind, const Action& a) {
  if (!a.is_communication()) return true;
  const auto& ch = topo.channels[a.channel];
  switch (kind.tag) {
    case PhaseTag::Local:
      return false;
    case PhaseTag::Mux:
      if (a.kind == ActionKind::Send) return a.channel == kind.channel;
      return ch.dst == p && topo.is_restricted(ch.src, a.channel);
    case PhaseTag::Demux:
      if (a.kind == ActionKind::Recv) return a.channel == kind.channel;
      return ch.src == p && topo.is_restricted(ch.dst, a.channel);
  }
  return false;
}

struct Phase {
  int process = 0;
  PushdownProcess pushdown;
  int final = 0;
  PhaseKind kind;

  int size() const { return pushdown.num_states(); }
  bool is_local() const { return !pushdown.has_communication(); }

  auto operator<=>(const Phase&) const = default;
};

struct MdSequence {
  TypedTopology topology;
  int num_messages = 0;
  std::vector<Phase> phases;

  std::size_t size() const {
    std::size_t s = 0;
    for (const auto& ph : phases) s += static_cast<std::size_t>(ph.size());
    return s;
  }
  bool all_local() const {
    for (const auto& ph : phases) {
      if (!ph.is_local()) return false;
    }
    return true;
  }

  auto operator<=>(const MdSequence&) const = default;
};

inline std::vector<std::string> validate_phase(const TypedTopology& topo, int num_messages,
                                               const Phase& ph) {
  std::vector<std::string> out;
  const std::string where = "phase of process " + std::to_string(ph.process);
  if (ph.process < 0 || ph.process >= topo.num_processes()) {
    out.push_back(where + ": process out of range");
    return out;
  }
  if (ph.pushdown.num_states() == 0) out.push_back(where + ": no states");
  if (ph.final < 0 || ph.final >= ph.pushdown.num_states()) out.push_back(where + ": final state out of range");
  if (ph.pushdown.init < 0 || ph.pushdown.init >= ph.pushdown.num_states()) {
    out.push_back(where + ": initial state out of range");
  }
  if (!kind_valid(topo, ph.process, ph.kind)) out.push_back(where + ": invalid kind");
  for (const auto& t : ph.pushdown.transitions) {
    const auto& a = t.action;
    if (t.from < 0 || t.to < 0 || t.from >= ph.pushdown.num_states() || t.to >= ph.pushdown.num_states()) {
      out.push_back(where + ": transition state out of range");
      continue;
    }
    if (a.is_communication()) {
      if (a.channel < 0 || a.channel >= topo.num_channels() || a.message < 0 || a.message >= num_messages) {
        out.push_back(where + ": communication action out of range");
        continue;
      }
      const auto& ch = topo.channels[a.channel];
      if ((a.kind == ActionKind::Send && ch.src != ph.process) ||
          (a.kind == ActionKind::Recv && ch.dst != ph.process)) {
        out.push_back(where + ": communication on a non-incident channel end");
        continue;
      }
      if (!kind_allows(topo, ph.process, ph.kind, a)) out.push_back(where + ": action not allowed by kind");
      if (topo.is_restricted(ph.process, a.channel) && !ph.pushdown.guarded(a)) {
        out.push_back(where + ": restricted communication not ε-guarded");
      }
    } else if (a.is_stack() && (a.symbol < 0 || a.symbol >= ph.pushdown.num_symbols())) {
      out.push_back(where + ": stack symbol out of range");
    }
  }
  return out;
}

inline std::vector<std::string> validate_md_sequence(const MdSequence& seq) {
  std::vector<std::string> out;
  for (const auto& ph : seq.phases) {
    auto v = validate_phase(seq.topology, seq.num_messages, ph);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace rqcp
