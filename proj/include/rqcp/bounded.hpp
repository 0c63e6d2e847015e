#pragma once

// Bounded-phase reachability: phase reversal, the reduction of md-sequences
// to sequences of communication-free phases, satisfiability, and the
// end-to-end driver enumerating phase skeletons.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "model.hpp"
#include "phase.hpp"
#include "pushdown.hpp"

namespace rqcp {

// No safe pivot phase exists for the reduction (only possible when some
// channel is restricted at both ends).
class UnsupportedReduction : public InputError {
 public:
  using InputError::InputError;
};

// ---------------------------------------------------------------------------
// Reversal

inline Action reverse_action(const Action& a) {
  switch (a.kind) {
    case ActionKind::Send:
      return Action::recv(a.channel, a.message);
    case ActionKind::Recv:
      return Action::send(a.channel, a.message);
    case ActionKind::Push:
      return Action::pop(a.symbol);
    case ActionKind::Pop:
      return Action::push(a.symbol);
    case ActionKind::Local:
      return a;
  }
  return a;
}

inline TypedTopology reverse_topology(const TypedTopology& topo) {
  TypedTopology out = topo;
  for (auto& ch : out.channels) std::swap(ch.src, ch.dst);
  return out;
}

// The phase over the reversed topology whose relation is the inverse one.
inline Phase reverse_phase(const Phase& ph) {
  Phase out = ph;
  out.pushdown.init = ph.final;
  out.final = ph.pushdown.init;
  out.pushdown.transitions.clear();
  for (const auto& t : ph.pushdown.transitions) out.pushdown.transitions.push_back({t.to, reverse_action(t.action), t.from});
  out.pushdown.eps_actions.clear();
  for (const auto& a : ph.pushdown.eps_actions) out.pushdown.eps_actions.insert(reverse_action(a));
  switch (ph.kind.tag) {
    case PhaseTag::Mux:
      out.kind = PhaseKind::demux(ph.kind.channel);
      break;
    case PhaseTag::Demux:
      out.kind = PhaseKind::mux(ph.kind.channel);
      break;
    case PhaseTag::Local:
      break;
  }
  return out;
}

inline MdSequence reverse_sequence(const MdSequence& seq) {
  MdSequence out;
  out.topology = reverse_topology(seq.topology);
  out.num_messages = seq.num_messages;
  for (auto it = seq.phases.rbegin(); it != seq.phases.rend(); ++it) out.phases.push_back(reverse_phase(*it));
  return out;
}

// ---------------------------------------------------------------------------
// Pushdown assembly helpers

namespace detail {

inline constexpr const char* kJump = "#jump";
inline constexpr const char* kMatch = "#match";
inline constexpr const char* kMatchEps = "#match-eps";
inline constexpr const char* kSwitch = "#switch";
inline constexpr const char* kSkipEps = "#skip-eps";
inline constexpr const char* kChain = "#chain";
inline constexpr const char* kDead = "#dead";
inline constexpr const char* kDeadEps = "#dead-eps";
inline constexpr const char* kDrain = "#drain";
inline constexpr const char* kDoneEps = "#done-eps";

// Keeps the states reachable from init in the control graph; nullopt if
// `final` is not among them.
inline std::optional<Phase> trim_phase(const Phase& ph) {
  const auto& pd = ph.pushdown;
  const int n = pd.num_states();
  std::vector<std::vector<int>> succ(n);
  for (const auto& t : pd.transitions) succ[t.from].push_back(t.to);
  std::vector<int> remap(n, -1);
  std::vector<int> order{pd.init};
  remap[pd.init] = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (int v : succ[order[i]]) {
      if (remap[v] < 0) {
        remap[v] = static_cast<int>(order.size());
        order.push_back(v);
      }
    }
  }
  if (remap[ph.final] < 0) return std::nullopt;
  Phase out;
  out.process = ph.process;
  out.kind = ph.kind;
  out.pushdown.stack_alphabet = pd.stack_alphabet;
  out.pushdown.init = 0;
  out.final = remap[ph.final];
  for (int z : order) out.pushdown.states.push_back(pd.states[z]);
  std::set<Action> used;
  for (const auto& t : pd.transitions) {
    if (remap[t.from] < 0) continue;
    out.pushdown.transitions.push_back({remap[t.from], t.action, remap[t.to]});
    used.insert(t.action);
  }
  for (const auto& a : pd.eps_actions) {
    if (used.contains(a)) out.pushdown.eps_actions.insert(a);
  }
  return out;
}

inline Action guarded_local(bool guarded, const char* plain, const char* eps) {
  return Action::local(guarded ? eps : plain);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reduction

struct PivotChoice {
  int index = -1;
  bool reversed = false;
};

// A non-local demux phase j such that no later phase receives on its
// channel or on any channel it sends into.
inline std::optional<int> find_pivot(const MdSequence& seq) {
  const int k = static_cast<int>(seq.phases.size());
  for (int j = k - 1; j >= 0; --j) {
    const auto& ph = seq.phases[j];
    if (ph.kind.tag != PhaseTag::Demux || ph.is_local()) continue;
    std::set<int> watched{ph.kind.channel};
    for (const auto& t : ph.pushdown.transitions) {
      if (t.action.kind == ActionKind::Send) watched.insert(t.action.channel);
    }
    bool safe = true;
    for (int r = j + 1; r < k && safe; ++r) {
      for (const auto& t : seq.phases[r].pushdown.transitions) {
        if (t.action.kind == ActionKind::Recv && watched.contains(t.action.channel)) {
          safe = false;
          break;
        }
      }
    }
    if (safe) return j;
  }
  return std::nullopt;
}

namespace detail {

// Copy of phase r in which the pivot pushdown `piv` runs along as a second
// component; sends into c are matched with pivot receives.
inline Phase product_copy(const Phase& ph, const PushdownProcess& piv, const std::vector<std::vector<char>>& R,
                          int c, int z_from, int z_to, bool keep_original) {
  const auto& pd = ph.pushdown;
  const int nt = pd.num_states();
  const int nz = piv.num_states();
  const int base = keep_original ? nt : 0;
  auto cp = [&](int t, int z) { return base + t * nz + z; };

  Phase out;
  out.process = ph.process;
  out.kind = ph.kind;
  out.pushdown.stack_alphabet = pd.stack_alphabet;
  out.pushdown.eps_actions = pd.eps_actions;
  if (keep_original) out.pushdown.states = pd.states;
  for (int t = 0; t < nt; ++t) {
    for (int z = 0; z < nz; ++z) out.pushdown.states.push_back("(" + pd.states[t] + "," + piv.states[z] + ")");
  }
  auto& tr = out.pushdown.transitions;
  if (keep_original) {
    tr = pd.transitions;
    for (int t = 0; t < nt; ++t) tr.push_back({t, Action::local(kSwitch), cp(t, z_from)});
  }
  std::vector<Transition> receives;
  for (const auto& u : piv.transitions) {
    if (u.action.kind == ActionKind::Recv && u.action.channel == c) receives.push_back(u);
  }
  bool match_eps = false;
  for (const auto& t : pd.transitions) {
    if (t.action.kind == ActionKind::Send && t.action.channel == c) {
      const bool g = pd.guarded(t.action);
      match_eps = match_eps || g;
      for (const auto& u : receives) {
        if (u.action.message != t.action.message) continue;
        tr.push_back({cp(t.from, u.from), guarded_local(g, kMatch, kMatchEps), cp(t.to, u.to)});
      }
      continue;
    }
    for (int z = 0; z < nz; ++z) tr.push_back({cp(t.from, z), t.action, cp(t.to, z)});
  }
  for (int t = 0; t < nt; ++t) {
    for (int z = 0; z < nz; ++z) {
      for (int z2 = 0; z2 < nz; ++z2) {
        if (z != z2 && R[z][z2]) tr.push_back({cp(t, z), Action::local(kJump), cp(t, z2)});
      }
    }
  }
  if (match_eps) out.pushdown.eps_actions.insert(Action::local(kMatchEps));
  out.pushdown.init = keep_original ? pd.init : cp(pd.init, z_from);
  out.final = cp(ph.final, z_to);
  return out;
}

// Pivot phase without communication: a plain copy up to z_s, a guarded
// jump to the tilde copy of z_j, and the tilde copy up to the final state.
inline Phase pivot_local(const Phase& ph, int z_s, int z_j) {
  const PushdownProcess stripped = strip_communication(ph.pushdown);
  const int nz = stripped.num_states();
  Phase out;
  out.process = ph.process;
  out.kind = ph.kind;
  out.pushdown.stack_alphabet = stripped.stack_alphabet;
  out.pushdown.eps_actions = stripped.eps_actions;
  out.pushdown.eps_actions.insert(Action::local(kSkipEps));
  out.pushdown.states = stripped.states;
  for (const auto& s : stripped.states) out.pushdown.states.push_back("~" + s);
  out.pushdown.transitions = stripped.transitions;
  for (const auto& t : stripped.transitions) out.pushdown.transitions.push_back({nz + t.from, t.action, nz + t.to});
  out.pushdown.transitions.push_back({z_s, Action::local(kSkipEps), nz + z_j});
  out.pushdown.init = stripped.init;
  out.final = nz + ph.final;
  return out;
}

inline std::optional<MdSequence> finish_sequence(MdSequence seq) {
  for (auto& ph : seq.phases) {
    auto t = trim_phase(ph);
    if (!t) return std::nullopt;
    ph = std::move(*t);
  }
  return seq;
}

inline long double pow_ld(long double b, long double e) { return std::pow(b, e); }

// The reduction at a demux pivot j (sequence not reversed).
inline std::vector<MdSequence> reduce_at(const MdSequence& seq, int j) {
  const auto& phj = seq.phases[j];
  const PushdownProcess& piv = phj.pushdown;
  const int c = phj.kind.channel;
  const int nz = piv.num_states();
  const auto R = empty_pairs(strip_communication(piv));

  std::vector<MdSequence> out;
  {
    MdSequence eps = seq;
    eps.phases[j].pushdown = strip_communication(piv);
    if (auto f = finish_sequence(std::move(eps))) out.push_back(std::move(*f));
  }

  std::set<int> sources, targets;
  for (const auto& u : piv.transitions) {
    if (u.action.kind == ActionKind::Recv && u.action.channel == c) {
      sources.insert(u.from);
      targets.insert(u.to);
    }
  }
  if (sources.empty()) return out;

  for (int s = 0; s < j; ++s) {
    const auto& phs = seq.phases[s];
    const bool sends_c = std::any_of(phs.pushdown.transitions.begin(), phs.pushdown.transitions.end(),
                                     [&](const Transition& t) {
                                       return t.action.kind == ActionKind::Send && t.action.channel == c;
                                     });
    if (!sends_c) continue;
    // pi[r - s] is the checkpoint for phase r, s <= r <= j.
    std::vector<int> pi(j - s + 1);
    std::function<void(int)> choose = [&](int r) {
      if (r == j + 1) {
        MdSequence psi = seq;
        for (int q = s; q < j; ++q) {
          psi.phases[q] = product_copy(seq.phases[q], piv, R, c, pi[q - s], pi[q - s + 1], q == s);
        }
        psi.phases[j] = pivot_local(phj, pi[0], pi[j - s]);
        if (auto f = finish_sequence(std::move(psi))) out.push_back(std::move(*f));
        return;
      }
      if (r == s) {
        for (int z : sources) {
          pi[0] = z;
          choose(r + 1);
        }
        return;
      }
      std::set<int> options = targets;
      if (r < j) options.insert(pi[r - s - 1]);
      for (int z : options) {
        pi[r - s] = z;
        choose(r + 1);
      }
    };
    choose(s);
  }
  (void)nz;
  return out;
}

}  // namespace detail

// A finite set F of sequences, each with one more communication-free phase,
// such that seq is satisfiable iff some member of F is.
inline std::vector<MdSequence> reduce_md_sequence(const MdSequence& seq, PivotChoice* choice = nullptr) {
  if (seq.all_local()) throw InputError("reduce: every phase is already communication-free");
  std::vector<MdSequence> F;
  PivotChoice pc;
  if (auto j = find_pivot(seq)) {
    pc = {*j, false};
    F = detail::reduce_at(seq, *j);
  } else {
    const MdSequence rev = reverse_sequence(seq);
    auto jr = find_pivot(rev);
    if (!jr) throw UnsupportedReduction("reduce: no phase can serve as pivot in either direction");
    pc = {static_cast<int>(seq.phases.size()) - 1 - *jr, true};
    for (auto& psi : detail::reduce_at(rev, *jr)) F.push_back(reverse_sequence(psi));
  }
  if (choice) *choice = pc;

  const long double phi = static_cast<long double>(seq.size());
  const long double k = static_cast<long double>(seq.phases.size());
  if (static_cast<long double>(F.size()) > detail::pow_ld(phi, k)) {
    throw std::logic_error("reduce: |F| exceeds |Phi|^k");
  }
  for (const auto& psi : F) {
    if (static_cast<long double>(psi.size()) > 2 * phi * phi) throw std::logic_error("reduce: |Psi| exceeds 2|Phi|^2");
  }
  return F;
}

// ---------------------------------------------------------------------------
// Satisfiability

// Per process, chains its phases (final state of one to the initial state
// of the next) and asks for an empty-stack to empty-stack execution.
inline bool check_local_satisfiability(const MdSequence& seq) {
  if (!seq.all_local()) throw InputError("local satisfiability: communication action present");
  const int np = seq.topology.num_processes();
  for (int p = 0; p < np; ++p) {
    PushdownProcess chain;
    int prev_final = -1;
    int first_init = -1;
    int idx = 0;
    for (const auto& ph : seq.phases) {
      if (ph.process != p) continue;
      const int off = chain.num_states();
      const std::string tag = std::to_string(idx++) + ":";
      for (const auto& s : ph.pushdown.states) chain.states.push_back(tag + s);
      if (ph.pushdown.num_symbols() > chain.num_symbols()) chain.stack_alphabet = ph.pushdown.stack_alphabet;
      for (const auto& t : ph.pushdown.transitions) {
        Action a = t.action;
        if (a.kind == ActionKind::Local) {
          const bool g = ph.pushdown.guarded(a);
          a.label = tag + a.label;
          if (g) chain.eps_actions.insert(a);
        }
        chain.transitions.push_back({off + t.from, a, off + t.to});
      }
      if (prev_final >= 0) {
        chain.transitions.push_back({prev_final, Action::local(detail::kChain), off + ph.pushdown.init});
      } else {
        first_init = off + ph.pushdown.init;
      }
      prev_final = off + ph.final;
    }
    if (prev_final < 0) continue;
    chain.init = first_init;
    if (!post_star(chain, first_init).accepts(prev_final, {})) return false;
  }
  return true;
}

enum class Satisfiability { Satisfiable, Unsatisfiable, BudgetExhausted, Unsupported };

inline const char* to_string(Satisfiability s) {
  switch (s) {
    case Satisfiability::Satisfiable:
      return "satisfiable";
    case Satisfiability::Unsatisfiable:
      return "unsatisfiable";
    case Satisfiability::BudgetExhausted:
      return "budget-exhausted";
    case Satisfiability::Unsupported:
      return "unsupported";
  }
  return "?";
}

// Structural fingerprint; local labels are replaced by their guard flag.
inline std::string canonical_key(const MdSequence& seq) {
  std::ostringstream os;
  for (const auto& ph : seq.phases) {
    const auto& pd = ph.pushdown;
    os << '[' << ph.process << ' ' << static_cast<int>(ph.kind.tag) << ' ' << ph.kind.channel << ' ' << pd.num_states()
       << ' ' << pd.num_symbols() << ' ' << pd.init << ' ' << ph.final << ';';
    std::vector<std::tuple<int, int, int, int, int, int, int>> ts;
    for (const auto& t : pd.transitions) {
      ts.emplace_back(t.from, static_cast<int>(t.action.kind), t.action.channel, t.action.message, t.action.symbol,
                      pd.guarded(t.action) ? 1 : 0, t.to);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (const auto& [a, b, c, d, e, f, g] : ts) os << a << ',' << b << ',' << c << ',' << d << ',' << e << ',' << f << ',' << g << ' ';
    os << ']';
  }
  return os.str();
}

struct SatisfiabilityContext {
  std::size_t budget = 100000;  // reductions allowed
  std::size_t reductions = 0;
  std::size_t leaves = 0;
  std::unordered_map<std::string, Satisfiability> memo;
};

namespace detail {

inline Satisfiability md_sat(const MdSequence& seq, SatisfiabilityContext& ctx, long double leaf_bound) {
  const std::string key = canonical_key(seq);
  if (auto it = ctx.memo.find(key); it != ctx.memo.end()) return it->second;
  Satisfiability result;
  if (seq.all_local()) {
    ++ctx.leaves;
    if (static_cast<long double>(seq.size()) > leaf_bound) throw std::logic_error("satisfiability: leaf exceeds size bound");
    result = check_local_satisfiability(seq) ? Satisfiability::Satisfiable : Satisfiability::Unsatisfiable;
  } else {
    if (ctx.reductions >= ctx.budget) return Satisfiability::BudgetExhausted;
    ++ctx.reductions;
    std::vector<MdSequence> F;
    try {
      F = reduce_md_sequence(seq);
    } catch (const UnsupportedReduction&) {
      ctx.memo.emplace(key, Satisfiability::Unsupported);
      return Satisfiability::Unsupported;
    }
    result = Satisfiability::Unsatisfiable;
    for (const auto& psi : F) {
      const auto r = md_sat(psi, ctx, leaf_bound);
      if (r == Satisfiability::Satisfiable) {
        result = r;
        break;
      }
      if (r == Satisfiability::BudgetExhausted) return r;  // not memoized
      if (r == Satisfiability::Unsupported) result = r;
    }
  }
  ctx.memo.emplace(key, result);
  return result;
}

}  // namespace detail

// Upper bound 2^k |Phi|^(2^k) on the size of any fully reduced sequence.
inline long double leaf_size_bound(const MdSequence& seq) {
  const long double k = static_cast<long double>(seq.phases.size());
  const long double e = std::pow(2.0L, k);
  return e * std::pow(static_cast<long double>(seq.size()), e);
}

inline Satisfiability check_md_satisfiability(const MdSequence& seq, SatisfiabilityContext& ctx) {
  if (auto v = validate_md_sequence(seq); !v.empty()) throw InputError("invalid md-sequence: " + v.front());
  return detail::md_sat(seq, ctx, leaf_size_bound(seq));
}

inline Satisfiability check_md_satisfiability(const MdSequence& seq, std::size_t budget = 100000) {
  SatisfiabilityContext ctx;
  ctx.budget = budget;
  return check_md_satisfiability(seq, ctx);
}

// ---------------------------------------------------------------------------
// Driver

enum class BoundedOutcome { Reachable, Unreachable, BudgetExhausted, Unsupported };

inline const char* to_string(BoundedOutcome o) {
  switch (o) {
    case BoundedOutcome::Reachable:
      return "reachable";
    case BoundedOutcome::Unreachable:
      return "unreachable";
    case BoundedOutcome::BudgetExhausted:
      return "budget-exhausted";
    case BoundedOutcome::Unsupported:
      return "unsupported";
  }
  return "?";
}

struct SkeletonSlot {
  int process = 0;
  PhaseKind kind;
  auto operator<=>(const SkeletonSlot&) const = default;
};

struct BoundedResult {
  BoundedOutcome outcome = BoundedOutcome::Unreachable;
  std::size_t skeletons = 0;
  std::size_t reductions = 0;
  std::size_t leaves = 0;
  std::optional<std::vector<SkeletonSlot>> skeleton;  // a satisfiable one
};

namespace detail {

// Phase of process p for one skeleton slot. Control states are pairs
// (z, dead-channel bits); between phases of p the current pair sits on top
// of its stack as an extra symbol. The last phase of p drains the stack
// from the target state and ends in a dedicated done state.
class SlotBuilder {
 public:
  SlotBuilder(const Rqcp& system, const std::vector<int>& target) : system_(system), target_(target) {
    const auto& topo = system.topology;
    for (int p = 0; p < topo.num_processes(); ++p) {
      std::vector<int> bit(topo.num_channels(), -1);
      int n = 0;
      for (int c = 0; c < topo.num_channels(); ++c) {
        if (topo.channels[c].src == p) bit[c] = n++;
      }
      if (n > 16) throw InputError("bounded reachability: too many outgoing channels for one process");
      bits_.push_back(std::move(bit));
      nbits_.push_back(n);
    }
  }

  Phase build(int p, const PhaseKind& kind, bool first, bool last) const {
    const auto& topo = system_.topology;
    const auto& pd = system_.processes[p];
    const int nb = 1 << nbits_[p];
    const int nzb = pd.num_states() * nb;
    auto st = [&](int z, int b) { return z * nb + b; };

    Phase ph;
    ph.process = p;
    ph.kind = kind;
    auto& out = ph.pushdown;
    out.stack_alphabet = pd.stack_alphabet;
    const int ng = pd.num_symbols();
    for (int z = 0; z < pd.num_states(); ++z) {
      for (int b = 0; b < nb; ++b) {
        out.states.push_back(pd.states[z] + "/" + std::to_string(b));
        out.stack_alphabet.push_back("<" + pd.states[z] + "/" + std::to_string(b) + ">");
      }
    }
    for (const auto& a : pd.eps_actions) {
      if (kind_allows(topo, p, kind, a)) out.eps_actions.insert(a);
    }
    for (const auto& t : pd.transitions) {
      const auto& a = t.action;
      if (!kind_allows(topo, p, kind, a)) continue;
      for (int b = 0; b < nb; ++b) {
        if (a.kind != ActionKind::Send) {
          out.transitions.push_back({st(t.from, b), a, st(t.to, b)});
          continue;
        }
        const int i = bits_[p][a.channel];
        const Action dead = guarded_local(pd.guarded(a), kDead, kDeadEps);
        if (pd.guarded(a)) out.eps_actions.insert(dead);
        if ((b >> i) & 1) {
          out.transitions.push_back({st(t.from, b), dead, st(t.to, b)});
        } else {
          out.transitions.push_back({st(t.from, b), a, st(t.to, b)});
          out.transitions.push_back({st(t.from, b), dead, st(t.to, b | (1 << i))});
        }
      }
    }
    if (first) {
      out.init = st(pd.init, 0);
    } else {
      out.init = static_cast<int>(out.states.size());
      out.states.push_back("entry");
      for (int s = 0; s < nzb; ++s) out.transitions.push_back({out.init, Action::pop(ng + s), s});
    }
    if (last) {
      const int drain = static_cast<int>(out.states.size());
      out.states.push_back("drain");
      const int done = drain + 1;
      out.states.push_back("done");
      for (int b = 0; b < nb; ++b) out.transitions.push_back({st(target_[p], b), Action::local(kDrain), drain});
      for (int g = 0; g < ng; ++g) out.transitions.push_back({drain, Action::pop(g), drain});
      out.transitions.push_back({drain, Action::local(kDoneEps), done});
      out.eps_actions.insert(Action::local(kDoneEps));
      ph.final = done;
    } else {
      const int exit = static_cast<int>(out.states.size());
      out.states.push_back("exit");
      for (int s = 0; s < nzb; ++s) out.transitions.push_back({s, Action::push(ng + s), exit});
      ph.final = exit;
    }
    return ph;
  }

 private:
  const Rqcp& system_;
  const std::vector<int>& target_;
  std::vector<std::vector<int>> bits_;
  std::vector<int> nbits_;
};

}  // namespace detail

// Whether some configuration with control vector `target` is reachable by
// a run made of at most k phases.
inline BoundedResult bounded_state_reach(const Rqcp& system, const std::vector<int>& target, int k,
                                         std::size_t budget = 100000) {
  const auto& topo = system.topology;
  if (k < 1) throw InputError("bounded reachability: k must be at least 1");
  if (target.size() != system.processes.size()) throw InputError("target vector has the wrong length");
  for (std::size_t p = 0; p < target.size(); ++p) {
    if (target[p] < 0 || target[p] >= system.processes[p].num_states()) throw InputError("target state out of range");
  }
  for (int c = 0; c < topo.num_channels(); ++c) {
    const auto& ch = topo.channels[c];
    if (!topo.is_restricted(ch.src, c) && !topo.is_restricted(ch.dst, c)) {
      throw InputError("bounded reachability: channel \"" + ch.name + "\" is unrestricted at both ends");
    }
  }
  const int np = topo.num_processes();
  std::vector<std::vector<PhaseKind>> kinds(np);
  for (int p = 0; p < np; ++p) {
    kinds[p] = communication_kinds(topo, p);
    if (kinds[p].empty()) kinds[p].push_back(PhaseKind::local());
  }
  std::vector<SkeletonSlot> options;
  for (int p = 0; p < np; ++p) {
    for (const auto& kd : kinds[p]) options.push_back({p, kd});
  }

  detail::SlotBuilder builder(system, target);
  std::map<std::tuple<int, PhaseKind, bool, bool>, Phase> phase_cache;
  auto phase_for = [&](int p, const PhaseKind& kd, bool first, bool last) -> const Phase& {
    const auto key = std::make_tuple(p, kd, first, last);
    auto it = phase_cache.find(key);
    if (it == phase_cache.end()) it = phase_cache.emplace(key, builder.build(p, kd, first, last)).first;
    return it->second;
  };

  SatisfiabilityContext ctx;
  ctx.budget = budget;
  BoundedResult result;
  bool exhausted = false, unsupported = false;
  std::vector<SkeletonSlot> skel;

  std::function<bool(int)> enumerate = [&](int len) -> bool {
    if (static_cast<int>(skel.size()) == len) {
      std::vector<int> count(np, 0);
      for (const auto& s : skel) ++count[s.process];
      for (int p = 0; p < np; ++p) {
        if (count[p] == 0 && system.processes[p].init != target[p]) return false;
      }
      ++result.skeletons;
      MdSequence seq;
      seq.topology = topo;
      seq.num_messages = system.num_messages();
      std::vector<int> seen(np, 0);
      for (const auto& s : skel) {
        const bool first = seen[s.process] == 0;
        const bool last = ++seen[s.process] == count[s.process];
        auto t = detail::trim_phase(phase_for(s.process, s.kind, first, last));
        if (!t) return false;
        seq.phases.push_back(std::move(*t));
      }
      const auto r = detail::md_sat(seq, ctx, leaf_size_bound(seq));
      if (r == Satisfiability::Satisfiable) {
        result.skeleton = skel;
        return true;
      }
      exhausted = exhausted || r == Satisfiability::BudgetExhausted;
      unsupported = unsupported || r == Satisfiability::Unsupported;
      return false;
    }
    for (const auto& opt : options) {
      if (!skel.empty() && skel.back() == opt) continue;
      skel.push_back(opt);
      const bool found = enumerate(len);
      skel.pop_back();
      if (found) return true;
    }
    return false;
  };

  bool found = false;
  for (int len = 0; len <= k && !found; ++len) found = enumerate(len);
  result.reductions = ctx.reductions;
  result.leaves = ctx.leaves;
  if (found) {
    result.outcome = BoundedOutcome::Reachable;
  } else if (exhausted) {
    result.outcome = BoundedOutcome::BudgetExhausted;
  } else if (unsupported) {
    result.outcome = BoundedOutcome::Unsupported;
  } else {
    result.outcome = BoundedOutcome::Unreachable;
  }
  return result;
}

}  // namespace rqcp
