#pragma once

// Shared test helpers: a small system builder, the fixture systems, random
// instance generators and a lean BFS over single pushdowns.

#include <deque>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <rqcp/rqcp.hpp>

namespace rqcp::test {

// Builds systems by name. Communication actions on restricted channels are
// added to the eps set automatically in build().
class Builder {
 public:
  int process(const std::string& name, std::vector<std::string> states, std::vector<std::string> symbols = {}) {
    sys_.topology.processes.push_back(name);
    PushdownProcess pd;
    pd.states = std::move(states);
    pd.stack_alphabet = std::move(symbols);
    sys_.processes.push_back(std::move(pd));
    return static_cast<int>(sys_.processes.size()) - 1;
  }

  int channel(const std::string& name, int src, int dst, bool restrict_src, bool restrict_dst) {
    const int c = static_cast<int>(sys_.topology.channels.size());
    sys_.topology.channels.push_back({name, src, dst});
    if (restrict_src) sys_.topology.restricted.insert({src, c});
    if (restrict_dst) sys_.topology.restricted.insert({dst, c});
    return c;
  }

  int message(const std::string& name) {
    sys_.messages.push_back(name);
    return static_cast<int>(sys_.messages.size()) - 1;
  }

  Builder& add(int p, int from, const Action& a, int to, bool guarded = false) {
    sys_.processes[p].transitions.push_back({from, a, to});
    if (guarded) sys_.processes[p].eps_actions.insert(a);
    return *this;
  }

  Rqcp build() const {
    Rqcp out = sys_;
    for (int p = 0; p < out.topology.num_processes(); ++p) {
      for (const auto& t : out.processes[p].transitions) {
        if (t.action.is_communication() && out.topology.is_restricted(p, t.action.channel)) {
          out.processes[p].eps_actions.insert(t.action);
        }
      }
    }
    return out;
  }

 private:
  Rqcp sys_;
};

inline TypedTopology make_topology(int np, const std::vector<std::tuple<int, int, bool, bool>>& chans) {
  TypedTopology t;
  for (int p = 0; p < np; ++p) t.processes.push_back("p" + std::to_string(p));
  for (const auto& [s, d, rs, rd] : chans) {
    const int c = t.num_channels();
    t.channels.push_back({"c" + std::to_string(c), s, d});
    if (rs) t.restricted.insert({s, c});
    if (rd) t.restricted.insert({d, c});
  }
  return t;
}

// ---------------------------------------------------------------------------
// Fixtures

// z0 -c!m-> z1 and y0 -c?m-> y1; the receiver is restricted on c.
inline Rqcp handshake(bool restrict_sender = false) {
  Builder b;
  const int p = b.process("p", {"z0", "z1"});
  const int q = b.process("q", {"y0", "y1"});
  const int c = b.channel("c", p, q, restrict_sender, true);
  const int m = b.message("m");
  b.add(p, 0, Action::send(c, m), 1);
  b.add(q, 0, Action::recv(c, m), 1);
  return b.build();
}

// p sends ping and waits for pong, `rounds` times.
inline Rqcp ping_pong(int rounds) {
  Builder b;
  std::vector<std::string> ps, qs;
  for (int i = 0; i <= 2 * rounds; ++i) {
    ps.push_back("a" + std::to_string(i));
    qs.push_back("b" + std::to_string(i));
  }
  const int p = b.process("p", ps);
  const int q = b.process("q", qs);
  const int c = b.channel("c", p, q, false, true);
  const int d = b.channel("d", q, p, true, false);
  const int ping = b.message("ping");
  const int pong = b.message("pong");
  for (int r = 0; r < rounds; ++r) {
    b.add(p, 2 * r, Action::send(c, ping), 2 * r + 1);
    b.add(p, 2 * r + 1, Action::recv(d, pong), 2 * r + 2);
    b.add(q, 2 * r, Action::recv(c, ping), 2 * r + 1);
    b.add(q, 2 * r + 1, Action::send(d, pong), 2 * r + 2);
  }
  return b.build();
}

// Both processes send first over antiparallel channels, then receive.
inline Rqcp cross_send() {
  Builder b;
  const int p = b.process("p", {"a0", "a1", "a2"});
  const int q = b.process("q", {"b0", "b1", "b2"});
  const int c = b.channel("c", p, q, false, true);
  const int d = b.channel("d", q, p, false, true);
  const int m = b.message("m");
  b.add(p, 0, Action::send(c, m), 1).add(p, 1, Action::recv(d, m), 2);
  b.add(q, 0, Action::send(d, m), 1).add(q, 1, Action::recv(c, m), 2);
  return b.build();
}

// Star: p -> q_i, p unrestricted, every q_i restricted.
inline TypedTopology star_topology(int n) {
  std::vector<std::tuple<int, int, bool, bool>> ch;
  for (int i = 1; i <= n; ++i) ch.emplace_back(0, i, false, true);
  return make_topology(n + 1, ch);
}

// Four processes, an outer ring p1->p2->p3->p4->p1 (source unrestricted)
// and an inner reversed ring with mixed restrictions.
inline TypedTopology double_ring_topology() {
  return make_topology(4, {
                              {0, 1, false, true},
                              {1, 2, false, true},
                              {2, 3, false, true},
                              {3, 0, false, true},
                              {1, 0, true, true},
                              {2, 1, true, false},
                              {3, 2, true, false},
                              {0, 3, true, true},
                          });
}

// Hierarchical master-worker overlay over p1..p8 (indices 0..7).
inline TypedTopology master_worker_topology() {
  return make_topology(8, {
                              {1, 3, false, true},  // p2 -> p4
                              {3, 6, false, true},  // p4 -> p7
                              {3, 7, true, true},   // p4 -> p8
                              {0, 2, false, true},  // p1 -> p3
                              {1, 0, false, true},  // p2 -> p1
                              {2, 4, false, true},  // p3 -> p5
                              {2, 5, true, true},   // p3 -> p6
                              {4, 5, true, true},   // p5 -> p6
                              {3, 1, true, false},  // p4 -> p2
                              {6, 3, true, false},  // p7 -> p4
                              {7, 3, true, true},   // p8 -> p4
                              {2, 0, true, true},   // p3 -> p1
                              {0, 1, false, true},  // p1 -> p2
                              {4, 2, true, false},  // p5 -> p3
                              {5, 2, true, false},  // p6 -> p3
                              {5, 4, true, true},   // p6 -> p5
                          });
}

// Four-process system with p0/p1 exchanging '$' over c01/c10 and p0 writing
// a relation word into c02/c03; the relation automaton accepts only (a,b).
inline Rqcp four_process_system() {
  Builder b;
  const int p0 = b.process("p0", {"0", "1", "2", "k0", "k1", "k2"});
  const int p1 = b.process("p1", {"3", "4", "5"});
  const int p2 = b.process("p2", {"s"});
  const int p3 = b.process("p3", {"s"});
  const int c01 = b.channel("c01", p0, p1, false, false);
  const int c10 = b.channel("c10", p1, p0, false, false);
  const int c02 = b.channel("c02", p0, p2, false, false);
  const int c03 = b.channel("c03", p0, p3, false, false);
  const int dollar = b.message("$");
  const int a = b.message("a");
  const int bm = b.message("b");
  b.add(p0, 0, Action::send(c01, dollar), 1);
  b.add(p0, 0, Action::local("eps-in"), 3);
  b.add(p0, 1, Action::recv(c10, dollar), 2);
  b.add(p0, 1, Action::send(c02, a), 1);
  b.add(p0, 1, Action::send(c03, bm), 1);
  b.add(p0, 3, Action::send(c02, a), 4);
  b.add(p0, 4, Action::send(c03, bm), 5);
  b.add(p0, 5, Action::local("eps-out"), 2);
  b.add(p1, 0, Action::send(c10, dollar), 1);
  b.add(p1, 0, Action::local("eps"), 2);
  b.add(p1, 1, Action::recv(c01, dollar), 2);
  return b.build();
}

// ---------------------------------------------------------------------------
// Random instances

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

struct RandomParams {
  int min_processes = 2, max_processes = 3;
  int max_states = 4;
  int max_symbols = 2;
  int max_messages = 2;
  int max_transitions = 6;
  int max_channels = 3;
  bool finite = false;
  bool non_converging = true;   // resample until non-converging
  bool restricted_end = false;  // every channel restricted at one end at least
  bool cyclic = false;          // resample until some simple cycle exists
  double guard_local = 0.25;
};

inline TypedTopology random_topology(Rng& rng, const RandomParams& prm) {
  for (;;) {
    const int np = uniform(rng, prm.min_processes, prm.max_processes);
    const int nc = uniform(rng, 1, prm.max_channels);
    std::vector<std::tuple<int, int, bool, bool>> ch;
    for (int i = 0; i < nc; ++i) {
      const int s = uniform(rng, 0, np - 1);
      int d = uniform(rng, 0, np - 2);
      if (d >= s) ++d;
      bool rs = coin(rng), rd = coin(rng);
      if ((prm.restricted_end || prm.non_converging) && !rs && !rd) (coin(rng) ? rs : rd) = true;
      ch.emplace_back(s, d, rs, rd);
    }
    auto t = make_topology(np, ch);
    if (prm.non_converging && is_converging(t)) continue;
    if (prm.cyclic && is_polyforest(t)) continue;
    return t;
  }
}

inline Rqcp random_system(Rng& rng, const RandomParams& prm) {
  Rqcp sys;
  sys.topology = random_topology(rng, prm);
  const int nm = uniform(rng, 1, prm.max_messages);
  for (int m = 0; m < nm; ++m) sys.messages.push_back("m" + std::to_string(m));
  const auto& topo = sys.topology;
  for (int p = 0; p < topo.num_processes(); ++p) {
    PushdownProcess pd;
    const int nz = uniform(rng, 2, prm.max_states);
    for (int z = 0; z < nz; ++z) pd.states.push_back("s" + std::to_string(z));
    const int ng = prm.finite ? 0 : uniform(rng, 0, prm.max_symbols);
    for (int g = 0; g < ng; ++g) pd.stack_alphabet.push_back("g" + std::to_string(g));
    std::vector<int> outs, ins;
    for (int c = 0; c < topo.num_channels(); ++c) {
      if (topo.channels[c].src == p) outs.push_back(c);
      if (topo.channels[c].dst == p) ins.push_back(c);
    }
    const int nt = uniform(rng, 1, prm.max_transitions);
    for (int i = 0; i < nt; ++i) {
      Transition t;
      t.from = uniform(rng, 0, nz - 1);
      t.to = uniform(rng, 0, nz - 1);
      const int roll = uniform(rng, 0, 9);
      if (roll < 3 && !outs.empty()) {
        t.action = Action::send(outs[uniform(rng, 0, static_cast<int>(outs.size()) - 1)], uniform(rng, 0, nm - 1));
      } else if (roll < 6 && !ins.empty()) {
        t.action = Action::recv(ins[uniform(rng, 0, static_cast<int>(ins.size()) - 1)], uniform(rng, 0, nm - 1));
      } else if (roll < 8 && ng > 0) {
        const int g = uniform(rng, 0, ng - 1);
        t.action = coin(rng) ? Action::push(g) : Action::pop(g);
      } else {
        t.action = Action::local("l" + std::to_string(i));
        if (ng > 0 && coin(rng, prm.guard_local)) pd.eps_actions.insert(t.action);
      }
      if (t.action.is_communication() && topo.is_restricted(p, t.action.channel)) pd.eps_actions.insert(t.action);
      pd.transitions.push_back(t);
    }
    sys.processes.push_back(std::move(pd));
  }
  return sys;
}

inline std::vector<int> random_target(Rng& rng, const Rqcp& sys) {
  std::vector<int> v;
  for (const auto& pd : sys.processes) v.push_back(uniform(rng, 0, pd.num_states() - 1));
  return v;
}

// A random stack+local pushdown.
inline PushdownProcess random_pushdown(Rng& rng, int max_states = 5, int max_symbols = 2, int max_transitions = 8) {
  PushdownProcess pd;
  const int nz = uniform(rng, 1, max_states);
  const int ng = uniform(rng, 1, max_symbols);
  for (int z = 0; z < nz; ++z) pd.states.push_back("z" + std::to_string(z));
  for (int g = 0; g < ng; ++g) pd.stack_alphabet.push_back("g" + std::to_string(g));
  const int nt = uniform(rng, 0, max_transitions);
  for (int i = 0; i < nt; ++i) {
    Transition t{uniform(rng, 0, nz - 1), {}, uniform(rng, 0, nz - 1)};
    const int roll = uniform(rng, 0, 4);
    if (roll < 2) {
      t.action = Action::push(uniform(rng, 0, ng - 1));
    } else if (roll < 4) {
      t.action = Action::pop(uniform(rng, 0, ng - 1));
    } else {
      t.action = Action::local("l" + std::to_string(i));
      if (coin(rng, 0.4)) pd.eps_actions.insert(t.action);
    }
    pd.transitions.push_back(t);
  }
  return pd;
}

// A random phase of process p and the given kind; only actions the kind
// allows are drawn.
inline Phase random_phase(Rng& rng, const TypedTopology& topo, int nm, int p, const PhaseKind& kind, int max_states = 3,
                          int max_transitions = 4) {
  Phase ph;
  ph.process = p;
  ph.kind = kind;
  const int nz = uniform(rng, 1, max_states);
  for (int z = 0; z < nz; ++z) ph.pushdown.states.push_back("s" + std::to_string(z));
  const int ng = uniform(rng, 0, 1);
  for (int g = 0; g < ng; ++g) ph.pushdown.stack_alphabet.push_back("g" + std::to_string(g));
  std::vector<Action> pool;
  for (int c = 0; c < topo.num_channels(); ++c) {
    for (int m = 0; m < nm; ++m) {
      if (topo.channels[c].src == p) pool.push_back(Action::send(c, m));
      if (topo.channels[c].dst == p) pool.push_back(Action::recv(c, m));
    }
  }
  std::erase_if(pool, [&](const Action& a) { return !kind_allows(topo, p, kind, a); });
  const int nt = uniform(rng, 1, max_transitions);
  for (int i = 0; i < nt; ++i) {
    Transition t{uniform(rng, 0, nz - 1), {}, uniform(rng, 0, nz - 1)};
    const int roll = uniform(rng, 0, 9);
    if (roll < 5 && !pool.empty()) {
      t.action = pool[uniform(rng, 0, static_cast<int>(pool.size()) - 1)];
      if (topo.is_restricted(p, t.action.channel)) ph.pushdown.eps_actions.insert(t.action);
    } else if (roll < 8 && ng > 0) {
      t.action = coin(rng) ? Action::push(0) : Action::pop(0);
    } else {
      t.action = Action::local("l" + std::to_string(i));
      if (coin(rng, 0.2)) ph.pushdown.eps_actions.insert(t.action);
    }
    ph.pushdown.transitions.push_back(t);
  }
  ph.final = uniform(rng, 0, nz - 1);
  return ph;
}

// Two processes, channels restricted at exactly one end, k phases.
inline MdSequence random_md_sequence(Rng& rng, int k) {
  MdSequence s;
  std::vector<std::tuple<int, int, bool, bool>> ch;
  const int nc = uniform(rng, 1, 2);
  for (int i = 0; i < nc; ++i) {
    const int src = uniform(rng, 0, 1);
    const bool at_src = coin(rng);
    ch.emplace_back(src, 1 - src, at_src, !at_src);
  }
  s.topology = make_topology(2, ch);
  s.num_messages = uniform(rng, 1, 2);
  for (int i = 0; i < k; ++i) {
    const int p = uniform(rng, 0, 1);
    auto kinds = communication_kinds(s.topology, p);
    kinds.push_back(PhaseKind::local());
    const auto kind = kinds[uniform(rng, 0, static_cast<int>(kinds.size()) - 1)];
    s.phases.push_back(random_phase(rng, s.topology, s.num_messages, p, kind));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Single-pushdown BFS, stack height capped at `max_height`.

using PdConfig = std::pair<int, std::vector<int>>;

inline std::set<PdConfig> pushdown_bfs(const PushdownProcess& pd, int from, std::size_t max_height) {
  std::set<PdConfig> seen{{from, {}}};
  std::deque<PdConfig> work{{from, {}}};
  while (!work.empty()) {
    auto [z, u] = work.front();
    work.pop_front();
    for (const auto& t : pd.transitions) {
      if (t.from != z) continue;
      const Action& a = t.action;
      if (pd.guarded(a) && !u.empty()) continue;
      std::vector<int> v = u;
      if (a.kind == ActionKind::Push) {
        if (v.size() >= max_height) continue;
        v.push_back(a.symbol);
      } else if (a.kind == ActionKind::Pop) {
        if (v.empty() || v.back() != a.symbol) continue;
        v.pop_back();
      }
      PdConfig next{t.to, std::move(v)};
      if (seen.insert(next).second) work.push_back(std::move(next));
    }
  }
  return seen;
}

// All stacks over `ng` symbols up to height h.
inline std::vector<std::vector<int>> all_stacks(int ng, std::size_t h) {
  std::vector<std::vector<int>> out{{}};
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].size() >= h) continue;
    for (int g = 0; g < ng; ++g) {
      auto v = out[i];
      v.push_back(g);
      out.push_back(std::move(v));
    }
  }
  return out;
}

// Applies a transition sequence of one process by hand, for example runs.
inline Run make_run(const Rqcp& sys, const std::vector<std::pair<int, Action>>& moves,
                    std::optional<Configuration> start = std::nullopt) {
  Run r;
  r.initial = start ? *start : initial_configuration(sys);
  Configuration cur = r.initial;
  for (const auto& [p, a] : moves) {
    std::optional<Configuration> next;
    for (const auto& t : sys.processes[p].transitions) {
      if (t.from == cur.control[p] && t.action == a) {
        next = apply_action(sys, cur, p, a, t.to);
        if (next) break;
      }
    }
    if (!next) throw std::runtime_error("make_run: move not enabled");
    cur = *next;
    r.steps.push_back({p, a, cur});
  }
  return r;
}

}  // namespace rqcp::test
