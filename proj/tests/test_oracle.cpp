#include <gtest/gtest.h>

#include "support/support.hpp"

using namespace rqcp;
using namespace rqcp::test;

namespace {

// p sends m1 on c then m2 on d; q needs m2 before m1.
Rqcp needs_buffering() {
  Builder b;
  const int p = b.process("p", {"z0", "z1", "z2"});
  const int q = b.process("q", {"y0", "y1", "y2"});
  const int c = b.channel("c", p, q, false, true);
  const int d = b.channel("d", p, q, false, true);
  const int m1 = b.message("m1"), m2 = b.message("m2");
  b.add(p, 0, Action::send(c, m1), 1).add(p, 1, Action::send(d, m2), 2);
  b.add(q, 0, Action::recv(d, m2), 1).add(q, 1, Action::recv(c, m1), 2);
  return b.build();
}

// p sends m then m2 on c; q works locally before receiving both.
Rqcp fifo_pair() {
  Builder b;
  const int p = b.process("p", {"z0", "z1", "z2"});
  const int q = b.process("q", {"y0", "y1", "y2", "y3"});
  const int c = b.channel("c", p, q, false, true);
  const int m = b.message("m"), m2 = b.message("m2");
  b.add(p, 0, Action::send(c, m), 1).add(p, 1, Action::send(c, m2), 2);
  b.add(q, 0, Action::local("work"), 1).add(q, 1, Action::recv(c, m), 2).add(q, 2, Action::recv(c, m2), 3);
  return b.build();
}

// Two processes with one stack symbol each and a loose channel between them.
Rqcp two_stacks() {
  Builder b;
  const int p = b.process("p", {"a0", "a1", "a2"}, {"x"});
  const int q = b.process("q", {"b0", "b1", "b2"}, {"y"});
  b.add(p, 0, Action::push(0), 1).add(p, 1, Action::pop(0), 2);
  b.add(q, 0, Action::push(0), 1).add(q, 1, Action::pop(0), 2);
  return b.build();
}

}  // namespace

TEST(Explore, EmptySystem) {
  Rqcp sys;
  const auto e = explore_bounded(sys, {});
  EXPECT_EQ(e.configs().size(), 1u);
  EXPECT_FALSE(e.truncated());
}

TEST(Explore, SendLoopIsCut) {
  Builder b;
  const int p = b.process("p", {"z0"});
  const int q = b.process("q", {"y0"});
  const int c = b.channel("c", p, q, false, true);
  b.add(p, 0, Action::send(c, b.message("m")), 0);
  const auto e = explore_bounded(b.build(), {2, 0, 10});
  std::set<std::size_t> lens;
  for (const auto& x : e.configs()) lens.insert(x.channels[0].size());
  EXPECT_EQ(lens, (std::set<std::size_t>{0, 1, 2}));
  EXPECT_TRUE(e.truncated());
}

TEST(Explore, HandshakeHasThreeConfigurations) {
  const auto e = explore_bounded(handshake(), {});
  EXPECT_EQ(e.configs().size(), 3u);
  EXPECT_FALSE(e.truncated());
}

TEST(EagerOracle, HandshakeBothVectors) {
  const auto r = eager_reach_bruteforce(handshake(), {});
  EXPECT_TRUE(r.contains({1, 0}));
  EXPECT_TRUE(r.contains({1, 1}));
}

TEST(EagerOracle, BufferingNotEager) {
  const auto sys = needs_buffering();
  EXPECT_TRUE(explore_bounded(sys, {}).control_vectors().contains({2, 2}));
  EXPECT_EQ(eager_reach_bruteforce(sys, {}).verdict({2, 2}), false);
}

TEST(EagerOracle, AllLocalMatchesExplore) {
  const auto sys = two_stacks();
  EXPECT_EQ(eager_reach_bruteforce(sys, {}).vectors, explore_bounded(sys, {}).control_vectors());
}

TEST(EagerOracle, SubsetOfExplore) {
  Rng rng(51);
  RandomParams prm;
  for (int i = 0; i < 60; ++i) {
    const auto sys = random_system(rng, prm);
    const auto all = explore_bounded(sys, {3, 3, 10}).control_vectors();
    for (const auto& v : eager_reach_bruteforce(sys, {3, 3, 10}).vectors) EXPECT_TRUE(all.contains(v));
  }
}

TEST(RunPredicates, Eager) {
  const auto sys = handshake();
  EXPECT_TRUE(is_eager_run(make_run(sys, {{0, Action::send(0, 0)}, {1, Action::recv(0, 0)}})));
  EXPECT_TRUE(is_eager_run(make_run(sys, {{0, Action::send(0, 0)}})));
  const auto buf = needs_buffering();
  EXPECT_TRUE(is_eager_run(make_run(buf, {{0, Action::send(0, 0)}, {0, Action::send(1, 1)}, {1, Action::recv(1, 1)}})));
  EXPECT_FALSE(is_eager_run(
      make_run(buf, {{0, Action::send(0, 0)}, {0, Action::send(1, 1)}, {1, Action::recv(1, 1)}, {1, Action::recv(0, 0)}})));
  const auto fifo = fifo_pair();
  EXPECT_FALSE(is_eager_run(make_run(fifo, {{0, Action::send(0, 0)}, {0, Action::send(0, 1)}, {1, Action::local("work")}, {1, Action::recv(0, 0)}})));
}

TEST(RunPredicates, WellFormedAndBracketed) {
  const auto sys = two_stacks();
  const rqcp::Run nested = make_run(sys, {{0, Action::push(0)}, {1, Action::push(0)}, {1, Action::pop(0)}, {0, Action::pop(0)}});
  EXPECT_TRUE(is_well_formed(nested, 0));
  EXPECT_TRUE(is_well_formed(nested, 1));
  EXPECT_TRUE(is_well_bracketed(nested, 2));
  const rqcp::Run crossing = make_run(sys, {{0, Action::push(0)}, {1, Action::push(0)}, {0, Action::pop(0)}, {1, Action::pop(0)}});
  EXPECT_TRUE(is_well_formed(crossing, 0));
  EXPECT_TRUE(is_well_formed(crossing, 1));
  EXPECT_FALSE(is_well_bracketed(crossing, 2));
  const rqcp::Run open = make_run(sys, {{0, Action::push(0)}});
  EXPECT_FALSE(is_well_formed(open, 0));
}

TEST(Reorder, AlreadyEager) {
  const auto sys = ping_pong(2);
  const rqcp::Run r = make_run(sys, {{0, Action::send(0, 0)}, {1, Action::recv(0, 0)}, {1, Action::send(1, 1)}, {0, Action::recv(1, 1)}});
  const rqcp::Run out = reorder_mutex_to_eager(sys, r);
  EXPECT_TRUE(is_eager_run(out));
  EXPECT_EQ(process_projections(out, 2), process_projections(r, 2));
}

TEST(Reorder, DelayedReceive) {
  Builder b;
  const int p = b.process("p", {"z0", "z1"});
  const int q = b.process("q", {"y0", "y1", "y2"});
  const int c = b.channel("c", p, q, false, true);
  const int m = b.message("m");
  b.add(p, 0, Action::send(c, m), 1);
  b.add(q, 0, Action::local("work"), 1).add(q, 1, Action::recv(c, m), 2);
  const auto sys = b.build();
  const rqcp::Run r = make_run(sys, {{0, Action::send(c, m)}, {1, Action::local("work")}, {1, Action::recv(c, m)}});
  EXPECT_FALSE(is_eager_run(r));
  const rqcp::Run out = reorder_mutex_to_eager(sys, r);
  EXPECT_TRUE(is_valid_run(sys, out));
  EXPECT_TRUE(is_eager_run(out));
  EXPECT_EQ(process_projections(out, 2), process_projections(r, 2));
  EXPECT_EQ(out.final_config(), r.final_config());
}

TEST(Reorder, PolyforestBuffering) {
  const auto sys = fifo_pair();
  ASSERT_TRUE(is_polyforest(sys.topology));
  const auto e = explore_bounded(sys, {});
  for (std::size_t i = 0; i < e.configs().size(); ++i) {
    const rqcp::Run r = e.run_to(i);
    const rqcp::Run out = reorder_mutex_to_eager(sys, r);
    EXPECT_TRUE(is_valid_run(sys, out));
    EXPECT_EQ(process_projections(out, 2), process_projections(r, 2));
    EXPECT_EQ(out.final_config(), r.final_config());
    EXPECT_EQ(matching_pairs(out).size(), matching_pairs(r).size());
  }
}

TEST(Reorder, RejectsNonMutex) {
  const auto sys = cross_send();
  const rqcp::Run r = make_run(sys, {{0, Action::send(0, 0)}, {1, Action::send(1, 0)}});
  EXPECT_THROW(reorder_mutex_to_eager(sys, r), InputError);
}

TEST(KPhase, HandshakeExamples) {
  const auto sys = handshake(true);
  EXPECT_EQ(kphase_reach_bruteforce(sys, {1, 1}, 2, {}).verdict(), true);
  EXPECT_EQ(kphase_reach_bruteforce(sys, {1, 1}, 1, {}).verdict(), false);
  EXPECT_EQ(kphase_reach_bruteforce(sys, {0, 0}, 1, {}).verdict(), true);
}

TEST(PhaseRelation, Examples) {
  const auto topo = make_topology(2, {{0, 1, true, false}});
  const StackChannelPair empty{{{}, {}}, {{}}};

  Phase loc;
  loc.process = 0;
  loc.kind = PhaseKind::local();
  loc.pushdown.states = {"z0", "z1", "z2"};
  loc.pushdown.stack_alphabet = {"a"};
  loc.pushdown.transitions = {{0, Action::push(0), 1}, {1, Action::pop(0), 2}};
  loc.final = 2;
  EXPECT_EQ(phase_relation_oracle(topo, 1, loc, empty, {}).ends, std::set<StackChannelPair>{empty});

  Phase mux;
  mux.process = 0;
  mux.kind = PhaseKind::mux(0);
  mux.pushdown.states = {"z0", "z1"};
  mux.pushdown.transitions = {{0, Action::send(0, 0), 1}};
  mux.pushdown.eps_actions = {Action::send(0, 0)};
  mux.final = 1;
  const StackChannelPair sent{{{}, {}}, {{0}}};
  EXPECT_EQ(phase_relation_oracle(topo, 1, mux, empty, {}).ends, std::set<StackChannelPair>{sent});

  const auto topo2 = make_topology(2, {{1, 0, false, true}});
  Phase demux;
  demux.process = 0;
  demux.kind = PhaseKind::demux(0);
  demux.pushdown.states = {"z0", "z1"};
  demux.pushdown.transitions = {{0, Action::recv(0, 0), 1}};
  demux.pushdown.eps_actions = {Action::recv(0, 0)};
  demux.final = 1;
  EXPECT_EQ(phase_relation_oracle(topo2, 1, demux, sent, {}).ends, std::set<StackChannelPair>{empty});
}
