#include <gtest/gtest.h>

#include "support/support.hpp"

using namespace rqcp;
using namespace rqcp::test;

namespace {

Rqcp guarded_sender() {
  Builder b;
  const int p = b.process("p", {"z0", "z1", "z2"}, {"a"});
  const int q = b.process("q", {"y0", "y1"});
  const int c = b.channel("c", p, q, true, false);
  const int m = b.message("m");
  b.add(p, 0, Action::push(0), 1).add(p, 1, Action::send(c, m), 2);
  b.add(q, 0, Action::recv(c, m), 1);
  return b.build();
}

// Same shape, but p may pop before sending.
Rqcp guarded_sender_with_pop() {
  Builder b;
  const int p = b.process("p", {"z0", "z1", "z2", "z3"}, {"a"});
  const int q = b.process("q", {"y0", "y1"});
  const int c = b.channel("c", p, q, true, false);
  const int m = b.message("m");
  b.add(p, 0, Action::push(0), 1).add(p, 1, Action::pop(0), 3).add(p, 3, Action::send(c, m), 2);
  b.add(q, 0, Action::recv(c, m), 1);
  return b.build();
}

}  // namespace

TEST(Product, HandshakeRendezvous) {
  const auto sys = handshake();
  EXPECT_TRUE(eager_state_reach(sys, {1, 1}).reachable);
  EXPECT_TRUE(eager_reach_bruteforce(sys, {}).contains({1, 1}));
}

TEST(Product, HandshakeUnmatchedSend) {
  const auto sys = handshake();
  EXPECT_TRUE(eager_state_reach(sys, {1, 0}).reachable);
  EXPECT_TRUE(eager_reach_bruteforce(sys, {}).contains({1, 0}));
  EXPECT_FALSE(eager_state_reach(sys, {0, 1}).reachable);
}

TEST(Product, EmptySystemReachesInitial) {
  Rqcp sys;
  EXPECT_TRUE(eager_state_reach(sys, {}).reachable);
}

TEST(Product, ReceiverOnly) {
  Builder b;
  const int p = b.process("p", {"z0"});
  const int q = b.process("q", {"y0", "y1"});
  const int c = b.channel("c", p, q, false, true);
  const int m = b.message("m");
  b.add(q, 0, Action::recv(c, m), 1);
  const auto sys = b.build();
  EXPECT_FALSE(eager_state_reach(sys, {0, 1}).reachable);
}

TEST(Product, GuardBlocksSendUnderPush) {
  const auto sys = guarded_sender();
  EXPECT_FALSE(eager_state_reach(sys, {2, 0}).reachable);
  EXPECT_EQ(eager_reach_bruteforce(sys, {}).verdict({2, 0}), false);
  const auto sys2 = guarded_sender_with_pop();
  EXPECT_TRUE(eager_state_reach(sys2, {2, 1}).reachable);
  EXPECT_EQ(eager_reach_bruteforce(sys2, {}).verdict({2, 1}), true);
}

TEST(Product, ConvergingRejectedWithWitness) {
  Builder b;
  const int p = b.process("p", {"z0"}, {"a"});
  const int q = b.process("q", {"y0"});
  b.channel("c", p, q, false, false);
  b.message("m");
  const auto sys = b.build();
  try {
    eager_state_reach(sys, {0, 0});
    FAIL() << "expected rejection";
  } catch (const ConvergingTopologyError& e) {
    EXPECT_EQ(e.witness.channels, std::vector<int>{0});
  }
}

TEST(Product, SizeWithinBound) {
  Rng rng(31);
  RandomParams prm;
  for (int i = 0; i < 60; ++i) {
    const auto sys = random_system(rng, prm);
    const auto prod = build_product(sys, random_target(rng, sys));
    EXPECT_LE(static_cast<long double>(prod.keys.size()), prod.state_bound);
  }
}

TEST(Product, AgreesWithOracleOnRandom) {
  Rng rng(32);
  RandomParams prm;
  int conclusive = 0;
  for (int i = 0; i < 60; ++i) {
    const auto sys = random_system(rng, prm);
    const auto oracle = eager_reach_bruteforce(sys, {});
    for (int t = 0; t < 3; ++t) {
      const auto target = random_target(rng, sys);
      const auto v = oracle.verdict(target);
      if (!v) continue;
      ++conclusive;
      EXPECT_EQ(eager_state_reach(sys, target).reachable, *v) << system_to_json(sys, target).dump();
    }
  }
  EXPECT_GT(conclusive, 60);
}

TEST(Finite, Handshake) { EXPECT_TRUE(finite_eager_reach(handshake(), {1, 1}).reachable); }

TEST(Finite, PingPongTwoRounds) {
  const auto sys = ping_pong(2);
  EXPECT_TRUE(finite_eager_reach(sys, {4, 4}).reachable);
  EXPECT_EQ(eager_reach_bruteforce(sys, {}).verdict({4, 4}), true);
  EXPECT_FALSE(finite_eager_reach(sys, {4, 2}).reachable);
}

TEST(Finite, ReceiverWaitsForever) {
  Builder b;
  const int p = b.process("p", {"z0"});
  const int q = b.process("q", {"y0", "y1"});
  const int c = b.channel("c", p, q, false, true);
  b.add(q, 0, Action::recv(c, b.message("m")), 1);
  EXPECT_FALSE(finite_eager_reach(b.build(), {0, 1}).reachable);
}

TEST(Finite, RejectsStacks) { EXPECT_THROW(finite_eager_reach(guarded_sender(), {0, 0}), InputError); }

TEST(Finite, TraceReplaysAsEagerRun) {
  const auto sys = ping_pong(2);
  const auto r = finite_eager_reach(sys, {4, 4});
  ASSERT_TRUE(r.reachable);
  const rqcp::Run run = make_run(sys, r.trace);
  EXPECT_TRUE(is_eager_run(run));
  EXPECT_EQ(run.final_config().control, (std::vector<int>{4, 4}));
}

TEST(Finite, ExactOnRandom) {
  Rng rng(33);
  RandomParams prm;
  prm.finite = true;
  prm.non_converging = false;
  for (int i = 0; i < 80; ++i) {
    const auto sys = random_system(rng, prm);
    const auto oracle = eager_reach_bruteforce(sys, {});
    if (oracle.truncated) continue;
    EXPECT_EQ(finite_eager_reachable_vectors(sys), oracle.vectors);
  }
}

TEST(Drain, AddsDoneStatePerProcess) {
  const auto sys = guarded_sender_with_pop();
  const auto aug = with_drain(sys, {2, 1});
  for (std::size_t p = 0; p < sys.processes.size(); ++p) {
    EXPECT_EQ(aug.processes[p].num_states(), sys.processes[p].num_states() + 2);
  }
}
