#include "d2le/engine.hpp"

#include <gtest/gtest.h>

#include "d2le/election.hpp"
#include "d2le/graph.hpp"

namespace d2le {
namespace {

struct Silent {
  struct State {};
  State start(const NodeView&, SplitMix64&) const { return {}; }
  void step(State&, const NodeView&, Outbox&) const {}
  Status finish(State&, const NodeView&) const { return Status::NonElected; }
};

// The node holding `speaker` broadcasts its id in round 1. Every node records
// what each round's inbox held.
struct OneSpeaker {
  Id speaker;
  struct State {
    std::vector<std::size_t> inbox_sizes;
  };
  State start(const NodeView& v, SplitMix64&) const {
    EXPECT_TRUE(v.inbox().empty());
    return {};
  }
  void step(State& s, const NodeView& v, Outbox& out) const {
    s.inbox_sizes.push_back(v.inbox().size());
    if (v.round() == 1 && v.id() == speaker) out.broadcast(v.id());
  }
  Status finish(State& s, const NodeView& v) const {
    s.inbox_sizes.push_back(v.inbox().size());
    return Status::NonElected;
  }
};

// Round 1: everyone sends its id on port 0. Round 2: forward every payload
// heard back on the port it came from.
struct Echo {
  struct State {
    std::vector<Id> heard_round2;
    std::vector<Id> heard_final;
  };
  State start(const NodeView&, SplitMix64&) const { return {}; }
  void step(State& s, const NodeView& v, Outbox& out) const {
    if (v.round() == 1) {
      EXPECT_TRUE(v.inbox().empty());
      out.send(0, v.id());
    } else {
      for (const auto& m : v.inbox()) {
        s.heard_round2.push_back(m.payload);
        out.send(m.port, m.payload);
      }
    }
  }
  Status finish(State& s, const NodeView& v) const {
    for (const auto& m : v.inbox()) s.heard_final.push_back(m.payload);
    return Status::NonElected;
  }
};

struct BadPort {
  struct State {};
  State start(const NodeView&, SplitMix64&) const { return {}; }
  void step(State&, const NodeView& v, Outbox& out) const { out.send(static_cast<Port>(v.degree()), v.id()); }
  Status finish(State&, const NodeView&) const { return Status::NonElected; }
};

struct FatPayload {
  struct State {};
  State start(const NodeView&, SplitMix64&) const { return {}; }
  void step(State&, const NodeView& v, Outbox& out) const {
    const Id words[2] = {v.id(), v.id()};
    out.send_words(0, words);
  }
  Status finish(State&, const NodeView&) const { return Status::NonElected; }
};

static_assert(NodeProgram<Silent>);
static_assert(NodeProgram<ElectionProgram<>>);

TEST(RunSynchronous, SilentProgramSendsNothing) {
  const Graph g = generate({Family::Complete, 6}, 0);
  const auto run = run_synchronous(g, IdAssignment::sequential(6), Silent{}, {1, 0}, {2, true});
  EXPECT_EQ(run.ledger.total, 0U);
  EXPECT_EQ(run.ledger.per_round, (std::vector<std::uint64_t>{0, 0}));
  EXPECT_TRUE(run.transcript->empty());
  EXPECT_EQ(run.rounds_used, 2U);
}

TEST(RunSynchronous, CenterBroadcastOnStar) {
  const Graph g = generate({Family::Star, 5}, 0);
  const auto ids = IdAssignment::sequential(5);  // center holds id 1
  const auto run = run_synchronous(g, ids, OneSpeaker{1}, {1, 0}, {2, false});
  EXPECT_EQ(run.ledger.total, 4U);
  EXPECT_EQ(run.ledger.sent[0], 4U);
  for (NodeIndex leaf = 1; leaf < 5; ++leaf) {
    EXPECT_EQ(run.ledger.received[leaf], 1U);
    // Sent in round 1, visible in round 2's inbox only.
    EXPECT_EQ(run.states[leaf].inbox_sizes, (std::vector<std::size_t>{0, 1, 0}));
  }
  EXPECT_TRUE(run.ledger.consistent());
}

TEST(RunSynchronous, ElectionOnK2) {
  const Graph g = generate({Family::Complete, 2}, 0);
  const auto run = run_synchronous(g, IdAssignment{{5, 9}}, ElectionProgram<>{}, {3, 1}, {2, true});
  EXPECT_EQ(run.ledger.total, 4U);
  EXPECT_EQ(run.statuses, (std::vector<Status>{Status::Elected, Status::NonElected}));

  const Replay listing = replay(*run.transcript);
  ASSERT_EQ(listing.rounds.size(), 2U);
  EXPECT_EQ(listing.rounds[0].messages.size(), 2U);
  EXPECT_EQ(listing.rounds[1].messages.size(), 2U);
  EXPECT_EQ(listing.total, run.ledger.total);
  // Round 2: both referees reply the minimum id 5.
  for (const auto& m : listing.rounds[1].messages) EXPECT_EQ(m.payload, 5U);
}

TEST(RunSynchronous, RoundOneCountIsCandidateDegreeSum) {
  const Graph g = generate({Family::Star, 5}, 0);
  const auto ids = IdAssignment{{50, 1, 2, 3, 4}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto run = run_synchronous(g, ids, ElectionProgram<>{}, {seed, 0}, {2, true});
    std::uint64_t degree_sum = 0;
    for (NodeIndex v = 0; v < 5; ++v)
      if (run.states[v].draw.is_candidate) degree_sum += g.degree(v);
    const Replay listing = replay(*run.transcript);
    ASSERT_FALSE(listing.rounds.empty());
    EXPECT_EQ(listing.rounds[0].messages.size(), degree_sum);
    EXPECT_EQ(listing.sent, run.ledger.sent);
    EXPECT_EQ(listing.received, run.ledger.received);
  }
}

TEST(RunSynchronous, Causality) {
  const Graph g = generate({Family::Wheel, 7}, 0);
  const auto ids = IdAssignment::sequential(7);
  const auto run = run_synchronous(g, ids, Echo{}, {0, 0}, {2, true});
  for (NodeIndex v = 0; v < 7; ++v) {
    // What v heard in round 2 is exactly what its port-0-facing neighbors sent in round 1.
    std::vector<Id> want;
    for (NodeIndex u = 0; u < 7; ++u)
      if (g.neighbors(u)[0] == v) want.push_back(ids[u]);
    EXPECT_EQ(run.states[v].heard_round2, want);
    ASSERT_EQ(run.states[v].heard_final.size(), 1U);
    EXPECT_EQ(run.states[v].heard_final[0], ids[v]);
  }
}

TEST(RunSynchronous, DeterministicTranscript) {
  SplitMix64 rng{77};
  const Graph g = generate({Family::ErDiam2, 40, 0, 0, 0.4}, rng);
  const auto ids = IdAssignment::sequential(40);
  const auto a = run_synchronous(g, ids, ElectionProgram<>{}, {9, 4}, {2, true});
  const auto b = run_synchronous(g, ids, ElectionProgram<>{}, {9, 4}, {2, true});
  EXPECT_EQ(*a.transcript, *b.transcript);
  EXPECT_EQ(a.ledger, b.ledger);
}

TEST(RunSynchronous, RejectsNonNeighborSend) {
  const Graph g = generate({Family::Complete, 3}, 0);
  try {
    run_synchronous(g, IdAssignment::sequential(3), BadPort{}, {0, 0});
    FAIL();
  } catch (const EngineError& e) {
    EXPECT_EQ(e.kind(), EngineError::Kind::NonNeighborSend);
  }
}

TEST(RunSynchronous, RejectsOversizedPayload) {
  const Graph g = generate({Family::Complete, 3}, 0);
  try {
    run_synchronous(g, IdAssignment::sequential(3), FatPayload{}, {0, 0});
    FAIL();
  } catch (const EngineError& e) {
    EXPECT_EQ(e.kind(), EngineError::Kind::CongestViolation);
  }
}

TEST(RunSynchronous, RejectsZeroRounds) {
  const Graph g = generate({Family::Complete, 3}, 0);
  EXPECT_THROW(run_synchronous(g, IdAssignment::sequential(3), Silent{}, {0, 0}, {0, false}), EngineError);
}

TEST(Replay, Empty) {
  const Replay r = replay({});
  EXPECT_TRUE(r.rounds.empty());
  EXPECT_EQ(r.total, 0U);
}

TEST(Replay, TextFormRoundTrips) {
  SplitMix64 rng{4};
  const Graph g = generate({Family::ErDiam2, 20, 0, 0, 0.5}, rng);
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto run = run_synchronous(g, IdAssignment::sequential(20), ElectionProgram<>{}, {1, t}, {2, true});
    const std::string text = transcript_text(*run.transcript);
    const Transcript parsed = read_transcript(text);
    EXPECT_EQ(parsed, *run.transcript);
    EXPECT_EQ(replay(parsed).total, run.ledger.total);
  }
}

TEST(Replay, CorruptTranscripts) {
  EXPECT_THROW(read_transcript("1 0 1 5\n1 0 x 5\n"), EngineError);
  EXPECT_THROW(read_transcript("1 0 1 5 extra\n"), EngineError);
  EXPECT_THROW(replay(read_transcript("2 0 1 5\n1 1 0 5\n")), EngineError);
  EXPECT_THROW(replay(read_transcript("0 0 1 5\n")), EngineError);
  EXPECT_THROW(replay(read_transcript("1 3 3 5\n")), EngineError);
}

}  // namespace
}  // namespace d2le
