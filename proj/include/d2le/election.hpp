#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "d2le/engine.hpp"
#include "d2le/graph.hpp"
#include "d2le/rng.hpp"

namespace d2le {

/// (1 + log2 d) / d. Equals 1 exactly for d in {1, 2}.
inline double candidate_probability(std::size_t degree) {
  if (degree == 0) throw std::domain_error("candidate probability undefined for degree 0");
  if (degree <= 2) return 1.0;
  const double d = static_cast<double>(degree);
  return (1.0 + std::log2(d)) / d;
}

struct CandidateDraw {
  bool is_candidate = false;
  double probability = 0.0;
};

/// Independent coin per node with the degree-based probability. Nodes with
/// p = 1 consume no randomness.
struct CoinFlip {
  CandidateDraw draw(const NodeView& view, SplitMix64& rng) const {
    const double p = candidate_probability(view.degree());
    if (p >= 1.0) return {true, p};
    return {uniform01(rng) < p, p};
  }
};

/// Candidate set chosen up front by identifier, for exhaustive tests.
class FixedCandidates {
 public:
  explicit FixedCandidates(std::vector<Id> ids) : ids_{std::move(ids)} { std::sort(ids_.begin(), ids_.end()); }

  CandidateDraw draw(const NodeView& view, SplitMix64&) const {
    return {std::binary_search(ids_.begin(), ids_.end(), view.id()), candidate_probability(view.degree())};
  }

 private:
  std::vector<Id> ids_;
};

/// Minimum candidate id heard by a referee. Ids must be distinct.
inline Id referee_min(std::span<const Id> candidate_ids) {
  if (candidate_ids.empty()) throw std::invalid_argument("referee heard no candidate");
  std::vector<Id> sorted(candidate_ids.begin(), candidate_ids.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("duplicate candidate id at referee");
  return sorted.front();
}

/// Decision of a candidate after the reply round. `self_referee_min` is the
/// minimum the node computed when refereeing itself, if it did.
inline Status decide(Id own_id, std::span<const Id> neighbor_replies, std::optional<Id> self_referee_min) {
  if (self_referee_min && *self_referee_min != own_id) return Status::NonElected;
  for (Id reply : neighbor_replies)
    if (reply != own_id) return Status::NonElected;
  return Status::Elected;
}

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class WinRule {
  NeighborsAndSelf,  // every neighbor reply and the self-referee minimum equal own id
  NeighborsOnly,     // only neighbor replies are consulted
};

/// The two-round degree-based election as a node program.
///
/// Round 1: candidates send their id on every port. Round 2: every node that
/// heard at least one candidate replies the minimum over what it heard (plus
/// its own id when it is a candidate itself) to each candidate it heard.
/// Finish: a candidate is elected iff all replies carry its own id.
template <class CandidatePolicy = CoinFlip>
class ElectionProgram {
 public:
  struct State {
    CandidateDraw draw;
    std::optional<Id> self_min;
  };

  explicit ElectionProgram(CandidatePolicy policy = {}, WinRule rule = WinRule::NeighborsAndSelf)
      : policy_{std::move(policy)}, rule_{rule} {}

  State start(const NodeView& view, SplitMix64& rng) const { return State{policy_.draw(view, rng), std::nullopt}; }

  void step(State& state, const NodeView& view, Outbox& out) const {
    if (view.round() == 1) {
      if (state.draw.is_candidate) out.broadcast(view.id());
      return;
    }
    if (view.round() != 2) return;
    const auto inbox = view.inbox();
    if (inbox.empty() && !state.draw.is_candidate) return;
    std::vector<Id> heard;
    heard.reserve(inbox.size() + 1);
    for (const Incoming& m : inbox) heard.push_back(m.payload);
    if (state.draw.is_candidate) heard.push_back(view.id());
    const Id minimum = referee_min(heard);
    for (const Incoming& m : inbox) out.send(m.port, minimum);
    if (state.draw.is_candidate) state.self_min = minimum;
  }

  Status finish(State& state, const NodeView& view) const {
    if (!state.draw.is_candidate) return Status::NonElected;
    const auto inbox = view.inbox();
    std::vector<char> seen(view.degree(), 0);
    std::vector<Id> replies;
    replies.reserve(inbox.size());
    for (const Incoming& m : inbox) {
      if (m.port >= view.degree() || seen[m.port]) throw ProtocolError("duplicate or invalid reply port");
      seen[m.port] = 1;
      replies.push_back(m.payload);
    }
    if (replies.size() != view.degree())
      throw ProtocolError("candidate got " + std::to_string(replies.size()) + " replies from " +
                          std::to_string(view.degree()) + " neighbors");
    return decide(view.id(), replies, rule_ == WinRule::NeighborsAndSelf ? state.self_min : std::nullopt);
  }

 private:
  CandidatePolicy policy_;
  WinRule rule_;
};

inline constexpr std::uint32_t kElectionRounds = 2;

struct ElectionOutcome {
  std::optional<NodeIndex> leader;
  std::vector<Status> statuses;
  std::vector<NodeIndex> candidates;
  std::uint32_t rounds_used = 0;
  MessageLedger ledger;
  std::optional<Transcript> transcript;

  bool failed() const noexcept { return candidates.empty(); }
  std::size_t elected_count() const noexcept {
    return static_cast<std::size_t>(std::count(statuses.begin(), statuses.end(), Status::Elected));
  }
};

struct ElectionOptions {
  WinRule rule = WinRule::NeighborsAndSelf;
  bool record_transcript = false;
};

/// Runs one election. Refuses graphs of diameter > 2. A single-node graph
/// elects its node with no communication.
template <class CandidatePolicy>
ElectionOutcome elect_with(const Graph& g, const IdAssignment& ids, TrialSeed seed, CandidatePolicy policy,
                           ElectionOptions options = {}) {
  if (g.diameter_class() == DiameterClass::GreaterThanTwo)
    throw GraphError(GraphError::Kind::DiameterExceeded, "election refused: diameter exceeds 2");
  ElectionOutcome out;
  if (g.node_count() == 1) {
    out.leader = 0;
    out.statuses = {Status::Elected};
    out.candidates = {0};
    out.ledger = MessageLedger(1, kElectionRounds);
    if (options.record_transcript) out.transcript.emplace();
    return out;
  }

  const ElectionProgram<CandidatePolicy> program{std::move(policy), options.rule};
  auto run = run_synchronous(g, ids, program, seed, {kElectionRounds, options.record_transcript});

  for (NodeIndex v = 0; v < g.node_count(); ++v)
    if (run.states[v].draw.is_candidate) out.candidates.push_back(v);
  out.statuses = std::move(run.statuses);
  out.rounds_used = run.rounds_used;
  out.ledger = std::move(run.ledger);
  out.transcript = std::move(run.transcript);
  if (out.elected_count() == 1)
    out.leader = static_cast<NodeIndex>(std::find(out.statuses.begin(), out.statuses.end(), Status::Elected) -
                                        out.statuses.begin());
  return out;
}

inline ElectionOutcome elect(const Graph& g, const IdAssignment& ids, TrialSeed seed, ElectionOptions options = {}) {
  return elect_with(g, ids, seed, CoinFlip{}, options);
}

}  // namespace d2le
