#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "d2le/graph.hpp"
#include "d2le/rng.hpp"

namespace d2le {

using Port = std::uint32_t;

/// Leader-election status; Undecided is the initial value.
enum class Status : std::uint8_t { Undecided, Elected, NonElected };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Undecided: return "UNDECIDED";
    case Status::Elected: return "ELECTED";
    case Status::NonElected: return "NON_ELECTED";
  }
  return "?";
}

class EngineError : public std::runtime_error {
 public:
  enum class Kind { NonNeighborSend, CongestViolation, LedgerMismatch, CorruptTranscript, BadRoundBudget };

  EngineError(Kind kind, const std::string& what) : std::runtime_error(what), kind_{kind} {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// One delivered message. The payload is a single identifier.
struct Message {
  std::uint32_t round = 0;
  NodeIndex src = 0;
  NodeIndex dst = 0;
  Id payload = 0;
  friend bool operator==(const Message&, const Message&) = default;
};

struct Incoming {
  Port port = 0;
  Id payload = 0;
};

/// What a node program may observe: own id, degree, and last round's inbox.
/// No neighbor identities, no node count (KT0).
class NodeView {
 public:
  NodeView(Id id, std::size_t degree, std::uint32_t round, std::span<const Incoming> inbox) noexcept
      : id_{id}, degree_{degree}, round_{round}, inbox_{inbox} {}

  Id id() const noexcept { return id_; }
  std::size_t degree() const noexcept { return degree_; }
  /// Round about to execute; 0 at start, rounds + 1 at finish.
  std::uint32_t round() const noexcept { return round_; }
  std::span<const Incoming> inbox() const noexcept { return inbox_; }

 private:
  Id id_;
  std::size_t degree_;
  std::uint32_t round_;
  std::span<const Incoming> inbox_;
};

/// Per-node send buffer for one round.
class Outbox {
 public:
  void send(Port port, Id payload) {
    if (port >= degree_)
      throw EngineError(EngineError::Kind::NonNeighborSend,
                        "port " + std::to_string(port) + " is not a neighbor (degree " + std::to_string(degree_) + ")");
    pending_.push_back({port, payload});
  }

  /// Raw-word form; anything other than exactly one identifier breaks the
  /// CONGEST discipline and aborts the run.
  void send_words(Port port, std::span<const Id> words) {
    if (words.size() != 1)
      throw EngineError(EngineError::Kind::CongestViolation,
                        "payload of " + std::to_string(words.size()) + " identifiers; exactly one allowed");
    send(port, words.front());
  }

  void broadcast(Id payload) {
    for (Port p = 0; p < degree_; ++p) pending_.push_back({p, payload});
  }

 private:
  template <class P>
  friend class SynchronousRun;

  void reset(std::size_t degree) {
    degree_ = degree;
    pending_.clear();
  }

  std::size_t degree_ = 0;
  std::vector<Incoming> pending_;
};

/// A node program. `State` is the per-node local memory; the program value
/// itself is shared and must not hold per-trial state.
template <class P>
concept NodeProgram = requires(const P& program, typename P::State& state, const NodeView& view, Outbox& out,
                               SplitMix64& rng) {
  { program.start(view, rng) } -> std::same_as<typename P::State>;
  { program.step(state, view, out) } -> std::same_as<void>;
  { program.finish(state, view) } -> std::same_as<Status>;
};

/// Message counts. total = sum of per_round = sum of sent = sum of received.
struct MessageLedger {
  std::vector<std::uint64_t> per_round;
  std::vector<std::uint64_t> sent;
  std::vector<std::uint64_t> received;
  std::uint64_t total = 0;

  MessageLedger() = default;
  MessageLedger(std::size_t nodes, std::size_t rounds) : per_round(rounds, 0), sent(nodes, 0), received(nodes, 0) {}

  /// Messages sent plus received by v.
  std::uint64_t traffic(NodeIndex v) const { return sent[v] + received[v]; }

  bool consistent() const {
    std::uint64_t r = 0, s = 0, q = 0;
    for (auto x : per_round) r += x;
    for (auto x : sent) s += x;
    for (auto x : received) q += x;
    return r == total && s == total && q == total;
  }

  friend bool operator==(const MessageLedger&, const MessageLedger&) = default;
};

using Transcript = std::vector<Message>;

template <class State>
struct RunResult {
  std::vector<Status> statuses;
  std::vector<State> states;
  MessageLedger ledger;
  std::uint32_t rounds_used = 0;
  std::optional<Transcript> transcript;
};

struct RunOptions {
  std::uint32_t rounds = 2;
  bool record_transcript = false;
};

/// Lockstep executor. Each round, every node computes its sends from its
/// state and the previous round's inbox; all sends are then delivered at
/// once. Node v draws coins only from seed.node_stream(v).
template <class P>
class SynchronousRun {
 public:
  SynchronousRun(const Graph& g, const IdAssignment& ids, const P& program) : g_{g}, ids_{ids}, program_{program} {
    if (ids.size() != g.node_count()) throw std::invalid_argument("id assignment size does not match graph");
  }

  RunResult<typename P::State> operator()(TrialSeed seed, RunOptions options) {
    if (options.rounds == 0) throw EngineError(EngineError::Kind::BadRoundBudget, "round budget must be positive");
    const std::size_t n = g_.node_count();
    RunResult<typename P::State> result;
    result.ledger = MessageLedger(n, options.rounds);
    result.statuses.assign(n, Status::Undecided);
    result.states.reserve(n);
    if (options.record_transcript) result.transcript.emplace();

    inbox_offsets_.assign(n + 1, 0);
    inbox_.clear();

    for (NodeIndex v = 0; v < n; ++v) {
      SplitMix64 rng = seed.node_stream(v);
      result.states.push_back(program_.start(NodeView{ids_[v], g_.degree(v), 0, {}}, rng));
    }

    for (std::uint32_t round = 1; round <= options.rounds; ++round) {
      outgoing_.clear();
      for (NodeIndex v = 0; v < n; ++v) {
        out_.reset(g_.degree(v));
        program_.step(result.states[v], view(v, round), out_);
        for (const Incoming& m : out_.pending_) outgoing_.push_back({round, v, g_.neighbors(v)[m.port], m.payload});
        ports_.resize(outgoing_.size());
        for (std::size_t k = outgoing_.size() - out_.pending_.size(), j = 0; k < outgoing_.size(); ++k, ++j)
          ports_[k] = g_.reverse_port(v, out_.pending_[j].port);
      }
      deliver(round, result);
    }

    for (NodeIndex v = 0; v < n; ++v)
      result.statuses[v] = program_.finish(result.states[v], view(v, options.rounds + 1));
    result.rounds_used = options.rounds;

    if (!result.ledger.consistent())
      throw EngineError(EngineError::Kind::LedgerMismatch, "ledger totals disagree after run");
    return result;
  }

 private:
  NodeView view(NodeIndex v, std::uint32_t round) const {
    const std::size_t begin = inbox_offsets_[v];
    const std::size_t end = inbox_offsets_[v + 1];
    return NodeView{ids_[v], g_.degree(v), round, std::span<const Incoming>(inbox_.data() + begin, end - begin)};
  }

  // Counting sort by destination; sender order within an inbox is by sender index.
  void deliver(std::uint32_t round, RunResult<typename P::State>& result) {
    const std::size_t n = g_.node_count();
    inbox_offsets_.assign(n + 1, 0);
    for (const Message& m : outgoing_) ++inbox_offsets_[m.dst + 1];
    for (std::size_t v = 0; v < n; ++v) inbox_offsets_[v + 1] += inbox_offsets_[v];
    inbox_.resize(outgoing_.size());
    fill_.assign(inbox_offsets_.begin(), inbox_offsets_.end() - 1);
    auto& ledger = result.ledger;
    for (std::size_t k = 0; k < outgoing_.size(); ++k) {
      const Message& m = outgoing_[k];
      inbox_[fill_[m.dst]++] = Incoming{ports_[k], m.payload};
      ++ledger.sent[m.src];
      ++ledger.received[m.dst];
    }
    ledger.per_round[round - 1] = outgoing_.size();
    ledger.total += outgoing_.size();
    if (result.transcript) result.transcript->insert(result.transcript->end(), outgoing_.begin(), outgoing_.end());
  }

  const Graph& g_;
  const IdAssignment& ids_;
  const P& program_;
  Outbox out_;
  std::vector<Message> outgoing_;
  std::vector<Port> ports_;
  std::vector<Incoming> inbox_;
  std::vector<std::size_t> inbox_offsets_;
  std::vector<std::size_t> fill_;
};

template <NodeProgram P>
RunResult<typename P::State> run_synchronous(const Graph& g, const IdAssignment& ids, const P& program,
                                             TrialSeed seed, RunOptions options = {}) {
  return SynchronousRun<P>{g, ids, program}(seed, options);
}

// Transcript audit ---------------------------------------------------------

struct RoundListing {
  std::uint32_t round = 0;
  std::vector<Message> messages;
};

struct Replay {
  std::vector<RoundListing> rounds;
  std::uint64_t total = 0;
  /// Per-node sent/received, sized to the largest node index seen.
  std::vector<std::uint64_t> sent;
  std::vector<std::uint64_t> received;
};

/// Groups a transcript by round. Throws CorruptTranscript on round 0,
/// decreasing rounds, or self-addressed messages.
inline Replay replay(const Transcript& transcript) {
  Replay out;
  std::uint32_t last = 0;
  for (const Message& m : transcript) {
    if (m.round == 0 || m.round < last)
      throw EngineError(EngineError::Kind::CorruptTranscript, "round numbers must be positive and non-decreasing");
    if (m.src == m.dst) throw EngineError(EngineError::Kind::CorruptTranscript, "self-addressed message");
    if (out.rounds.empty() || out.rounds.back().round != m.round) out.rounds.push_back({m.round, {}});
    out.rounds.back().messages.push_back(m);
    const std::size_t need = std::max(m.src, m.dst) + std::size_t{1};
    if (out.sent.size() < need) {
      out.sent.resize(need, 0);
      out.received.resize(need, 0);
    }
    ++out.sent[m.src];
    ++out.received[m.dst];
    ++out.total;
    last = m.round;
  }
  return out;
}

/// Line-oriented "round src dst payload" form.
inline void write_transcript(std::ostream& os, const Transcript& transcript) {
  for (const Message& m : transcript) os << m.round << ' ' << m.src << ' ' << m.dst << ' ' << m.payload << '\n';
}

inline std::string transcript_text(const Transcript& transcript) {
  std::ostringstream os;
  write_transcript(os, transcript);
  return os.str();
}

inline Transcript read_transcript(std::istream& is) {
  Transcript out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    long long round = 0, src = 0, dst = 0;
    unsigned long long payload = 0;
    std::string extra;
    if (!(fields >> round >> src >> dst >> payload) || (fields >> extra) || round < 0 || src < 0 || dst < 0 ||
        round > std::numeric_limits<std::uint32_t>::max() || src > std::numeric_limits<NodeIndex>::max() ||
        dst > std::numeric_limits<NodeIndex>::max())
      throw EngineError(EngineError::Kind::CorruptTranscript, "malformed transcript line " + std::to_string(lineno));
    out.push_back({static_cast<std::uint32_t>(round), static_cast<NodeIndex>(src), static_cast<NodeIndex>(dst),
                   static_cast<Id>(payload)});
  }
  return out;
}

inline Transcript read_transcript(std::string_view text) {
  std::istringstream is{std::string(text)};
  return read_transcript(is);
}

}  // namespace d2le
