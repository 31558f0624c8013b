#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "d2le/rng.hpp"

namespace d2le {

using NodeIndex = std::uint32_t;
using Id = std::uint64_t;

struct Edge {
  NodeIndex u = 0;
  NodeIndex v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class DiameterClass { One, Two, GreaterThanTwo };

inline const char* to_string(DiameterClass c) {
  switch (c) {
    case DiameterClass::One: return "ONE";
    case DiameterClass::Two: return "TWO";
    case DiameterClass::GreaterThanTwo: return "UNKNOWN_GT_TWO";
  }
  return "?";
}

class GraphError : public std::runtime_error {
 public:
  enum class Kind {
    Parse,
    NodeOutOfRange,
    SelfLoop,
    DuplicateEdge,
    Disconnected,
    DiameterExceeded,
    TooSmall,
    InvalidParams,
    RetryCapExceeded,
  };

  GraphError(Kind kind, const std::string& what) : std::runtime_error(what), kind_{kind} {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Immutable simple undirected connected graph in CSR form.
///
/// Neighbor lists are sorted. Port k of node v is the k-th entry of
/// neighbors(v); reverse_port(v, k) is the port under which v appears in
/// that neighbor's list.
class Graph {
 public:
  /// Validates simplicity and connectivity and classifies the diameter.
  /// Edge endpoints may be given in either order.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges);

  std::size_t node_count() const noexcept { return offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return targets_.size() / 2; }
  std::size_t degree(NodeIndex v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

  std::span<const NodeIndex> neighbors(NodeIndex v) const noexcept {
    return {targets_.data() + offsets_[v], degree(v)};
  }
  std::uint32_t reverse_port(NodeIndex v, std::uint32_t port) const noexcept {
    return reverse_[offsets_[v] + port];
  }

  bool has_edge(NodeIndex u, NodeIndex v) const noexcept {
    auto adj = neighbors(u);
    return std::binary_search(adj.begin(), adj.end(), v);
  }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> out(node_count());
    for (NodeIndex v = 0; v < node_count(); ++v) out[v] = degree(v);
    return out;
  }

  /// Edges with u < v, lexicographically ordered.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (NodeIndex u = 0; u < node_count(); ++u)
      for (NodeIndex v : neighbors(u))
        if (u < v) out.push_back({u, v});
    return out;
  }

  std::size_t max_degree() const noexcept {
    std::size_t best = 0;
    for (NodeIndex v = 0; v < node_count(); ++v) best = std::max(best, degree(v));
    return best;
  }

  DiameterClass diameter_class() const noexcept { return diameter_class_; }
  bool is_complete() const noexcept {
    const std::size_t n = node_count();
    return edge_count() == n * (n - 1) / 2;
  }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.offsets_ == b.offsets_ && a.targets_ == b.targets_;
  }

 private:
  Graph() = default;

  std::vector<std::size_t> offsets_{0};
  std::vector<NodeIndex> targets_;
  std::vector<std::uint32_t> reverse_;
  DiameterClass diameter_class_ = DiameterClass::One;
};

/// True iff every non-adjacent pair has a common neighbor. Uses one neighbor
/// bitset per node; pre: g connected.
inline bool verify_diameter_at_most_two(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n <= 2 || g.is_complete()) return true;
  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> rows(n * words, 0);
  for (NodeIndex v = 0; v < n; ++v)
    for (NodeIndex w : g.neighbors(v)) rows[v * words + w / 64] |= std::uint64_t{1} << (w % 64);

  for (NodeIndex u = 0; u < n; ++u) {
    const std::uint64_t* ru = rows.data() + u * words;
    for (NodeIndex v = u + 1; v < n; ++v) {
      if (ru[v / 64] >> (v % 64) & 1U) continue;
      const std::uint64_t* rv = rows.data() + v * words;
      bool common = false;
      for (std::size_t k = 0; k < words && !common; ++k) common = (ru[k] & rv[k]) != 0;
      if (!common) return false;
    }
  }
  return true;
}

inline Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges) {
  using Kind = GraphError::Kind;
  if (n == 0) throw GraphError(Kind::TooSmall, "graph must have at least one node");
  if (n > std::size_t{std::numeric_limits<NodeIndex>::max()})
    throw GraphError(Kind::InvalidParams, "node count exceeds index range");

  std::vector<Edge> sorted;
  sorted.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u >= n || e.v >= n)
      throw GraphError(Kind::NodeOutOfRange, "edge (" + std::to_string(e.u) + "," +
                                                 std::to_string(e.v) + ") out of range for n=" +
                                                 std::to_string(n));
    if (e.u == e.v) throw GraphError(Kind::SelfLoop, "self-loop at node " + std::to_string(e.u));
    sorted.push_back(e.u < e.v ? e : Edge{e.v, e.u});
  }
  std::sort(sorted.begin(), sorted.end());
  if (auto dup = std::adjacent_find(sorted.begin(), sorted.end()); dup != sorted.end())
    throw GraphError(Kind::DuplicateEdge, "duplicate edge (" + std::to_string(dup->u) + "," +
                                              std::to_string(dup->v) + ")");

  Graph g;
  g.offsets_.assign(n + 1, 0);
  for (const Edge& e : sorted) {
    ++g.offsets_[e.u + 1];
    ++g.offsets_[e.v + 1];
  }
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] += g.offsets_[v];
  g.targets_.resize(2 * sorted.size());
  g.reverse_.resize(2 * sorted.size());
  std::vector<std::size_t> fill(g.offsets_.begin(), g.offsets_.end() - 1);
  // Lexicographic edge order fills every row in ascending neighbor order.
  for (const Edge& e : sorted) {
    const std::size_t at_u = fill[e.u]++;
    const std::size_t at_v = fill[e.v]++;
    g.targets_[at_u] = e.v;
    g.targets_[at_v] = e.u;
  }
  for (NodeIndex v = 0; v < n; ++v) {
    auto adj = g.neighbors(v);
    for (std::uint32_t port = 0; port < adj.size(); ++port) {
      auto back = g.neighbors(adj[port]);
      g.reverse_[g.offsets_[v] + port] =
          static_cast<std::uint32_t>(std::lower_bound(back.begin(), back.end(), v) - back.begin());
    }
  }

  std::vector<char> seen(n, 0);
  std::vector<NodeIndex> queue{0};
  seen[0] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (NodeIndex w : g.neighbors(queue[head]))
      if (!seen[w]) {
        seen[w] = 1;
        queue.push_back(w);
      }
  if (queue.size() != n)
    throw GraphError(Kind::Disconnected, "graph is disconnected: " + std::to_string(queue.size()) +
                                             " of " + std::to_string(n) + " nodes reachable from 0");

  if (g.is_complete())
    g.diameter_class_ = DiameterClass::One;
  else
    g.diameter_class_ = verify_diameter_at_most_two(g) ? DiameterClass::Two : DiameterClass::GreaterThanTwo;
  return g;
}

/// Parses "n m" followed by m lines "u v". Rejects n < 2 and diameter > 2.
inline Graph load_edge_list(std::istream& in) {
  using Kind = GraphError::Kind;
  long long n = 0;
  long long m = 0;
  if (!(in >> n >> m) || n < 0 || m < 0) throw GraphError(Kind::Parse, "expected header \"n m\"");
  if (n < 2) throw GraphError(Kind::TooSmall, "edge list needs n >= 2, got " + std::to_string(n));
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long k = 0; k < m; ++k) {
    long long u = 0;
    long long v = 0;
    if (!(in >> u >> v))
      throw GraphError(Kind::Parse, "expected " + std::to_string(m) + " edges, read " + std::to_string(k));
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw GraphError(Kind::NodeOutOfRange, "edge " + std::to_string(k) + " endpoint out of range");
    edges.push_back({static_cast<NodeIndex>(u), static_cast<NodeIndex>(v)});
  }
  std::string extra;
  if (in >> extra) throw GraphError(Kind::Parse, "trailing data after " + std::to_string(m) + " edges");

  Graph g = Graph::from_edges(static_cast<std::size_t>(n), edges);
  if (g.diameter_class() == DiameterClass::GreaterThanTwo)
    throw GraphError(Kind::DiameterExceeded, "graph diameter exceeds 2");
  return g;
}

inline Graph load_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_edge_list(in);
}

inline std::string to_edge_list(const Graph& g) {
  std::ostringstream out;
  out << g.node_count() << ' ' << g.edge_count() << '\n';
  for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << '\n';
  return out.str();
}

// Generators ---------------------------------------------------------------

enum class Family { Complete, Star, Wheel, CompleteBipartite, ErDiam2 };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::Complete: return "complete";
    case Family::Star: return "star";
    case Family::Wheel: return "wheel";
    case Family::CompleteBipartite: return "bipartite";
    case Family::ErDiam2: return "er";
  }
  return "?";
}

inline std::optional<Family> parse_family(std::string_view name) {
  for (Family f : {Family::Complete, Family::Star, Family::Wheel, Family::CompleteBipartite, Family::ErDiam2})
    if (name == to_string(f)) return f;
  return std::nullopt;
}

/// Family parameters. `n` is the total node count for every family except
/// COMPLETE_BIPARTITE, which uses parts `a` and `b`. WHEEL(n) is a hub joined
/// to an (n-1)-cycle.
struct GraphSpec {
  Family family = Family::Complete;
  std::size_t n = 0;
  std::size_t a = 0;
  std::size_t b = 0;
  std::optional<double> p;  // ER only; default_er_probability(n) when unset

  std::size_t node_count() const { return family == Family::CompleteBipartite ? a + b : n; }
};

inline double default_er_probability(std::size_t n) {
  const double x = static_cast<double>(n);
  return std::min(1.0, 3.0 * std::sqrt(std::log(x) / x));
}

inline constexpr int kErRetryCap = 100;

/// Builds one instance of the family. Only ER_DIAM2 consumes the generator;
/// it redraws (with the advanced stream) until the sample has diameter <= 2.
inline Graph generate(const GraphSpec& spec, SplitMix64& rng) {
  using Kind = GraphError::Kind;
  std::vector<Edge> edges;
  const auto node = [](std::size_t i) { return static_cast<NodeIndex>(i); };

  switch (spec.family) {
    case Family::Complete: {
      if (spec.n < 2) throw GraphError(Kind::InvalidParams, "COMPLETE needs n >= 2");
      for (std::size_t u = 0; u < spec.n; ++u)
        for (std::size_t v = u + 1; v < spec.n; ++v) edges.push_back({node(u), node(v)});
      return Graph::from_edges(spec.n, edges);
    }
    case Family::Star: {
      if (spec.n < 3) throw GraphError(Kind::InvalidParams, "STAR needs n >= 3");
      for (std::size_t v = 1; v < spec.n; ++v) edges.push_back({0, node(v)});
      return Graph::from_edges(spec.n, edges);
    }
    case Family::Wheel: {
      if (spec.n < 4) throw GraphError(Kind::InvalidParams, "WHEEL needs n >= 4");
      const std::size_t rim = spec.n - 1;
      for (std::size_t k = 0; k < rim; ++k) {
        edges.push_back({0, node(k + 1)});
        edges.push_back({node(k + 1), node((k + 1) % rim + 1)});
      }
      return Graph::from_edges(spec.n, edges);
    }
    case Family::CompleteBipartite: {
      if (spec.a < 1 || spec.b < 1) throw GraphError(Kind::InvalidParams, "COMPLETE_BIPARTITE needs a, b >= 1");
      for (std::size_t u = 0; u < spec.a; ++u)
        for (std::size_t v = 0; v < spec.b; ++v) edges.push_back({node(u), node(spec.a + v)});
      return Graph::from_edges(spec.a + spec.b, edges);
    }
    case Family::ErDiam2: {
      if (spec.n < 2) throw GraphError(Kind::InvalidParams, "ER_DIAM2 needs n >= 2");
      const double p = spec.p.value_or(default_er_probability(spec.n));
      if (!(p > 0.0 && p <= 1.0)) throw GraphError(Kind::InvalidParams, "ER_DIAM2 needs p in (0, 1]");
      for (int attempt = 0; attempt < kErRetryCap; ++attempt) {
        edges.clear();
        for (std::size_t u = 0; u < spec.n; ++u)
          for (std::size_t v = u + 1; v < spec.n; ++v)
            if (uniform01(rng) < p) edges.push_back({node(u), node(v)});
        try {
          Graph g = Graph::from_edges(spec.n, edges);
          if (g.diameter_class() != DiameterClass::GreaterThanTwo) return g;
        } catch (const GraphError& e) {
          if (e.kind() != Kind::Disconnected) throw;
        }
      }
      throw GraphError(Kind::RetryCapExceeded, "no diameter-2 sample in " + std::to_string(kErRetryCap) +
                                                    " attempts; p too small for n=" + std::to_string(spec.n));
    }
  }
  throw GraphError(Kind::InvalidParams, "unknown family");
}

inline Graph generate(const GraphSpec& spec, std::uint64_t seed) {
  SplitMix64 rng{seed};
  return generate(spec, rng);
}

// Identifiers --------------------------------------------------------------

/// Bijection node index -> identifier. Kept apart from indices so tests can
/// choose which node holds the minimum.
class IdAssignment {
 public:
  /// Throws std::invalid_argument on duplicates.
  explicit IdAssignment(std::vector<Id> ids) : ids_{std::move(ids)} {
    std::vector<Id> sorted = ids_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("identifiers must be distinct");
  }

  /// ids[v] = v + 1.
  static IdAssignment sequential(std::size_t n) {
    std::vector<Id> ids(n);
    for (std::size_t v = 0; v < n; ++v) ids[v] = v + 1;
    return IdAssignment{std::move(ids)};
  }

  /// Uniform random permutation of 1..n (Fisher-Yates).
  template <class Rng>
  static IdAssignment random_permutation(std::size_t n, Rng& rng) {
    std::vector<Id> ids(n);
    for (std::size_t v = 0; v < n; ++v) ids[v] = v + 1;
    for (std::size_t k = n; k > 1; --k) std::swap(ids[k - 1], ids[uniform_below(rng, k)]);
    return IdAssignment{std::move(ids), Trusted{}};
  }

  Id operator[](NodeIndex v) const noexcept { return ids_[v]; }
  std::size_t size() const noexcept { return ids_.size(); }
  std::span<const Id> values() const noexcept { return ids_; }

 private:
  struct Trusted {};
  IdAssignment(std::vector<Id> ids, Trusted) : ids_{std::move(ids)} {}

  std::vector<Id> ids_;
};

}  // namespace d2le
