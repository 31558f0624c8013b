#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "d2le/election.hpp"
#include "d2le/graph.hpp"
#include "d2le/rng.hpp"

namespace d2le {

/// Brute-force law of the election over all 2^n candidate subsets.
///
/// Winners come from the min-id rule alone (never from simulating message
/// exchange), so agreement with `elect` is an independent check.
struct ExactLaw {
  std::size_t n = 0;
  double expected_messages = 0.0;
  double success_probability = 0.0;    // 1 - prod(1 - p_v)
  double enumerated_success_mass = 0.0;  // sum of Pr[S] over nonempty S
  double total_mass = 0.0;
  std::map<std::uint64_t, double> message_distribution;
  // Indexed by subset mask (bit v set = node v is a candidate).
  std::vector<double> subset_probability;
  std::vector<std::uint64_t> subset_messages;
  std::vector<std::optional<NodeIndex>> winner_map;
};

inline constexpr std::size_t kOracleMaxNodes = 20;

inline ExactLaw enumerate_exact(const Graph& g, const IdAssignment& ids) {
  const std::size_t n = g.node_count();
  if (n > kOracleMaxNodes)
    throw std::invalid_argument("oracle enumeration limited to n <= " + std::to_string(kOracleMaxNodes));
  if (ids.size() != n) throw std::invalid_argument("id assignment size does not match graph");

  // Degrees stay below 20 here, so every factor p_v or 1 - p_v is either 0
  // or above 0.13 and plain products cannot underflow.
  std::vector<double> p(n);
  for (NodeIndex v = 0; v < n; ++v) {
    const double d = static_cast<double>(g.degree(v));
    p[v] = d <= 2.0 ? 1.0 : (1.0 + std::log(d) / std::log(2.0)) / d;
  }

  ExactLaw law;
  law.n = n;
  const std::uint32_t subsets = std::uint32_t{1} << n;
  law.subset_probability.resize(subsets);
  law.subset_messages.resize(subsets);
  law.winner_map.resize(subsets);

  for (std::uint32_t mask = 0; mask < subsets; ++mask) {
    double prob = 1.0;
    std::uint64_t messages = 0;
    std::optional<NodeIndex> winner;
    for (NodeIndex v = 0; v < n; ++v) {
      const bool in = (mask >> v) & 1U;
      prob *= in ? p[v] : 1.0 - p[v];
      if (in) {
        messages += 2 * g.degree(v);
        if (!winner || ids[v] < ids[*winner]) winner = v;
      }
    }

    law.subset_probability[mask] = prob;
    law.subset_messages[mask] = messages;
    law.winner_map[mask] = winner;
    law.total_mass += prob;
    law.expected_messages += prob * static_cast<double>(messages);
    if (mask != 0) law.enumerated_success_mass += prob;
    if (prob > 0.0) law.message_distribution[messages] += prob;
  }

  double none = 1.0;
  for (double pv : p) none *= 1.0 - pv;
  law.success_probability = 1.0 - none;
  return law;
}

struct CrossCheckReport {
  std::size_t trials = 0;
  std::size_t discrepancies = 0;
  std::optional<std::size_t> first_trial;
  std::string first_description;

  bool ok() const noexcept { return discrepancies == 0; }
};

/// Runs `elect` per trial and compares leader, message total, and failure
/// flag against the oracle entry of the realized candidate set.
inline CrossCheckReport cross_check_protocol(const Graph& g, const IdAssignment& ids, std::size_t trials,
                                             std::uint64_t base_seed, const ExactLaw* law_in = nullptr) {
  std::optional<ExactLaw> owned;
  if (law_in == nullptr) owned = enumerate_exact(g, ids);
  const ExactLaw& law = law_in ? *law_in : *owned;

  CrossCheckReport report;
  report.trials = trials;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto outcome = elect(g, ids, TrialSeed{base_seed, t});
    std::uint32_t mask = 0;
    for (NodeIndex v : outcome.candidates) mask |= std::uint32_t{1} << v;

    std::string problem;
    if (law.subset_probability[mask] <= 0.0) problem = "realized candidate set has zero probability";
    else if (outcome.leader != law.winner_map[mask]) problem = "leader differs from min-id candidate";
    else if (outcome.elected_count() > 1) problem = "more than one node elected";
    else if (outcome.ledger.total != law.subset_messages[mask]) problem = "message total differs";
    else if (outcome.failed() != (mask == 0)) problem = "failure flag differs";

    if (!problem.empty()) {
      if (!report.first_trial) {
        report.first_trial = t;
        report.first_description = problem + " (candidate mask " + std::to_string(mask) + ")";
      }
      ++report.discrepancies;
    }
  }
  return report;
}

}  // namespace d2le
