#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "d2le/election.hpp"
#include "d2le/graph.hpp"

namespace d2le {

/// Relative slack for "value <= bound" checks on non-tight inequalities.
inline constexpr double kBoundGuard = 1e-9;

inline bool within_bound(double value, double bound) { return value <= bound + kBoundGuard * std::abs(bound); }

/// i with 2^(i-1) <= d < 2^i.
inline std::size_t bucket_index(std::size_t degree) {
  if (degree == 0) throw std::domain_error("bucket index undefined for degree 0");
  return static_cast<std::size_t>(std::bit_width(degree));
}

/// Largest bucket index k, defined by 2^(k-1) <= n < 2^k.
inline std::size_t bucket_limit(std::size_t n) { return bucket_index(n); }

enum class BucketCase { CaseI, CaseII, CaseIII };

inline const char* to_string(BucketCase c) {
  switch (c) {
    case BucketCase::CaseI: return "CASE_I";
    case BucketCase::CaseII: return "CASE_II";
    case BucketCase::CaseIII: return "CASE_III";
  }
  return "?";
}

struct BucketStats {
  std::size_t index = 0;
  std::size_t count = 0;
  std::vector<NodeIndex> members;
  double expected_candidates = 0.0;
  std::optional<double> lemma_bound;  // 3 i n_i / 2^i, for i >= 2
  BucketCase bucket_case = BucketCase::CaseIII;
  double case_cap = 0.0;
};

inline double log2n(std::size_t n) { return std::log2(static_cast<double>(n)); }

/// Buckets 1..k for the graph's node count, empty ones included, so the
/// result always partitions the node set.
inline std::vector<BucketStats> bucket_stats(const Graph& g) {
  const std::size_t n = g.node_count();
  const std::size_t k = bucket_limit(n);
  const double log_n = log2n(n);
  std::vector<BucketStats> buckets(k);
  for (std::size_t i = 1; i <= k; ++i) buckets[i - 1].index = i;
  for (NodeIndex v = 0; v < n; ++v) {
    const std::size_t d = g.degree(v);
    if (d == 0) continue;
    auto& b = buckets[bucket_index(d) - 1];
    b.members.push_back(v);
    b.expected_candidates += candidate_probability(d);
  }
  for (auto& b : buckets) {
    b.count = b.members.size();
    const double i = static_cast<double>(b.index);
    if (b.index == 1) {
      b.bucket_case = BucketCase::CaseI;
      b.case_cap = 2.0 * static_cast<double>(n);
      continue;
    }
    b.lemma_bound = 3.0 * i * static_cast<double>(b.count) / std::ldexp(1.0, static_cast<int>(b.index));
    if (b.expected_candidates >= log_n) {
      b.bucket_case = BucketCase::CaseII;
      b.case_cap = 36.0 * i * static_cast<double>(b.count);
    } else {
      b.bucket_case = BucketCase::CaseIII;
      b.case_cap = 6.0 * std::ldexp(1.0, static_cast<int>(b.index) + 1) * log_n;
    }
  }
  return buckets;
}

/// 85 n log2 n.
inline double tail_threshold(std::size_t n) {
  if (n < 2) throw std::domain_error("tail threshold needs n >= 2");
  return 85.0 * static_cast<double>(n) * log2n(n);
}

/// 2^-R, the Chernoff tail Pr[Y >= R] valid for R >= 6 E[Y].
inline double chernoff_reference(double expected, double threshold) {
  if (threshold < 6.0 * expected)
    throw std::domain_error("Chernoff form needs R >= 6 E[Y]");
  return std::exp2(-threshold);
}

struct BoundReport {
  std::size_t n = 0;
  double exact_expected_messages = 0.0;
  double expectation_upper = 0.0;
  double tail_threshold = 0.0;
  double case1_cap = 0.0;
  double case2_cap_sum = 0.0;
  double case3_cap_sum = 0.0;
  double no_candidate_probability = 0.0;
  std::vector<BucketStats> buckets;
};

/// Pr[no node becomes a candidate]; exactly 0 if some p_v = 1.
inline double no_candidate_probability(const Graph& g) {
  double log_mass = 0.0;
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    const double p = candidate_probability(g.degree(v));
    if (p >= 1.0) return 0.0;
    log_mass += std::log1p(-p);
  }
  return std::exp(log_mass);
}

/// Sum over nodes of 2 d_v p_v.
inline double exact_expected_messages(const Graph& g) {
  double sum = 0.0;
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    const std::size_t d = g.degree(v);
    sum += 2.0 * static_cast<double>(d) * candidate_probability(d);
  }
  return sum;
}

inline BoundReport bound_report(const Graph& g) {
  const std::size_t n = g.node_count();
  if (n < 2) throw std::domain_error("bound report needs n >= 2");
  BoundReport r;
  r.n = n;
  const double log_n = log2n(n);
  r.exact_expected_messages = exact_expected_messages(g);
  r.expectation_upper = 2.0 * static_cast<double>(n) * (1.0 + log_n);
  r.tail_threshold = tail_threshold(n);
  r.no_candidate_probability = no_candidate_probability(g);
  r.buckets = bucket_stats(g);
  for (const auto& b : r.buckets) {
    switch (b.bucket_case) {
      case BucketCase::CaseI: r.case1_cap = b.case_cap; break;
      case BucketCase::CaseII: r.case2_cap_sum += b.case_cap; break;
      case BucketCase::CaseIII: r.case3_cap_sum += b.case_cap; break;
    }
  }
  return r;
}

/// First d in [2, max_degree] breaking (1+log2 d)/d <= (1+i)/2^(i-1) <= 3i/2^i
/// for i = bucket_index(d) >= 2.
inline std::optional<std::size_t> first_degree_chain_violation(std::size_t max_degree) {
  for (std::size_t d = 2; d <= max_degree; ++d) {
    const std::size_t i = bucket_index(d);
    const double p = candidate_probability(d);
    const double mid = (1.0 + static_cast<double>(i)) / std::ldexp(1.0, static_cast<int>(i) - 1);
    const double cap = 3.0 * static_cast<double>(i) / std::ldexp(1.0, static_cast<int>(i));
    if (!within_bound(p, mid) || !within_bound(mid, cap)) return d;
  }
  return std::nullopt;
}

/// First n in [2, max_n] where sum_{i=2..k} 6 2^(i+1) log2 n > 48 n log2 n.
inline std::optional<std::size_t> first_case3_cap_violation(std::size_t max_n) {
  for (std::size_t n = 2; n <= max_n; ++n) {
    const std::size_t k = bucket_limit(n);
    const double log_n = log2n(n);
    double sum = 0.0;
    for (std::size_t i = 2; i <= k; ++i) sum += 6.0 * std::ldexp(1.0, static_cast<int>(i) + 1) * log_n;
    if (!within_bound(sum, 48.0 * static_cast<double>(n) * log_n)) return n;
  }
  return std::nullopt;
}

}  // namespace d2le
