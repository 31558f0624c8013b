#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "d2le/analysis.hpp"
#include "d2le/election.hpp"
#include "d2le/graph.hpp"
#include "d2le/rng.hpp"

namespace d2le {

enum class OutputFormat { Csv, Json };

struct ExperimentConfig {
  GraphSpec graph;
  std::optional<std::string> file;    // edge-list path; overrides `graph`
  std::vector<std::size_t> n_values;  // sweep points
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  OutputFormat format = OutputFormat::Csv;
  std::optional<std::string> out;
  unsigned jobs = 1;
};

/// Wilson score interval for a binomial proportion.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  Interval out{std::max(0.0, center - half), std::min(1.0, center + half)};
  // The closed-form endpoints are exactly 0 / 1 at the boundaries; pin them
  // so rounding residue never excludes a tiny exact probability.
  if (successes == 0) out.lo = 0.0;
  if (successes == trials) out.hi = 1.0;
  return out;
}

struct BucketSummary {
  std::size_t index = 0;
  std::size_t count = 0;
  double mean_candidates = 0.0;
  double exact_expected = 0.0;
};

struct TrialReport {
  std::string family;
  std::size_t n = 0;
  std::size_t trials = 0;
  double mean_messages = 0.0;
  double stddev_messages = 0.0;
  std::uint64_t max_messages = 0;
  double exact_expected_messages = 0.0;
  double expectation_upper = 0.0;
  double tail_threshold = 0.0;
  std::uint64_t tail_exceedances = 0;
  std::uint64_t failures = 0;
  double exact_failure_probability = 0.0;
  Interval failure_interval;
  std::map<std::uint32_t, std::uint64_t> rounds_histogram;
  std::vector<BucketSummary> buckets;

  // Per-trial contract checks; all must be zero.
  std::uint64_t multiple_leaders = 0;
  std::uint64_t wrong_leader = 0;
  std::uint64_t message_identity_violations = 0;
  std::uint64_t round_violations = 0;

  bool safe() const noexcept {
    return multiple_leaders == 0 && wrong_leader == 0 && message_identity_violations == 0 && round_violations == 0;
  }
  double standard_error() const noexcept {
    return trials > 0 ? stddev_messages / std::sqrt(static_cast<double>(trials)) : 0.0;
  }
  /// mean / (n (1 + log2 n)); at most 2 in expectation.
  double normalized_mean() const noexcept {
    return mean_messages / (static_cast<double>(n) * (1.0 + std::log2(static_cast<double>(n))));
  }
};

namespace detail {

// Integer sums only, so merge order cannot change the result.
struct TrialAccumulator {
  std::uint64_t trials = 0;
  std::uint64_t sum = 0;
  unsigned __int128 sum_sq = 0;
  std::uint64_t max = 0;
  std::uint64_t tail_exceed = 0;
  std::uint64_t failures = 0;
  std::uint64_t multiple_leaders = 0;
  std::uint64_t wrong_leader = 0;
  std::uint64_t identity = 0;
  std::uint64_t rounds = 0;
  std::map<std::uint32_t, std::uint64_t> rounds_histogram;
  std::vector<std::uint64_t> bucket_candidates;

  void merge(const TrialAccumulator& o) {
    trials += o.trials;
    sum += o.sum;
    sum_sq += o.sum_sq;
    max = std::max(max, o.max);
    tail_exceed += o.tail_exceed;
    failures += o.failures;
    multiple_leaders += o.multiple_leaders;
    wrong_leader += o.wrong_leader;
    identity += o.identity;
    rounds += o.rounds;
    for (auto [r, c] : o.rounds_histogram) rounds_histogram[r] += c;
    if (bucket_candidates.size() < o.bucket_candidates.size()) bucket_candidates.resize(o.bucket_candidates.size(), 0);
    for (std::size_t i = 0; i < o.bucket_candidates.size(); ++i) bucket_candidates[i] += o.bucket_candidates[i];
  }
};

inline void record_trial(const Graph& g, const IdAssignment& ids, const ElectionOutcome& outcome,
                         double tail_threshold, TrialAccumulator& acc) {
  const std::uint64_t messages = outcome.ledger.total;
  ++acc.trials;
  acc.sum += messages;
  acc.sum_sq += static_cast<unsigned __int128>(messages) * messages;
  acc.max = std::max(acc.max, messages);
  if (static_cast<double>(messages) > tail_threshold) ++acc.tail_exceed;
  ++acc.rounds_histogram[outcome.rounds_used];
  if (outcome.rounds_used != kElectionRounds) ++acc.rounds;

  std::uint64_t degree_sum = 0;
  std::optional<NodeIndex> min_candidate;
  for (NodeIndex v : outcome.candidates) {
    degree_sum += g.degree(v);
    ++acc.bucket_candidates[bucket_index(g.degree(v)) - 1];
    if (!min_candidate || ids[v] < ids[*min_candidate]) min_candidate = v;
  }
  if (messages != 2 * degree_sum) ++acc.identity;
  const std::size_t elected = outcome.elected_count();
  if (elected > 1) ++acc.multiple_leaders;
  if (outcome.failed()) {
    ++acc.failures;
    if (elected != 0) ++acc.wrong_leader;
  } else if (outcome.leader != min_candidate) {
    ++acc.wrong_leader;
  }
}

}  // namespace detail

/// Graph used for config point n; the seed split keeps each point
/// independent of which other points are in the sweep.
inline Graph build_graph(const GraphSpec& spec, std::uint64_t seed) {
  SplitMix64 rng{derive_seed(seed, 0x67726170ULL, spec.node_count())};
  return generate(spec, rng);
}

/// Ids for trial t: a fresh random permutation from the trial's aux stream.
inline IdAssignment trial_ids(std::size_t n, TrialSeed seed) {
  SplitMix64 rng = seed.aux_stream(0);
  return IdAssignment::random_permutation(n, rng);
}

/// `trials` seeded elections on g, checked and aggregated. Trial t uses
/// TrialSeed{seed, t}; results are identical for any `jobs`.
inline TrialReport run_trials(const Graph& g, const std::string& family, std::size_t trials, std::uint64_t seed,
                              unsigned jobs = 1) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  const std::size_t n = g.node_count();
  const BoundReport bounds = bound_report(g);
  const std::size_t buckets = bounds.buckets.size();

  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<detail::TrialAccumulator> partial(chunks);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    try {
    for (std::size_t c = next++; c < chunks; c = next++) {
      auto& acc = partial[c];
      acc.bucket_candidates.assign(buckets, 0);
      const std::size_t end = std::min(trials, (c + 1) * kChunk);
      for (std::size_t t = c * kChunk; t < end; ++t) {
        const TrialSeed ts{seed, t};
        const IdAssignment ids = trial_ids(n, ts);
        detail::record_trial(g, ids, elect(g, ids, ts), bounds.tail_threshold, acc);
      }
    }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = chunks;
    }
  };
  const unsigned workers = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(chunks, 1))));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  detail::TrialAccumulator total;
  total.bucket_candidates.assign(buckets, 0);
  for (const auto& acc : partial) total.merge(acc);

  TrialReport r;
  r.family = family;
  r.n = n;
  r.trials = trials;
  const double count = static_cast<double>(trials);
  r.mean_messages = trials ? static_cast<double>(total.sum) / count : 0.0;
  if (trials > 1) {
    // Exact integer numerator: T * sum_sq - sum^2.
    const unsigned __int128 s = total.sum;
    const unsigned __int128 num = static_cast<unsigned __int128>(trials) * total.sum_sq - s * s;
    r.stddev_messages = std::sqrt(static_cast<double>(num) / (count * (count - 1.0)));
  }
  r.max_messages = total.max;
  r.exact_expected_messages = bounds.exact_expected_messages;
  r.expectation_upper = bounds.expectation_upper;
  r.tail_threshold = bounds.tail_threshold;
  r.tail_exceedances = total.tail_exceed;
  r.failures = total.failures;
  r.exact_failure_probability = bounds.no_candidate_probability;
  r.failure_interval = wilson_interval(total.failures, trials);
  r.rounds_histogram = total.rounds_histogram;
  r.multiple_leaders = total.multiple_leaders;
  r.wrong_leader = total.wrong_leader;
  r.message_identity_violations = total.identity;
  r.round_violations = total.rounds;
  for (const auto& b : bounds.buckets)
    r.buckets.push_back({b.index, b.count,
                         trials ? static_cast<double>(total.bucket_candidates[b.index - 1]) / count : 0.0,
                         b.expected_candidates});
  return r;
}

/// The config's graph: the edge-list file when given, else the generated family.
inline Graph config_graph(const ExperimentConfig& config) {
  if (!config.file) return build_graph(config.graph, config.seed);
  std::ifstream in(*config.file);
  if (!in) throw std::runtime_error("cannot open edge list: " + *config.file);
  return load_edge_list(in);
}

inline TrialReport run_trials(const ExperimentConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("trials must be >= 1");
  return run_trials(config_graph(config), config.file ? "file" : to_string(config.graph.family), config.trials,
                    config.seed, config.jobs);
}

/// One report per n in config.n_values (COMPLETE_BIPARTITE splits n as a = n/4, b = n - a).
inline std::vector<TrialReport> scaling_sweep(const ExperimentConfig& config) {
  std::vector<TrialReport> rows;
  for (std::size_t n : config.n_values) {
    if (n < 2) throw std::invalid_argument("sweep n values must be >= 2");
    ExperimentConfig point = config;
    point.graph.n = n;
    if (point.graph.family == Family::CompleteBipartite) {
      point.graph.a = std::max<std::size_t>(1, n / 4);
      point.graph.b = n - point.graph.a;
    }
    rows.push_back(run_trials(point));
  }
  return rows;
}

// Report output ------------------------------------------------------------

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline constexpr const char* kCsvHeader =
    "n,family,trials,mean_msgs,stddev_msgs,max_msgs,exact_E_msgs,expectation_upper,tail_threshold,tail_exceed,"
    "failures,exact_fail_prob,fail_lo95,fail_hi95";

inline void write_csv_row(std::ostream& os, const TrialReport& r, bool normalized) {
  os << r.n << ',' << r.family << ',' << r.trials << ',' << format_double(r.mean_messages) << ','
     << format_double(r.stddev_messages) << ',' << r.max_messages << ',' << format_double(r.exact_expected_messages)
     << ',' << format_double(r.expectation_upper) << ',' << format_double(r.tail_threshold) << ','
     << r.tail_exceedances << ',' << r.failures << ',' << format_double(r.exact_failure_probability) << ','
     << format_double(r.failure_interval.lo) << ',' << format_double(r.failure_interval.hi);
  if (normalized) os << ',' << format_double(r.normalized_mean());
  os << '\n';
}

/// Fixed-schema CSV. Sweeps append a `normalized_msgs` column.
inline void write_csv(std::ostream& os, const std::vector<TrialReport>& rows, bool normalized = false) {
  os << kCsvHeader << (normalized ? ",normalized_msgs" : "") << '\n';
  for (const auto& r : rows) write_csv_row(os, r, normalized);
}

inline std::string csv_text(const std::vector<TrialReport>& rows, bool normalized = false) {
  std::ostringstream os;
  write_csv(os, rows, normalized);
  return os.str();
}

// Deterministic bound verification ----------------------------------------

struct NamedGraph {
  std::string name;
  Graph graph;
};

struct BoundCheck {
  std::string graph;
  std::string check;
  std::size_t bucket = 0;  // 0 when not bucket-specific
  double value = 0.0;
  double bound = 0.0;
  bool passed = true;
};

struct BoundsVerification {
  std::vector<BoundCheck> checks;
  std::size_t violations = 0;
  bool ok() const noexcept { return violations == 0; }
};

/// Per graph: E[Y_i] <= 3 i n_i / 2^i for every nonempty bucket i >= 2, the
/// expectation bound, and the Case III cap sum.
inline BoundsVerification verify_bounds(const std::vector<NamedGraph>& corpus) {
  BoundsVerification out;
  auto add = [&](BoundCheck c) {
    c.passed = within_bound(c.value, c.bound);
    if (!c.passed) ++out.violations;
    out.checks.push_back(std::move(c));
  };
  for (const auto& [name, g] : corpus) {
    const BoundReport r = bound_report(g);
    for (const auto& b : r.buckets)
      if (b.index >= 2 && b.count > 0) add({name, "lemma_bucket", b.index, b.expected_candidates, *b.lemma_bound});
    add({name, "expectation", 0, r.exact_expected_messages, r.expectation_upper});
    const double n = static_cast<double>(r.n);
    add({name, "case3_cap_sum", 0, r.case3_cap_sum, 48.0 * n * std::log2(n)});
  }
  return out;
}

/// STAR, WHEEL, COMPLETE, and COMPLETE_BIPARTITE for each n, followed by
/// `random_instances` ER_DIAM2 graphs cycling through the same sizes.
inline std::vector<NamedGraph> standard_corpus(const std::vector<std::size_t>& sizes, std::size_t random_instances,
                                               std::uint64_t seed) {
  std::vector<NamedGraph> corpus;
  for (std::size_t n : sizes) {
    corpus.push_back({"star(" + std::to_string(n) + ")", generate({Family::Star, n}, seed)});
    corpus.push_back({"wheel(" + std::to_string(n) + ")", generate({Family::Wheel, n}, seed)});
    corpus.push_back({"complete(" + std::to_string(n) + ")", generate({Family::Complete, n}, seed)});
    const std::size_t a = std::max<std::size_t>(1, n / 4);
    corpus.push_back({"bipartite(" + std::to_string(a) + "," + std::to_string(n - a) + ")",
                      generate({Family::CompleteBipartite, 0, a, n - a}, seed)});
  }
  for (std::size_t k = 0; k < random_instances && !sizes.empty(); ++k) {
    const std::size_t n = sizes[k % sizes.size()];
    SplitMix64 rng{derive_seed(seed, 0x6572ULL, k)};
    corpus.push_back({"er(" + std::to_string(n) + ")#" + std::to_string(k), generate({Family::ErDiam2, n}, rng)});
  }
  return corpus;
}

}  // namespace d2le
