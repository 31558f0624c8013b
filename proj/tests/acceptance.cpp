// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "d2le/analysis.hpp"
#include "d2le/harness.hpp"
#include "d2le/oracle.hpp"
#include "support/bfs_oracle.hpp"

namespace {

using namespace d2le;
using Clock = std::chrono::steady_clock;

const unsigned kJobs = std::max(1U, std::thread::hardware_concurrency());

// Contract counters over every Monte Carlo run in this suite.
struct Totals {
  std::uint64_t elections = 0;
  std::uint64_t multiple_leaders = 0;
  std::uint64_t wrong_leader = 0;
  std::uint64_t identity = 0;
  std::uint64_t rounds = 0;
  std::uint64_t rounds_at_two = 0;

  void add(const TrialReport& r) {
    elections += r.trials;
    multiple_leaders += r.multiple_leaders;
    wrong_leader += r.wrong_leader;
    identity += r.message_identity_violations;
    rounds += r.round_violations;
    auto it = r.rounds_histogram.find(2);
    rounds_at_two += it == r.rounds_histogram.end() ? 0 : it->second;
  }
};

Totals totals;
int failures = 0;

TrialReport run(const GraphSpec& spec, std::size_t trials, std::uint64_t seed) {
  ExperimentConfig c;
  c.graph = spec;
  c.trials = trials;
  c.seed = seed;
  c.jobs = kJobs;
  auto r = run_trials(c);
  totals.add(r);
  return r;
}

void report(const char* id, bool pass, const std::string& detail, Clock::time_point start) {
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("%s %-3s %s [%.1fs]\n", pass ? "PASS" : "FAIL", id, detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++failures;
}

GraphSpec family_spec(Family f, std::size_t n) {
  if (f == Family::CompleteBipartite) return {f, 0, n / 4, n - n / 4};
  return {f, n};
}

// 1: safety and winner characterization over >= 1e5 elections.
void criterion_safety() {
  const auto start = Clock::now();
  const Totals before = totals;
  std::uint64_t seed = 100;
  for (Family f : {Family::Star, Family::Wheel, Family::Complete, Family::CompleteBipartite, Family::ErDiam2})
    for (std::size_t n : {8, 64, 256, 1024}) run(family_spec(f, n), 5000, seed++);
  const std::uint64_t elections = totals.elections - before.elections;
  const std::uint64_t multi = totals.multiple_leaders - before.multiple_leaders;
  const std::uint64_t wrong = totals.wrong_leader - before.wrong_leader;
  std::ostringstream d;
  d << "safety: " << elections << " elections over 5 families x n{8,64,256,1024}; multiple_leaders=" << multi
    << " wrong_leader=" << wrong;
  report("C1", elections >= 100000 && multi == 0 && wrong == 0, d.str(), start);
}

// 4: oracle equivalence on >= 20 small graphs.
void criterion_oracle() {
  const auto start = Clock::now();
  std::vector<std::pair<std::string, Graph>> graphs;
  graphs.push_back({"K2", generate({Family::Complete, 2}, 0)});
  graphs.push_back({"P3", testing::path_graph(3)});
  graphs.push_back({"K4", generate({Family::Complete, 4}, 0)});
  graphs.push_back({"star6", generate({Family::Star, 6}, 0)});
  graphs.push_back({"C5", testing::cycle_graph(5)});
  for (std::size_t n : {6, 8, 12}) graphs.push_back({"K" + std::to_string(n), generate({Family::Complete, n}, 0)});
  for (std::size_t n = 5; n <= 12; ++n) graphs.push_back({"wheel" + std::to_string(n), generate({Family::Wheel, n}, 0)});
  graphs.push_back({"K2,3", generate({Family::CompleteBipartite, 0, 2, 3}, 0)});
  graphs.push_back({"K3,4", generate({Family::CompleteBipartite, 0, 3, 4}, 0)});
  graphs.push_back({"K4,8", generate({Family::CompleteBipartite, 0, 4, 8}, 0)});
  SplitMix64 rng{4242};
  for (std::size_t n : {8, 9, 10, 11, 12, 12}) graphs.push_back({"er" + std::to_string(n), generate({Family::ErDiam2, n, 0, 0, 0.5}, rng)});

  std::size_t discrepancies = 0;
  std::size_t expectation_misses = 0;
  std::string first;
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    const auto& [name, g] = graphs[k];
    SplitMix64 id_rng{derive_seed(77, k)};
    const auto ids = IdAssignment::random_permutation(g.node_count(), id_rng);
    const auto law = enumerate_exact(g, ids);
    const auto cross = cross_check_protocol(g, ids, 10000, 500 + k, &law);
    totals.elections += cross.trials;
    discrepancies += cross.discrepancies;
    if (!cross.ok() && first.empty()) first = name + ": " + cross.first_description;
    const double closed = exact_expected_messages(g);
    if (!(std::abs(law.expected_messages - closed) <= 1e-9 * closed)) {
      ++expectation_misses;
      if (first.empty()) first = name + ": enumerated expectation differs";
    }
  }
  std::ostringstream d;
  d << "oracle: " << graphs.size() << " graphs (n<=12) x 1e4 trials; discrepancies=" << discrepancies
    << " expectation_mismatches(>1e-9 rel)=" << expectation_misses << (first.empty() ? "" : " first=" + first);
  report("C4", graphs.size() >= 20 && discrepancies == 0 && expectation_misses == 0, d.str(), start);
}

// 5 and 6 (deterministic half): bucket lemma, degree chain, expectation bound.
void criterion_bounds() {
  auto start = Clock::now();
  const auto corpus = standard_corpus({8, 16, 32, 64, 128, 256, 512, 1024, 2048}, 50, 2718);
  const auto result = verify_bounds(corpus);
  std::size_t lemma_checks = 0, lemma_fail = 0, exp_checks = 0, exp_fail = 0;
  for (const auto& c : result.checks) {
    if (c.check == "lemma_bucket") {
      ++lemma_checks;
      lemma_fail += !c.passed;
    } else if (c.check == "expectation") {
      ++exp_checks;
      exp_fail += !c.passed;
    }
  }
  const auto chain = first_degree_chain_violation(std::size_t{1} << 20);
  std::ostringstream d;
  d << "lemma: " << corpus.size() << " graphs (n<=2048, 50 random), " << lemma_checks
    << " bucket checks, violations=" << lemma_fail << "; degree chain d<=2^20 "
    << (chain ? "violated at d=" + std::to_string(*chain) : std::string("holds"));
  report("C5", lemma_fail == 0 && !chain && lemma_checks > 0, d.str(), start);

  start = Clock::now();
  const auto k256 = run({Family::Complete, 256}, 10000, 256);
  const double z = std::abs(k256.mean_messages - k256.exact_expected_messages) / k256.standard_error();
  std::ostringstream e;
  e << "expectation: " << exp_checks << " corpus graphs, violations=" << exp_fail << "; K256 mean "
    << format_double(k256.mean_messages) << " vs exact " << format_double(k256.exact_expected_messages) << " ("
    << format_double(z) << " stderr, limit 4)";
  report("C6", exp_fail == 0 && exp_checks == corpus.size() && z <= 4.0, e.str(), start);
}

// 7: zero tail exceedances at n = 1024.
void criterion_tail() {
  const auto start = Clock::now();
  const auto complete = run({Family::Complete, 1024}, 10000, 7001);
  const auto er = run({Family::ErDiam2, 1024}, 10000, 7002);
  std::ostringstream d;
  d << "tail: threshold " << format_double(complete.tail_threshold) << "; K1024 max=" << complete.max_messages
    << " exceed=" << complete.tail_exceedances << "; ER1024 max=" << er.max_messages
    << " exceed=" << er.tail_exceedances;
  report("C7",
         complete.tail_threshold == 870400.0 && complete.tail_exceedances == 0 && er.tail_exceedances == 0,
         d.str(), start);
}

// 8: failure rate vs exact no-candidate probability.
void criterion_failure_rate() {
  const auto start = Clock::now();
  bool pass = true;
  std::ostringstream d;
  d << "failure rate:";
  std::uint64_t seed = 8000;
  for (std::size_t n : {64, 256, 1024}) {
    const auto r = run({Family::Complete, n}, 100000, seed++);
    const bool in = r.failure_interval.contains(r.exact_failure_probability);
    pass = pass && in;
    d << " K" << n << " " << r.failures << "/1e5 exact=" << format_double(r.exact_failure_probability) << " in ["
      << format_double(r.failure_interval.lo) << "," << format_double(r.failure_interval.hi) << "]"
      << (in ? "" : "(MISS)") << ";";
  }
  std::uint64_t forced = 0;
  for (Family f : {Family::Star, Family::Wheel})
    for (std::size_t n : {64, 256, 1024}) forced += run({f, n}, 100000, seed++).failures;
  pass = pass && forced == 0;
  d << " star/wheel failures=" << forced;
  report("C8", pass, d.str(), start);
}

// 9: byte-identical sweep output and the time budget.
void criterion_determinism_and_scale() {
  ExperimentConfig c;
  c.graph.family = Family::Complete;
  c.n_values = {64, 128, 256, 512, 1024, 2048, 4096};
  c.trials = 1000;
  c.seed = 9;
  c.jobs = 1;
  auto start = Clock::now();
  const auto rows = scaling_sweep(c);
  const double serial_secs = std::chrono::duration<double>(Clock::now() - start).count();
  for (const auto& r : rows) totals.add(r);
  const std::string first = csv_text(rows, true);
  c.jobs = kJobs;
  const auto again = scaling_sweep(c);
  for (const auto& r : again) totals.add(r);
  const std::string second = csv_text(again, true);

  ExperimentConfig er = c;
  er.graph.family = Family::ErDiam2;
  er.n_values = {64, 256, 1024};
  er.trials = 500;
  const bool er_same = csv_text(scaling_sweep(er), true) == csv_text(scaling_sweep(er), true);

  std::ostringstream d;
  d << "determinism/scale: complete sweep n=64..4096 x 1e3 in " << format_double(serial_secs)
    << "s (limit 300), rerun byte-identical=" << (first == second) << ", ER sweep rerun identical=" << er_same;
  report("C9", first == second && er_same && serial_secs < 300.0, d.str(), start);
}

// 2 and 3 summarize every Monte Carlo run above.
void criterion_rounds_and_identity() {
  const auto now = Clock::now();
  std::ostringstream r;
  r << "rounds: " << totals.elections << " elections, round_violations=" << totals.rounds;
  report("C2", totals.rounds == 0, r.str(), now);
  std::ostringstream m;
  m << "message identity (total = 2 * candidate degree sum): violations=" << totals.identity;
  report("C3", totals.identity == 0, m.str(), now);
}

}  // namespace

int main() {
  std::printf("acceptance suite, %u worker(s)\n", kJobs);
  try {
    criterion_safety();
    criterion_oracle();
    criterion_bounds();
    criterion_tail();
    criterion_failure_rate();
    criterion_determinism_and_scale();
    criterion_rounds_and_identity();
  } catch (const std::exception& e) {
    std::printf("FAIL aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
