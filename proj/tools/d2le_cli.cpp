// Command-line driver: Monte Carlo runs, scaling sweeps, deterministic bound
// checks, and oracle cross-checks.
//
// Exit status: 0 clean, 1 contract/bound/oracle violation, 2 usage or I/O error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "d2le/analysis.hpp"
#include "d2le/graph.hpp"
#include "d2le/harness.hpp"
#include "d2le/json_io.hpp"
#include "d2le/oracle.hpp"

namespace {

struct Flags {
  std::string graph = "complete";
  std::vector<std::size_t> n;
  std::size_t a = 0;
  std::size_t b = 0;
  std::optional<double> p;
  std::vector<std::string> files;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
  std::string format = "csv";
  std::string out;
  std::string config;
  std::size_t max_degree = std::size_t{1} << 20;
  bool verbose = false;
};

void add_graph_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--graph", f.graph, "family: complete, star, wheel, bipartite, er")
      ->check(CLI::IsMember({"complete", "star", "wheel", "bipartite", "er"}));
  cmd->add_option("--n", f.n, "node count (comma-separated list for sweep)")->delimiter(',');
  cmd->add_option("--a", f.a, "bipartite part A size");
  cmd->add_option("--b", f.b, "bipartite part B size");
  cmd->add_option("--p", f.p, "ER edge probability");
  cmd->add_option("--file", f.files, "edge-list file");
  cmd->add_option("--seed", f.seed, "64-bit base seed");
}

void add_run_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--trials", f.trials, "trials per point")->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", f.out, "output path (default stdout)");
  cmd->add_option("--config", f.config, "JSON config; flags given on the command line win");
}

d2le::ExperimentConfig make_config(const Flags& f, const CLI::App& cmd) {
  d2le::ExperimentConfig c;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw std::runtime_error("cannot open config: " + f.config);
    c = d2le::config_from_json(nlohmann::json::parse(in));
  }
  auto given = [&](const char* name) { return cmd.get_option_no_throw(name) && cmd.count(name) > 0; };
  if (f.config.empty() || given("--graph")) c.graph.family = *d2le::parse_family(f.graph);
  if (given("--n")) {
    c.n_values = f.n;
    c.graph.n = f.n.front();
  }
  if (given("--a")) c.graph.a = f.a;
  if (given("--b")) c.graph.b = f.b;
  if (f.p) c.graph.p = f.p;
  if (!f.files.empty()) c.file = f.files.front();
  if (f.config.empty() || given("--trials")) c.trials = f.trials;
  if (f.config.empty() || given("--seed")) c.seed = f.seed;
  if (f.config.empty() || given("--jobs")) c.jobs = f.jobs;
  if (f.config.empty() || given("--format"))
    c.format = f.format == "json" ? d2le::OutputFormat::Json : d2le::OutputFormat::Csv;
  if (given("--out")) c.out = f.out;
  return c;
}

void emit(const d2le::ExperimentConfig& c, const std::vector<d2le::TrialReport>& rows, bool sweep) {
  std::ofstream file;
  if (c.out) {
    file.open(*c.out, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + *c.out);
  }
  std::ostream& os = c.out ? static_cast<std::ostream&>(file) : std::cout;
  if (c.format == d2le::OutputFormat::Json)
    os << nlohmann::json(rows).dump(2) << '\n';
  else
    d2le::write_csv(os, rows, sweep);
  if (!os) throw std::runtime_error("write failed");
}

int report_safety(const std::vector<d2le::TrialReport>& rows) {
  int status = 0;
  for (const auto& r : rows) {
    if (r.safe()) continue;
    std::cerr << "VIOLATION " << r.family << "(" << r.n << "): multiple_leaders=" << r.multiple_leaders
              << " wrong_leader=" << r.wrong_leader << " message_identity=" << r.message_identity_violations
              << " rounds=" << r.round_violations << '\n';
    status = 1;
  }
  return status;
}

int cmd_run(const Flags& f, const CLI::App& cmd) {
  auto c = make_config(f, cmd);
  const std::vector<d2le::TrialReport> rows{d2le::run_trials(c)};
  emit(c, rows, false);
  return report_safety(rows);
}

int cmd_sweep(const Flags& f, const CLI::App& cmd) {
  auto c = make_config(f, cmd);
  if (c.n_values.empty()) throw CLI::ValidationError("--n", "sweep needs a list of n values");
  const auto rows = d2le::scaling_sweep(c);
  emit(c, rows, true);
  return report_safety(rows);
}

int cmd_verify_bounds(const Flags& f) {
  std::vector<d2le::NamedGraph> corpus;
  if (f.files.empty()) {
    corpus = d2le::standard_corpus({8, 16, 32, 64, 128, 256, 512, 1024, 2048}, 50, f.seed);
  } else {
    for (const auto& path : f.files) {
      std::ifstream in(path);
      if (!in) throw std::runtime_error("cannot open edge list: " + path);
      corpus.push_back({path, d2le::load_edge_list(in)});
    }
  }
  const auto result = d2le::verify_bounds(corpus);
  for (const auto& c : result.checks) {
    if (c.passed && !f.verbose) continue;
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.graph << ' ' << c.check;
    if (c.bucket) std::cout << " bucket=" << c.bucket;
    std::cout << " value=" << d2le::format_double(c.value) << " bound=" << d2le::format_double(c.bound) << '\n';
  }
  std::size_t violations = result.violations;
  if (auto d = d2le::first_degree_chain_violation(f.max_degree)) {
    std::cout << "FAIL degree_chain d=" << *d << '\n';
    ++violations;
  }
  if (auto n = d2le::first_case3_cap_violation(f.max_degree)) {
    std::cout << "FAIL case3_cap_sum n=" << *n << '\n';
    ++violations;
  }
  std::cout << "verify-bounds: " << corpus.size() << " graphs, " << result.checks.size()
            << " graph checks, degree chain and case III sum up to " << f.max_degree << ", " << violations
            << " violations\n";
  return violations == 0 ? 0 : 1;
}

int cmd_oracle_check(const Flags& f, const CLI::App& cmd) {
  std::vector<d2le::NamedGraph> corpus;
  if (!f.files.empty() || cmd.count("--n") > 0) {
    auto c = make_config(f, cmd);
    corpus.push_back({c.file ? *c.file : std::string(d2le::to_string(c.graph.family)), d2le::config_graph(c)});
  } else {
    using d2le::Family;
    corpus.push_back({"K2", d2le::generate({Family::Complete, 2}, f.seed)});
    corpus.push_back({"P3", d2le::load_edge_list("3 2\n0 1\n1 2\n")});
    corpus.push_back({"K4", d2le::generate({Family::Complete, 4}, f.seed)});
    corpus.push_back({"star(6)", d2le::generate({Family::Star, 6}, f.seed)});
    corpus.push_back({"wheel(8)", d2le::generate({Family::Wheel, 8}, f.seed)});
    for (std::uint64_t k = 0; k < 5; ++k) {
      d2le::SplitMix64 rng{d2le::derive_seed(f.seed, k)};
      corpus.push_back({"er(10)#" + std::to_string(k), d2le::generate({Family::ErDiam2, 10, 0, 0, 0.5}, rng)});
    }
  }
  int status = 0;
  for (const auto& [name, g] : corpus) {
    d2le::SplitMix64 id_rng{d2le::derive_seed(f.seed, 0x6964ULL)};
    const auto ids = d2le::IdAssignment::random_permutation(g.node_count(), id_rng);
    const auto law = d2le::enumerate_exact(g, ids);
    const auto report = d2le::cross_check_protocol(g, ids, f.trials, f.seed, &law);
    const double closed = d2le::exact_expected_messages(g);
    const bool expectation_ok = std::abs(law.expected_messages - closed) <= 1e-9 * std::abs(closed);
    std::cout << (report.ok() && expectation_ok ? "PASS " : "FAIL ") << name << " trials=" << report.trials
              << " discrepancies=" << report.discrepancies << " E_enum=" << d2le::format_double(law.expected_messages)
              << " E_closed=" << d2le::format_double(closed);
    if (report.first_trial) std::cout << " first_trial=" << *report.first_trial << " (" << report.first_description << ")";
    std::cout << '\n';
    if (!report.ok() || !expectation_ok) status = 1;
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomized leader election in diameter-two networks: simulation and bound checks"};
  app.require_subcommand(1);
  Flags flags;

  auto* run = app.add_subcommand("run", "Monte Carlo trials on one graph");
  add_graph_flags(run, flags);
  add_run_flags(run, flags);

  auto* sweep = app.add_subcommand("sweep", "one run per n value");
  add_graph_flags(sweep, flags);
  add_run_flags(sweep, flags);

  auto* verify = app.add_subcommand("verify-bounds", "deterministic bound checks over a graph corpus");
  verify->add_option("--file", flags.files, "edge-list files (default: built-in corpus)");
  verify->add_option("--seed", flags.seed, "seed for the random part of the built-in corpus");
  verify->add_option("--max-degree", flags.max_degree, "range for the degree chain and case III sum checks");
  verify->add_flag("--verbose", flags.verbose, "list passing checks too");

  auto* oracle = app.add_subcommand("oracle-check", "cross-check simulation against subset enumeration");
  add_graph_flags(oracle, flags);
  oracle->add_option("--trials", flags.trials, "trials per graph")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(flags, *run);
    if (sweep->parsed()) return cmd_sweep(flags, *sweep);
    if (verify->parsed()) return cmd_verify_bounds(flags);
    if (oracle->parsed()) return cmd_oracle_check(flags, *oracle);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
