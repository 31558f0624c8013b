#pragma once

#include <nlohmann/json.hpp>

#include "d2le/analysis.hpp"
#include "d2le/harness.hpp"
#include "d2le/oracle.hpp"

namespace d2le {

inline void to_json(nlohmann::json& j, const BucketStats& b) {
  j = nlohmann::json{{"i", b.index},
                     {"n_i", b.count},
                     {"members", b.members},
                     {"exact_expected_candidates", b.expected_candidates},
                     {"lemma1_bound", b.lemma_bound ? nlohmann::json(*b.lemma_bound) : nlohmann::json(nullptr)},
                     {"case", to_string(b.bucket_case)},
                     {"case_message_cap", b.case_cap}};
}

inline void to_json(nlohmann::json& j, const BoundReport& r) {
  j = nlohmann::json{{"n", r.n},
                     {"exact_expected_messages", r.exact_expected_messages},
                     {"expectation_upper", r.expectation_upper},
                     {"tail_threshold", r.tail_threshold},
                     {"case1_cap", r.case1_cap},
                     {"case2_cap_sum", r.case2_cap_sum},
                     {"case3_cap_sum", r.case3_cap_sum},
                     {"no_candidate_probability", r.no_candidate_probability},
                     {"buckets", r.buckets}};
}

inline void to_json(nlohmann::json& j, const ExactLaw& law) {
  auto distribution = nlohmann::json::array();
  for (auto [messages, prob] : law.message_distribution) distribution.push_back({messages, prob});
  auto winners = nlohmann::json::array();
  for (const auto& w : law.winner_map) winners.push_back(w ? nlohmann::json(*w) : nlohmann::json(nullptr));
  j = nlohmann::json{{"n", law.n},
                     {"expected_messages", law.expected_messages},
                     {"success_probability", law.success_probability},
                     {"message_distribution", distribution},
                     {"winner_map", winners}};
}

inline void to_json(nlohmann::json& j, const TrialReport& r) {
  auto buckets = nlohmann::json::array();
  for (const auto& b : r.buckets)
    buckets.push_back({{"i", b.index},
                       {"n_i", b.count},
                       {"mean_candidates", b.mean_candidates},
                       {"exact_expected_candidates", b.exact_expected}});
  auto rounds = nlohmann::json::object();
  for (auto [round, count] : r.rounds_histogram) rounds[std::to_string(round)] = count;
  j = nlohmann::json{{"n", r.n},
                     {"family", r.family},
                     {"trials", r.trials},
                     {"mean_msgs", r.mean_messages},
                     {"stddev_msgs", r.stddev_messages},
                     {"max_msgs", r.max_messages},
                     {"exact_E_msgs", r.exact_expected_messages},
                     {"expectation_upper", r.expectation_upper},
                     {"tail_threshold", r.tail_threshold},
                     {"tail_exceed", r.tail_exceedances},
                     {"failures", r.failures},
                     {"exact_fail_prob", r.exact_failure_probability},
                     {"fail_lo95", r.failure_interval.lo},
                     {"fail_hi95", r.failure_interval.hi},
                     {"normalized_msgs", r.normalized_mean()},
                     {"rounds_histogram", rounds},
                     {"buckets", buckets},
                     {"violations",
                      {{"multiple_leaders", r.multiple_leaders},
                       {"wrong_leader", r.wrong_leader},
                       {"message_identity", r.message_identity_violations},
                       {"rounds", r.round_violations}}}};
}

/// Reads an ExperimentConfig. Keys mirror the CLI flags; absent keys keep
/// their defaults.
inline ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {}) {
  if (j.contains("graph")) {
    const auto name = j.at("graph").get<std::string>();
    const auto family = parse_family(name);
    if (!family) throw std::invalid_argument("unknown graph family: " + name);
    base.graph.family = *family;
  }
  if (j.contains("n")) {
    if (j.at("n").is_array()) {
      base.n_values = j.at("n").get<std::vector<std::size_t>>();
      if (!base.n_values.empty()) base.graph.n = base.n_values.front();
    } else {
      base.graph.n = j.at("n").get<std::size_t>();
    }
  }
  if (j.contains("a")) base.graph.a = j.at("a").get<std::size_t>();
  if (j.contains("b")) base.graph.b = j.at("b").get<std::size_t>();
  if (j.contains("p")) base.graph.p = j.at("p").get<double>();
  if (j.contains("file")) base.file = j.at("file").get<std::string>();
  if (j.contains("trials")) base.trials = j.at("trials").get<std::size_t>();
  if (j.contains("seed")) base.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("jobs")) base.jobs = j.at("jobs").get<unsigned>();
  if (j.contains("format")) {
    const auto f = j.at("format").get<std::string>();
    if (f == "csv") base.format = OutputFormat::Csv;
    else if (f == "json") base.format = OutputFormat::Json;
    else throw std::invalid_argument("unknown format: " + f);
  }
  if (j.contains("out")) base.out = j.at("out").get<std::string>();
  return base;
}

}  // namespace d2le
