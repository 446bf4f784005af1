#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "closedqa/inference.hpp"
#include "json.hpp"

namespace closedqa {

// Nearest-rank percentile, p in (0, 100]. 0 for an empty sample.
double percentile(std::vector<double> sample, double p);

struct EvalScenario {
  std::string question;
  std::set<std::string> expected_ids;
  std::optional<std::string> note;

  bool operator==(const EvalScenario&) const = default;
};

std::vector<EvalScenario> read_scenarios(const std::filesystem::path& path);
void write_scenarios(const std::filesystem::path& path, std::span<const EvalScenario> scenarios);
std::string scenarios_to_jsonl(std::span<const EvalScenario> scenarios);

struct EvalReport {
  std::size_t n_scenarios = 0;
  std::size_t relevant = 0;
  std::size_t fairly_relevant = 0;
  std::size_t not_relevant = 0;
  std::size_t hits = 0;
  double semantic_accuracy = 0.0;  // relevant / n
  double hit_rate = 0.0;           // answer_id in expected_ids / n
  double latency_p50_ms = 0.0;
  double latency_p95_ms = 0.0;

  // Compares everything except the latency figures.
  bool same_outcome(const EvalReport& other) const;
};

void to_json(nlohmann::json& j, const EvalReport& report);

// Human readable summary table.
std::string format_report(const EvalReport& report);

// ValidationError, before any query runs, when an expected id is not in the
// engine corpus. A scenario whose question cannot be embedded counts as a
// not_relevant miss.
EvalReport run_eval(std::span<const EvalScenario> scenarios, const Engine& engine,
                    const InferenceConfig& cfg);

struct ParaphraseOptions {
  std::size_t per_question = 5;
  std::optional<std::size_t> questions;  // sample size; all records when unset
  double dropout = 0.15;
  std::map<std::string, std::string> synonyms;
  std::uint64_t seed = 42;
};

// Tab separated "token<TAB>replacement" per line.
std::map<std::string, std::string> load_synonyms(const std::filesystem::path& path);

// For each sampled record, per_question variants of its cleaned question:
// every non-stopword token is, with probability `dropout`, replaced by its
// synonym or dropped when it has none. A draw identical to the original is
// redrawn a bounded number of times before falling back to rotating the
// tokens by one place.
std::vector<EvalScenario> generate_paraphrases(std::span<const QARecord> corpus,
                                               const CleaningConfig& cleaning,
                                               const ParaphraseOptions& options);

}  // namespace closedqa
