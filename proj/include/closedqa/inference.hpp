#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "closedqa/corpus.hpp"
#include "closedqa/embedding.hpp"
#include "closedqa/qlearn.hpp"
#include "closedqa/text.hpp"
#include "json.hpp"

namespace closedqa {

struct InferenceConfig {
  std::size_t top_k = 10;
  double lambda = 0.7;  // weight of similarity against the normalized Q-value
  double tier_hi = 0.8;
  double tier_lo = 0.5;

  void validate() const;

  bool operator==(const InferenceConfig&) const = default;
};

enum class Confidence { relevant, fairly_relevant, not_relevant };

std::string to_string(Confidence c);
Confidence confidence_from_string(std::string_view name);

// Above tier_hi is relevant, [tier_lo, tier_hi] fairly relevant, below not.
Confidence confidence_tier(double similarity, const InferenceConfig& cfg);

// Everything answer_query needs. A default constructed Engine is "not loaded".
struct Engine {
  std::vector<QARecord> corpus;
  CleaningConfig cleaning;
  EmbeddingConfig embedding;
  std::shared_ptr<const EmbeddingProvider> embedder;
  VectorIndex index;
  QTable qtable;
  RewardSpec reward;
  TrainingConfig training;
  TrainingReport training_report;
  InferenceConfig inference;

  bool loaded() const { return embedder != nullptr && !corpus.empty(); }

  // ConsistencyError unless corpus, index and Q-table sizes agree and ids line up.
  void validate() const;
};

struct InferenceResult {
  std::string answer_id;
  std::string answer_text;
  std::string matched_question_id;
  std::string matched_question_text;
  double similarity = 0.0;         // top-1 question similarity
  double answer_similarity = 0.0;  // similarity to the chosen answer's question
  double q_value = 0.0;            // Q(matched state, chosen action)
  double blended_score = 0.0;
  Confidence confidence = Confidence::not_relevant;
  double latency_ms = 0.0;
};

// Every field except latency_ms, which is a wall-clock measurement.
bool same_outcome(const InferenceResult& a, const InferenceResult& b);

void to_json(nlohmann::json& j, const InferenceResult& r);

// Embeds the question, takes the top_k index matches as candidate answers and
// scores each as lambda * similarity + (1 - lambda) * Q(s*, a) min-max
// normalized over the candidates, where s* is the best match. Ties go to the
// lower corpus position. Confidence comes from the top-1 similarity.
InferenceResult answer_query(std::string_view question, const Engine& engine,
                             const InferenceConfig& cfg);

void to_json(nlohmann::json& j, const InferenceConfig& cfg);
void from_json(const nlohmann::json& j, InferenceConfig& cfg);

}  // namespace closedqa
