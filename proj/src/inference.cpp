#include "closedqa/inference.hpp"

#include <algorithm>
#include <chrono>

#include "closedqa/error.hpp"

namespace closedqa {

void InferenceConfig::validate() const {
  if (top_k == 0) throw ConfigError("top_k must be at least 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must be in [0, 1]");
  if (!(tier_lo > 0.0 && tier_lo < tier_hi && tier_hi <= 1.0)) {
    throw ConfigError("tier thresholds must satisfy 0 < lo < hi <= 1");
  }
}

std::string to_string(Confidence c) {
  switch (c) {
    case Confidence::relevant: return "relevant";
    case Confidence::fairly_relevant: return "fairly_relevant";
    case Confidence::not_relevant: return "not_relevant";
  }
  return "not_relevant";
}

Confidence confidence_from_string(std::string_view name) {
  if (name == "relevant") return Confidence::relevant;
  if (name == "fairly_relevant") return Confidence::fairly_relevant;
  if (name == "not_relevant") return Confidence::not_relevant;
  throw SchemaError("unknown confidence tier '" + std::string(name) + "'");
}

Confidence confidence_tier(double similarity, const InferenceConfig& cfg) {
  if (similarity > cfg.tier_hi) return Confidence::relevant;
  if (similarity >= cfg.tier_lo) return Confidence::fairly_relevant;
  return Confidence::not_relevant;
}

void Engine::validate() const {
  const auto n = corpus.size();
  if (index.size() != n) {
    throw ConsistencyError("index has " + std::to_string(index.size()) + " entries, corpus " +
                           std::to_string(n));
  }
  if (qtable.n_states() != n || qtable.n_actions() != n) {
    throw ConsistencyError("Q-table is " + std::to_string(qtable.n_states()) + "x" +
                           std::to_string(qtable.n_actions()) + ", corpus has " +
                           std::to_string(n) + " records");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (index.id(i) != corpus[i].id) {
      throw ConsistencyError("index entry " + std::to_string(i) + " is '" + index.id(i) +
                             "', corpus record is '" + corpus[i].id + "'");
    }
  }
  if (embedder && embedder->dim() != index.dim()) {
    throw ConsistencyError("embedder dim differs from index dim");
  }
}

bool same_outcome(const InferenceResult& a, const InferenceResult& b) {
  return a.answer_id == b.answer_id && a.answer_text == b.answer_text &&
         a.matched_question_id == b.matched_question_id &&
         a.matched_question_text == b.matched_question_text && a.similarity == b.similarity &&
         a.answer_similarity == b.answer_similarity && a.q_value == b.q_value &&
         a.blended_score == b.blended_score && a.confidence == b.confidence;
}

void to_json(nlohmann::json& j, const InferenceResult& r) {
  j = nlohmann::json{{"answer_id", r.answer_id},
                     {"answer", r.answer_text},
                     {"matched_question_id", r.matched_question_id},
                     {"matched_question", r.matched_question_text},
                     {"similarity", r.similarity},
                     {"answer_similarity", r.answer_similarity},
                     {"q_value", r.q_value},
                     {"blended_score", r.blended_score},
                     {"confidence", to_string(r.confidence)},
                     {"latency_ms", r.latency_ms}};
}

InferenceResult answer_query(std::string_view question, const Engine& engine,
                             const InferenceConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  if (!engine.loaded()) throw StateError("no engine bundle is loaded");
  cfg.validate();
  if (clean_text(question, engine.cleaning).empty()) {
    throw DegenerateInputError("question is empty after cleaning");
  }

  const auto query = engine.embedder->embed_text(question);
  const auto hits = engine.index.query(query, cfg.top_k);
  const std::size_t state = hits.front().position;

  double q_min = 0.0;
  double q_max = 0.0;
  std::vector<double> q_values;
  q_values.reserve(hits.size());
  for (const auto& h : hits) {
    q_values.push_back(engine.qtable.get(state, h.position));
  }
  q_min = *std::min_element(q_values.begin(), q_values.end());
  q_max = *std::max_element(q_values.begin(), q_values.end());
  const double span = q_max - q_min;

  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t c = 0; c < hits.size(); ++c) {
    const double q_norm = span > 0.0 ? (q_values[c] - q_min) / span : 0.0;
    const double score = cfg.lambda * hits[c].score + (1.0 - cfg.lambda) * q_norm;
    const bool better = c == 0 || score > best_score ||
                        (score == best_score && hits[c].position < hits[best].position);
    if (better) {
      best = c;
      best_score = score;
    }
  }

  const auto& answer = engine.corpus[hits[best].position];
  const auto& matched = engine.corpus[state];
  InferenceResult r;
  r.answer_id = answer.id;
  r.answer_text = answer.answer;
  r.matched_question_id = matched.id;
  r.matched_question_text = matched.question;
  r.similarity = hits.front().score;
  r.answer_similarity = hits[best].score;
  r.q_value = q_values[best];
  r.blended_score = best_score;
  r.confidence = confidence_tier(r.similarity, cfg);
  r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                           started)
                     .count();
  return r;
}

void to_json(nlohmann::json& j, const InferenceConfig& cfg) {
  j = nlohmann::json{{"top_k", cfg.top_k},
                     {"lambda", cfg.lambda},
                     {"tier_hi", cfg.tier_hi},
                     {"tier_lo", cfg.tier_lo}};
}

void from_json(const nlohmann::json& j, InferenceConfig& cfg) {
  cfg.top_k = j.at("top_k").get<std::size_t>();
  cfg.lambda = j.at("lambda").get<double>();
  cfg.tier_hi = j.at("tier_hi").get<double>();
  cfg.tier_lo = j.at("tier_lo").get<double>();
  cfg.validate();
}

}  // namespace closedqa
