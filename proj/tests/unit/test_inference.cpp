#include <algorithm>
#include <cmath>

#include "closedqa/error.hpp"
#include "closedqa/inference.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace closedqa;
using closedqa::testing::make_record;

namespace {

// Four records on fixed 3-dim vectors with a hand-set Q-table.
Engine toy_engine() {
  auto provider = std::make_shared<closedqa::testing::TableEmbedder>(
      std::map<std::string, std::vector<double>>{{"alpha", {1, 0, 0}},
                                                 {"beta", {0.9, 0.435889894354, 0}},
                                                 {"gamma", {0.6, 0.8, 0}},
                                                 {"delta", {0, 0, 1}},
                                                 {"query", {0.95, 0.3122498999, 0}},
                                                 {"far", {0.42, -0.6, -0.68}}});
  Engine e;
  e.corpus = {make_record("a", "alpha", "answer a"), make_record("b", "beta", "answer b"),
              make_record("c", "gamma", "answer c"), make_record("d", "delta", "answer d")};
  e.embedder = provider;
  e.index = build_index(e.corpus, *provider);
  e.qtable = QTable(4, 4);
  return e;
}

}  // namespace

TEST_CASE("confidence_tier examples") {
  const InferenceConfig cfg;
  CHECK(confidence_tier(0.9, cfg) == Confidence::relevant);
  CHECK(confidence_tier(0.8, cfg) == Confidence::fairly_relevant);
  CHECK(confidence_tier(0.65, cfg) == Confidence::fairly_relevant);
  CHECK(confidence_tier(0.5, cfg) == Confidence::fairly_relevant);
  CHECK(confidence_tier(0.42, cfg) == Confidence::not_relevant);
  CHECK(confidence_tier(0.1, cfg) == Confidence::not_relevant);
  CHECK(to_string(Confidence::fairly_relevant) == "fairly_relevant");
  CHECK(confidence_from_string("relevant") == Confidence::relevant);
}

TEST_CASE("InferenceConfig validation") {
  InferenceConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.top_k = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.lambda = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.tier_lo = 0.9;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("blend with an all-zero Q row is pure similarity") {
  const auto e = toy_engine();
  const auto r = answer_query("query", e, InferenceConfig{});
  CHECK(r.matched_question_id == "b");  // 0.95*0.9+0.312*0.436 ~ 0.991
  CHECK(r.answer_id == "b");
  CHECK(r.q_value == 0.0);
  CHECK(r.blended_score == doctest::Approx(0.7 * r.similarity).epsilon(1e-12));
  CHECK(r.confidence == Confidence::relevant);
}

TEST_CASE("Q-values can move the answer within the candidate set") {
  auto e = toy_engine();
  // s* = b (position 1). Prefer c strongly.
  e.qtable.set(1, 2, 5.0);
  e.qtable.set(1, 1, 1.0);
  InferenceConfig cfg;
  const auto r = answer_query("query", e, cfg);
  const double sim_b = cosine_similarity(e.index.vector(1), normalized({0.95, 0.3122498999, 0}));
  const double sim_c = cosine_similarity(e.index.vector(2), normalized({0.95, 0.3122498999, 0}));
  // min over the candidates is 0 (a and d unwritten), max is 5
  const double blend_b = 0.7 * sim_b + 0.3 * (1.0 / 5.0);
  const double blend_c = 0.7 * sim_c + 0.3 * 1.0;
  REQUIRE(blend_c > blend_b);
  CHECK(r.answer_id == "c");
  CHECK(r.matched_question_id == "b");
  CHECK(r.blended_score == doctest::Approx(blend_c).epsilon(1e-12));
  CHECK(r.q_value == 5.0);
  CHECK(r.answer_similarity == doctest::Approx(sim_c).epsilon(1e-12));
  CHECK(r.similarity == doctest::Approx(sim_b).epsilon(1e-12));

  cfg.lambda = 1.0;
  CHECK(answer_query("query", e, cfg).answer_id == "b");

  cfg.lambda = 0.7;
  cfg.top_k = 1;
  CHECK(answer_query("query", e, cfg).answer_id == "b");
}

TEST_CASE("property: positive scaling of Q does not change the answer") {
  auto e = toy_engine();
  e.qtable.set(1, 0, 0.3);
  e.qtable.set(1, 2, 0.9);
  e.qtable.set(1, 3, -0.2);
  const auto base = answer_query("query", e, InferenceConfig{});
  for (double k : {0.001, 0.5, 3.0, 1000.0}) {
    auto scaled = e;
    QTable q(4, 4);
    for (std::size_t s = 0; s < 4; ++s)
      for (const auto& [a, v] : e.qtable.row(s)) q.set(s, a, v * k);
    scaled.qtable = q;
    CHECK(answer_query("query", scaled, InferenceConfig{}).answer_id == base.answer_id);
  }
}

TEST_CASE("low similarity gives not_relevant regardless of the answer") {
  const auto e = toy_engine();
  const auto r = answer_query("far", e, InferenceConfig{});
  CHECK(r.matched_question_id == "a");
  CHECK(r.similarity == doctest::Approx(0.42).epsilon(1e-3));
  CHECK(r.confidence == Confidence::not_relevant);
  CHECK(r.confidence == confidence_tier(r.similarity, InferenceConfig{}));
}

TEST_CASE("errors: unloaded engine and degenerate question") {
  Engine empty;
  CHECK_THROWS_AS(answer_query("alpha", empty, InferenceConfig{}), StateError);
  const auto e = toy_engine();
  CHECK_THROWS_AS(answer_query("?!", e, InferenceConfig{}), DegenerateInputError);
}

TEST_CASE("fixture: training questions answer themselves") {
  const auto engine = closedqa::testing::fixture_engine();
  for (const auto& r : engine->corpus) {
    const auto res = answer_query(r.question, *engine, engine->inference);
    CHECK(res.answer_id == r.id);
    CHECK(res.similarity == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(res.confidence == Confidence::relevant);
    CHECK(engine->index.position_of(res.answer_id).has_value());
  }
}

TEST_CASE("fixture: lambda 1 equals the index top-1") {
  const auto engine = closedqa::testing::fixture_engine();
  InferenceConfig cfg = engine->inference;
  cfg.lambda = 1.0;
  // partial questions so that the top-1 is not trivially a perfect match
  std::vector<std::string> qs;
  for (const std::size_t i : {0, 17, 43, 88, 120, 151}) {
    const auto words = split_whitespace(engine->corpus[i].question);
    std::string q;
    for (std::size_t k = 1; k < std::min<std::size_t>(words.size(), 5); ++k) q += words[k] + " ";
    qs.push_back(q);
  }
  for (const auto& q : qs) {
    const auto res = answer_query(q, *engine, cfg);
    const auto top = engine->index.query(engine->embedder->embed_text(q), 1);
    CHECK(res.answer_id == top[0].id);
    const auto again = answer_query(q, *engine, engine->inference);
    CHECK(same_outcome(again, answer_query(q, *engine, engine->inference)));
  }
}

TEST_CASE("engine validate catches inconsistencies") {
  auto e = toy_engine();
  CHECK_NOTHROW(e.validate());
  e.qtable = QTable(3, 3);
  CHECK_THROWS_AS(e.validate(), ConsistencyError);
}
