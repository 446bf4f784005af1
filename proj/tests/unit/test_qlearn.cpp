#include <algorithm>
#include <cmath>
#include <random>

#include "closedqa/error.hpp"
#include "closedqa/qlearn.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace closedqa;

namespace {

double oracle_update(double q, double alpha, double gamma, double r, double m) {
  return q + alpha * (r + gamma * m - q);
}

// Small corpus embedded by the builtin embedder.
struct SmallWorld {
  std::vector<QARecord> corpus;
  VectorIndex index;
};

SmallWorld small_world(std::size_t n) {
  SmallWorld w;
  for (std::size_t i = 0; i < n; ++i) {
    w.corpus.push_back(closedqa::testing::make_record(
        "r" + std::to_string(i), closedqa::testing::filler_words(6, i), "answer"));
  }
  const auto embedder = BuiltinEmbedder::fit(w.corpus, EmbeddingConfig{}, CleaningConfig{});
  w.index = build_index(w.corpus, embedder);
  return w;
}

}  // namespace

TEST_CASE("q_update examples") {
  TrainingConfig cfg;
  QTable q(4, 4);
  CHECK(q_update(q, 0, 0, 0.0, std::nullopt, cfg) == 0.0);

  q.set(1, 3, 0.5);
  CHECK(q_update(q, 0, 1, 1.0, 1, cfg) == doctest::Approx(0.145).epsilon(1e-12));
  CHECK(q.get(0, 1) == doctest::Approx(0.145).epsilon(1e-12));

  TrainingConfig one;
  one.alpha = 1.0;
  q.set(2, 2, 1.0);
  CHECK(q_update(q, 2, 2, 1.0, std::nullopt, one) == 1.0);
}

TEST_CASE("q_update mutates a single entry and checks bounds") {
  TrainingConfig cfg;
  QTable q(3, 3);
  q.set(2, 0, -0.4);
  const auto before = q;
  q_update(q, 1, 2, 0.7, 2, cfg);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 0; a < 3; ++a)
      if (!(s == 1 && a == 2)) CHECK(q.get(s, a) == before.get(s, a));
  // max over row 2 counts the unwritten zeros
  CHECK(q.get(1, 2) == doctest::Approx(0.07).epsilon(1e-12));
  CHECK_THROWS_AS(q_update(q, 3, 0, 1.0, std::nullopt, cfg), ValidationError);
  CHECK_THROWS_AS(q_update(q, 0, 3, 1.0, std::nullopt, cfg), ValidationError);
  CHECK_THROWS_AS(q_update(q, 0, 0, 1.0, 7, cfg), ValidationError);
  CHECK_THROWS_AS(q.set(0, 0, INFINITY), NumericError);
}

TEST_CASE("property: q_update agrees with direct recomputation") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> u(-5, 5), unit(0, 1);
  std::uniform_int_distribution<std::size_t> idx(0, 7);
  QTable q(8, 8);
  for (int i = 0; i < 5000; ++i) {
    TrainingConfig cfg;
    cfg.alpha = std::max(1e-6, unit(gen));
    cfg.gamma = std::min(0.999, unit(gen));
    const auto s = idx(gen), a = idx(gen), sn = idx(gen);
    const bool terminal = unit(gen) < 0.2;
    const double r = u(gen);
    const double old = q.get(s, a);
    const double m = terminal ? 0.0 : q.max_value(sn);
    const double expect = oracle_update(old, cfg.alpha, cfg.gamma, r, m);
    const double got = q_update(q, s, a, r, terminal ? std::nullopt : std::optional(sn), cfg);
    CHECK(std::abs(got - expect) <= 1e-12 * std::max(1.0, std::abs(expect)));
  }
}

TEST_CASE("property: alpha = 0 is the identity") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-3, 3);
  QTable q(5, 5);
  for (std::size_t s = 0; s < 5; ++s)
    for (std::size_t a = 0; a < 5; ++a) q.set(s, a, u(gen));
  TrainingConfig cfg;
  cfg.alpha = 0.0;
  const auto before = q;
  for (int i = 0; i < 200; ++i) q_update(q, i % 5, (i * 3) % 5, u(gen), (i * 7) % 5, cfg);
  CHECK(q == before);
}

TEST_CASE("shape_reward rule and monotonicity") {
  const RewardSpec spec;
  CHECK(shape_reward(0.85, spec) == 1.0);
  CHECK(shape_reward(0.80, spec) == 0.80);
  CHECK(shape_reward(0.65, spec) == 0.65);
  CHECK(shape_reward(0.50, spec) == 0.50);
  CHECK(shape_reward(0.30, spec) == -0.1);
  double prev = -INFINITY;
  for (int i = 0; i <= 2000; ++i) {
    const double s = -1.0 + i * 1e-3;
    const double r = shape_reward(s, spec);
    CHECK(r >= prev);
    prev = r;
  }
  RewardSpec bad;
  bad.lo_threshold = 0.9;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(shape_reward(0.5, bad), ConfigError);
}

TEST_CASE("greedy_action tie-breaks") {
  QTable q(3, 6);
  CHECK(greedy_action(q, 0) == 0);
  q.set(1, 2, 0.9);
  q.set(1, 5, 0.9);
  CHECK(greedy_action(q, 1) == 2);
  // negative stored values lose against unwritten zeros
  q.set(2, 0, -1.0);
  q.set(2, 1, -0.5);
  CHECK(greedy_action(q, 2) == 2);
  CHECK_THROWS_AS(greedy_action(q, 3), ValidationError);
}

TEST_CASE("QTable serialization roundtrip is exact") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-10, 10);
  QTable q(20, 20);
  for (int i = 0; i < 100; ++i) q.set(gen() % 20, gen() % 20, u(gen));
  const auto text = q.serialize();
  const auto back = QTable::parse(text);
  CHECK(back == q);
  CHECK(back.serialize() == text);
  const auto j = nlohmann::json::parse(text);
  CHECK(j.at("n_states") == 20);
  auto entries = j.at("entries");
  CHECK(std::is_sorted(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    return std::pair(a[0].template get<int>(), a[1].template get<int>()) <
           std::pair(b[0].template get<int>(), b[1].template get<int>());
  }));
  CHECK_THROWS_AS(QTable::parse(R"({"n_states":1,"n_actions":1,"entries":[[0,3,1.0]]})"), Error);
  CHECK_THROWS_AS(QTable::parse("not json"), Error);
}

TEST_CASE("TrainingConfig validation") {
  TrainingConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.alpha = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.gamma = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.epsilon = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.episodes = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("train: determinism and report shape") {
  const auto w = small_world(30);
  TrainingConfig cfg;
  cfg.episodes = 12;
  const auto a = train(w.corpus, w.index, RewardSpec{}, cfg);
  const auto b = train(w.corpus, w.index, RewardSpec{}, cfg);
  CHECK(a.table == b.table);
  CHECK(a.report.max_delta == b.report.max_delta);
  CHECK(a.report.max_delta.size() == a.report.sweeps_run);
  CHECK(a.report.mean_reward.size() == a.report.sweeps_run);
  CHECK(a.table.n_states() == 30);
  CHECK(a.table.n_actions() == 30);
  REQUIRE(a.report.epsilon.size() == a.report.sweeps_run);
  CHECK(a.report.epsilon.front() == doctest::Approx(0.2));
  if (a.report.sweeps_run == cfg.episodes) CHECK(a.report.epsilon.back() == doctest::Approx(0.01));

  cfg.seed = 43;
  const auto c = train(w.corpus, w.index, RewardSpec{}, cfg);
  CHECK_FALSE(c.table == a.table);
  CHECK_THROWS_AS(train({}, VectorIndex(256), RewardSpec{}, cfg), ConfigError);
}

TEST_CASE("train: converges and self-pairs when convergence is reachable") {
  // one-step greedy learning: alpha 1, gamma 0, no exploration
  const auto w = small_world(25);
  TrainingConfig cfg;
  cfg.alpha = 1.0;
  cfg.gamma = 0.0;
  cfg.epsilon = 0.0;
  cfg.epsilon_final = 0.0;
  const auto result = train(w.corpus, w.index, RewardSpec{}, cfg);
  CHECK(result.report.converged);
  CHECK(result.report.sweeps_run == 2);
  CHECK(result.report.max_delta.back() < cfg.convergence_tol);
  for (std::size_t s = 0; s < 25; ++s) {
    CHECK(greedy_action(result.table, s) == s);
    CHECK(result.table.get(s, s) == 1.0);
  }
}

TEST_CASE("train: a state's first visit is greedy even at epsilon 1") {
  const auto w = small_world(30);
  TrainingConfig cfg;
  cfg.epsilon = 1.0;
  cfg.epsilon_final = 1.0;
  cfg.episodes = 1;
  const auto one = train(w.corpus, w.index, RewardSpec{}, cfg);
  for (std::size_t s = 0; s < 30; ++s) {
    REQUIRE(one.table.row(s).size() == 1);
    CHECK(one.table.row(s).begin()->first == s);
  }
  cfg.episodes = 8;
  const auto many = train(w.corpus, w.index, RewardSpec{}, cfg);
  std::size_t explored = 0;
  for (std::size_t s = 0; s < 30; ++s) explored += many.table.row(s).size() > 1;
  CHECK(explored > 0);
}

TEST_CASE("fixture: default training self-pairs every state") {
  const auto engine = closedqa::testing::fixture_engine();
  for (std::size_t s = 0; s < engine->qtable.n_states(); ++s) {
    CHECK(greedy_action(engine->qtable, s) == s);
  }
}

TEST_CASE("property: Q-values stay inside the contraction bound") {
  const auto w = small_world(40);
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    TrainingConfig cfg;
    cfg.alpha = 0.05 + 0.95 * u(gen);
    cfg.gamma = 0.95 * u(gen);
    cfg.epsilon = u(gen);
    cfg.epsilon_final = cfg.epsilon * u(gen);
    cfg.episodes = 20;
    cfg.seed = gen();
    RewardSpec spec;
    const auto result = train(w.corpus, w.index, spec, cfg);
    const double lo = std::min(spec.penalty, 0.0) / (1 - cfg.gamma);
    const double hi = spec.full_reward / (1 - cfg.gamma);
    for (std::size_t s = 0; s < result.table.n_states(); ++s) {
      for (const auto& [a, v] : result.table.row(s)) {
        CHECK(v >= lo - 1e-12);
        CHECK(v <= hi + 1e-12);
      }
    }
  }
}
