#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace closedqa {

struct QARecord;
class VectorIndex;

// Sparse state x action table. Entries that were never written read as 0.
class QTable {
 public:
  QTable() = default;
  QTable(std::size_t n_states, std::size_t n_actions);

  std::size_t n_states() const noexcept { return rows_.size(); }
  std::size_t n_actions() const noexcept { return n_actions_; }

  double get(std::size_t s, std::size_t a) const;
  void set(std::size_t s, std::size_t a, double value);

  // max over every action of Q(s, .), counting unwritten entries as 0.
  double max_value(std::size_t s) const;

  const std::map<std::size_t, double>& row(std::size_t s) const;
  std::size_t stored_entries() const;

  // {"n_states": n, "n_actions": n, "entries": [[s, a, value], ...]} with
  // entries sorted by (s, a) and values printed with 17 significant digits.
  std::string serialize() const;
  static QTable parse(const std::string& text);

  bool operator==(const QTable&) const = default;

 private:
  void check_bounds(std::size_t s, std::size_t a) const;

  std::size_t n_actions_ = 0;
  std::vector<std::map<std::size_t, double>> rows_;
};

struct RewardSpec {
  double hi_threshold = 0.8;
  double lo_threshold = 0.5;
  double full_reward = 1.0;
  double penalty = -0.1;

  // ConfigError unless 0 < lo < hi <= 1, penalty < lo and full_reward >= hi,
  // which together keep the shaped reward monotone.
  void validate() const;

  bool operator==(const RewardSpec&) const = default;
};

// full_reward above hi, the similarity itself on [lo, hi], penalty below lo.
double shape_reward(double similarity, const RewardSpec& spec);

struct TrainingConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.2;        // exploration rate of the first sweep
  double epsilon_final = 0.01; // reached linearly by the last sweep
  std::size_t episodes = 50;   // full sweeps over the training states
  double convergence_tol = 1e-3;
  std::uint64_t seed = 42;
  // Actions explored from a state: its nearest questions in the index.
  std::size_t candidate_k = 10;

  void validate() const;

  bool operator==(const TrainingConfig&) const = default;
};

struct TrainingReport {
  std::vector<double> max_delta;    // per sweep, max |dQ| over its updates
  std::vector<double> mean_reward;  // per sweep
  std::vector<double> epsilon;      // per sweep
  bool converged = false;
  std::size_t sweeps_run = 0;
};

// Q(s,a) <- Q(s,a) + alpha * (r + gamma * max_a' Q(s',a') - Q(s,a)).
// A missing s_next is terminal and contributes 0. Returns the stored value.
double q_update(QTable& q, std::size_t s, std::size_t a, double reward,
                std::optional<std::size_t> s_next, const TrainingConfig& cfg);

// argmax_a Q(s, a) over all actions, ties to the lowest action index.
std::size_t greedy_action(const QTable& q, std::size_t s);

struct TrainingResult {
  QTable table;
  TrainingReport report;
};

// States and actions are both the training records in corpus order; action a
// answers with record a. Each sweep visits every state once in a seeded
// shuffle, picks an action epsilon-greedily among the state's candidate_k
// nearest questions (greedy ties go to the more similar question; a state's
// first visit is always greedy), rewards it
// with shape_reward(cosine(question s, question a)) and chains to the next
// state of the sweep; the sweep's last step is terminal. Training stops early
// once a sweep's max |dQ| drops below convergence_tol.
TrainingResult train(std::span<const QARecord> corpus, const VectorIndex& index,
                     const RewardSpec& spec, const TrainingConfig& cfg);

void to_json(nlohmann::json& j, const RewardSpec& spec);
void from_json(const nlohmann::json& j, RewardSpec& spec);
void to_json(nlohmann::json& j, const TrainingConfig& cfg);
void from_json(const nlohmann::json& j, TrainingConfig& cfg);
void to_json(nlohmann::json& j, const TrainingReport& report);

}  // namespace closedqa
