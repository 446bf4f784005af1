#include "closedqa/qlearn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "closedqa/corpus.hpp"
#include "closedqa/embedding.hpp"
#include "closedqa/error.hpp"
#include "closedqa/rng.hpp"

namespace closedqa {

QTable::QTable(std::size_t n_states, std::size_t n_actions)
    : n_actions_(n_actions), rows_(n_states) {}

void QTable::check_bounds(std::size_t s, std::size_t a) const {
  if (s >= rows_.size() || a >= n_actions_) {
    throw ValidationError("Q-table index (" + std::to_string(s) + ", " + std::to_string(a) +
                          ") outside " + std::to_string(rows_.size()) + "x" +
                          std::to_string(n_actions_));
  }
}

double QTable::get(std::size_t s, std::size_t a) const {
  check_bounds(s, a);
  const auto& r = rows_[s];
  const auto it = r.find(a);
  return it == r.end() ? 0.0 : it->second;
}

void QTable::set(std::size_t s, std::size_t a, double value) {
  check_bounds(s, a);
  if (!std::isfinite(value)) throw NumericError("non-finite Q-value");
  rows_[s][a] = value;
}

double QTable::max_value(std::size_t s) const {
  check_bounds(s, 0);
  const auto& r = rows_[s];
  double best = r.size() < n_actions_ ? 0.0 : -INFINITY;
  for (const auto& [a, v] : r) best = std::max(best, v);
  return best;
}

const std::map<std::size_t, double>& QTable::row(std::size_t s) const {
  check_bounds(s, 0);
  return rows_[s];
}

std::size_t QTable::stored_entries() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

std::string QTable::serialize() const {
  std::string out = "{\"n_states\": " + std::to_string(rows_.size()) +
                    ", \"n_actions\": " + std::to_string(n_actions_) + ", \"entries\": [";
  bool first = true;
  char buf[64];
  for (std::size_t s = 0; s < rows_.size(); ++s) {
    for (const auto& [a, v] : rows_[s]) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out += first ? "\n  [" : ",\n  [";
      out += std::to_string(s) + ", " + std::to_string(a) + ", " + buf + "]";
      first = false;
    }
  }
  out += first ? "]}\n" : "\n]}\n";
  return out;
}

QTable QTable::parse(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("Q-table is not valid JSON: ") + e.what());
  }
  try {
    QTable q(j.at("n_states").get<std::size_t>(), j.at("n_actions").get<std::size_t>());
    for (const auto& e : j.at("entries")) {
      q.set(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>());
    }
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed Q-table: ") + e.what());
  }
}

void RewardSpec::validate() const {
  if (!(lo_threshold > 0.0 && lo_threshold < hi_threshold && hi_threshold <= 1.0)) {
    throw ConfigError("reward thresholds must satisfy 0 < lo < hi <= 1");
  }
  if (!(penalty < lo_threshold)) throw ConfigError("penalty must be below the lowest partial reward");
  if (!(full_reward >= hi_threshold)) {
    throw ConfigError("full reward must be at least the highest partial reward");
  }
}

double shape_reward(double similarity, const RewardSpec& spec) {
  spec.validate();
  if (similarity > spec.hi_threshold) return spec.full_reward;
  if (similarity >= spec.lo_threshold) return similarity;
  return spec.penalty;
}

void TrainingConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must be in [0, 1]");
  if (!(epsilon_final >= 0.0 && epsilon_final <= 1.0)) {
    throw ConfigError("epsilon_final must be in [0, 1]");
  }
  if (episodes == 0) throw ConfigError("episodes must be at least 1");
  if (!(convergence_tol > 0.0)) throw ConfigError("convergence_tol must be positive");
  if (candidate_k == 0) throw ConfigError("candidate_k must be at least 1");
}

double q_update(QTable& q, std::size_t s, std::size_t a, double reward,
                std::optional<std::size_t> s_next, const TrainingConfig& cfg) {
  const double current = q.get(s, a);
  const double future = s_next ? q.max_value(*s_next) : 0.0;
  const double updated = current + cfg.alpha * (reward + cfg.gamma * future - current);
  if (!std::isfinite(updated)) {
    throw NumericError("Q-update produced a non-finite value at (" + std::to_string(s) + ", " +
                       std::to_string(a) + ")");
  }
  q.set(s, a, updated);
  return updated;
}

std::size_t greedy_action(const QTable& q, std::size_t s) {
  const auto& r = q.row(s);
  // Lowest action index that was never written (reads as 0).
  std::size_t first_unwritten = 0;
  for (const auto& [a, v] : r) {
    if (a != first_unwritten) break;
    ++first_unwritten;
  }
  const bool any_unwritten = first_unwritten < q.n_actions();

  std::optional<std::size_t> best;
  double best_value = 0.0;
  for (const auto& [a, v] : r) {
    if (!best || v > best_value) {
      best = a;
      best_value = v;
    }
  }
  if (any_unwritten) {
    if (!best || best_value < 0.0 || (best_value == 0.0 && first_unwritten < *best)) {
      return first_unwritten;
    }
  }
  return *best;
}

TrainingResult train(std::span<const QARecord> corpus, const VectorIndex& index,
                     const RewardSpec& spec, const TrainingConfig& cfg) {
  spec.validate();
  cfg.validate();
  const std::size_t n = corpus.size();
  if (n == 0) throw ConfigError("cannot train on an empty training split");
  if (index.size() != n) {
    throw ConsistencyError("index holds " + std::to_string(index.size()) + " entries for " +
                           std::to_string(n) + " training records");
  }

  // Candidate actions per state in similarity order, with their rewards.
  struct Candidate {
    std::size_t action;
    double reward;
  };
  std::vector<std::vector<Candidate>> candidates(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& hit : index.query(index.vector(s), cfg.candidate_k)) {
      candidates[s].push_back({hit.position, shape_reward(hit.score, spec)});
    }
  }

  TrainingResult result{QTable(n, n), {}};
  auto& q = result.table;
  auto& report = result.report;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t sweep = 0; sweep < cfg.episodes; ++sweep) {
    const double progress =
        cfg.episodes > 1 ? static_cast<double>(sweep) / static_cast<double>(cfg.episodes - 1) : 1.0;
    const double epsilon = cfg.epsilon + (cfg.epsilon_final - cfg.epsilon) * progress;
    rng.shuffle(order);

    double max_delta = 0.0;
    double reward_sum = 0.0;
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t s = order[step];
      const auto& cands = candidates[s];
      std::size_t pick = 0;
      // A state's first visit is greedy. An exploratory first pick collects
      // bootstrap value before the state's own answer has any, becomes greedy
      // and keeps the own answer from being updated again.
      if (!q.row(s).empty() && rng.uniform() < epsilon) {
        pick = static_cast<std::size_t>(rng.below(cands.size()));
      } else {
        for (std::size_t c = 1; c < cands.size(); ++c) {
          if (q.get(s, cands[c].action) > q.get(s, cands[pick].action)) pick = c;
        }
      }
      const auto [action, reward] = cands[pick];
      const std::optional<std::size_t> next =
          step + 1 < n ? std::optional<std::size_t>(order[step + 1]) : std::nullopt;
      const double before = q.get(s, action);
      const double after = q_update(q, s, action, reward, next, cfg);
      max_delta = std::max(max_delta, std::abs(after - before));
      reward_sum += reward;
    }

    report.max_delta.push_back(max_delta);
    report.mean_reward.push_back(reward_sum / static_cast<double>(n));
    report.epsilon.push_back(epsilon);
    report.sweeps_run = sweep + 1;
    if (max_delta < cfg.convergence_tol) {
      report.converged = true;
      break;
    }
  }
  return result;
}

void to_json(nlohmann::json& j, const RewardSpec& spec) {
  j = nlohmann::json{{"hi_threshold", spec.hi_threshold},
                     {"lo_threshold", spec.lo_threshold},
                     {"full_reward", spec.full_reward},
                     {"penalty", spec.penalty},
                     {"middle_mode", "similarity"}};
}

void from_json(const nlohmann::json& j, RewardSpec& spec) {
  spec.hi_threshold = j.at("hi_threshold").get<double>();
  spec.lo_threshold = j.at("lo_threshold").get<double>();
  spec.full_reward = j.at("full_reward").get<double>();
  spec.penalty = j.at("penalty").get<double>();
  spec.validate();
}

void to_json(nlohmann::json& j, const TrainingConfig& cfg) {
  j = nlohmann::json{{"alpha", cfg.alpha},
                     {"gamma", cfg.gamma},
                     {"epsilon", cfg.epsilon},
                     {"epsilon_final", cfg.epsilon_final},
                     {"episodes", cfg.episodes},
                     {"convergence_tol", cfg.convergence_tol},
                     {"seed", cfg.seed},
                     {"candidate_k", cfg.candidate_k}};
}

void from_json(const nlohmann::json& j, TrainingConfig& cfg) {
  cfg.alpha = j.at("alpha").get<double>();
  cfg.gamma = j.at("gamma").get<double>();
  cfg.epsilon = j.at("epsilon").get<double>();
  cfg.epsilon_final = j.at("epsilon_final").get<double>();
  cfg.episodes = j.at("episodes").get<std::size_t>();
  cfg.convergence_tol = j.at("convergence_tol").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.candidate_k = j.at("candidate_k").get<std::size_t>();
  cfg.validate();
}

void to_json(nlohmann::json& j, const TrainingReport& report) {
  j = nlohmann::json{{"converged", report.converged},
                     {"sweeps_run", report.sweeps_run},
                     {"max_delta", report.max_delta},
                     {"mean_reward", report.mean_reward},
                     {"epsilon", report.epsilon}};
}

}  // namespace closedqa
