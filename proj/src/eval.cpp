#include "closedqa/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "closedqa/error.hpp"
#include "closedqa/rng.hpp"

namespace closedqa {

namespace {

constexpr int kMaxRedraws = 16;

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace

double percentile(std::vector<double> sample, double p) {
  if (sample.empty()) return 0.0;
  std::sort(sample.begin(), sample.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sample.size())));
  return sample[std::clamp<std::size_t>(rank, 1, sample.size()) - 1];
}

std::vector<EvalScenario> read_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  std::vector<EvalScenario> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    try {
      const auto j = nlohmann::json::parse(line);
      EvalScenario s;
      s.question = j.at("question").get<std::string>();
      s.expected_ids = j.at("expected_ids").get<std::set<std::string>>();
      if (j.contains("note") && j["note"].is_string()) s.note = j["note"].get<std::string>();
      if (s.expected_ids.empty()) {
        throw ValidationError(path.string() + ": row " + std::to_string(row) +
                              ": expected_ids is empty");
      }
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path.string() + ": row " + std::to_string(row) + ": " + e.what());
    }
  }
  return out;
}

std::string scenarios_to_jsonl(std::span<const EvalScenario> scenarios) {
  std::string out;
  for (const auto& s : scenarios) {
    nlohmann::json j{{"question", s.question}, {"expected_ids", s.expected_ids}};
    if (s.note) j["note"] = *s.note;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_scenarios(const std::filesystem::path& path, std::span<const EvalScenario> scenarios) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << scenarios_to_jsonl(scenarios);
}

bool EvalReport::same_outcome(const EvalReport& o) const {
  return n_scenarios == o.n_scenarios && relevant == o.relevant &&
         fairly_relevant == o.fairly_relevant && not_relevant == o.not_relevant &&
         hits == o.hits && semantic_accuracy == o.semantic_accuracy && hit_rate == o.hit_rate;
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json{
      {"n_scenarios", r.n_scenarios},
      {"tiers",
       {{"relevant", r.relevant},
        {"fairly_relevant", r.fairly_relevant},
        {"not_relevant", r.not_relevant}}},
      {"semantic_accuracy", r.semantic_accuracy},
      {"hit_rate", r.hit_rate},
      {"latency_ms", {{"p50", r.latency_p50_ms}, {"p95", r.latency_p95_ms}}},
  };
}

std::string format_report(const EvalReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "scenarios          %zu\n"
                "  relevant         %zu\n"
                "  fairly relevant  %zu\n"
                "  not relevant     %zu\n"
                "semantic accuracy  %.3f  (tier proxy: top-1 similarity above tier_hi)\n"
                "hit rate           %.3f  (answer id among expected ids)\n"
                "latency p50/p95    %.3f / %.3f ms\n",
                r.n_scenarios, r.relevant, r.fairly_relevant, r.not_relevant, r.semantic_accuracy,
                r.hit_rate, r.latency_p50_ms, r.latency_p95_ms);
  return buf;
}

EvalReport run_eval(std::span<const EvalScenario> scenarios, const Engine& engine,
                    const InferenceConfig& cfg) {
  if (!engine.loaded()) throw StateError("no engine bundle is loaded");
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    if (scenarios[i].expected_ids.empty()) {
      throw ValidationError("scenario " + std::to_string(i + 1) + " has no expected ids");
    }
    for (const auto& id : scenarios[i].expected_ids) {
      if (!engine.index.position_of(id)) {
        throw ValidationError("scenario " + std::to_string(i + 1) + " expects unknown record id '" +
                              id + "'");
      }
    }
  }

  EvalReport report;
  report.n_scenarios = scenarios.size();
  std::vector<double> latencies;
  latencies.reserve(scenarios.size());
  for (const auto& s : scenarios) {
    try {
      const auto result = answer_query(s.question, engine, cfg);
      latencies.push_back(result.latency_ms);
      switch (result.confidence) {
        case Confidence::relevant: ++report.relevant; break;
        case Confidence::fairly_relevant: ++report.fairly_relevant; break;
        case Confidence::not_relevant: ++report.not_relevant; break;
      }
      if (s.expected_ids.contains(result.answer_id)) ++report.hits;
    } catch (const DegenerateInputError&) {
      ++report.not_relevant;
    }
  }
  if (report.n_scenarios > 0) {
    const auto n = static_cast<double>(report.n_scenarios);
    report.semantic_accuracy = static_cast<double>(report.relevant) / n;
    report.hit_rate = static_cast<double>(report.hits) / n;
  }
  report.latency_p50_ms = percentile(latencies, 50.0);
  report.latency_p95_ms = percentile(latencies, 95.0);
  return report;
}

std::map<std::string, std::string> load_synonyms(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open synonym table " + path.string());
  std::map<std::string, std::string> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw SchemaError(path.string() + ":" + std::to_string(line_no) +
                        ": expected 'token<TAB>replacement'");
    }
    table[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return table;
}

std::vector<EvalScenario> generate_paraphrases(std::span<const QARecord> corpus,
                                               const CleaningConfig& cleaning,
                                               const ParaphraseOptions& options) {
  if (!(options.dropout >= 0.0 && options.dropout <= 0.3)) {
    throw ConfigError("dropout must be in [0, 0.3]");
  }
  if (options.per_question == 0) throw ConfigError("per_question must be at least 1");

  Rng rng(options.seed);
  std::vector<std::size_t> picked(corpus.size());
  std::iota(picked.begin(), picked.end(), std::size_t{0});
  if (options.questions && *options.questions < corpus.size()) {
    rng.shuffle(picked);
    picked.resize(*options.questions);
    std::sort(picked.begin(), picked.end());
  }

  std::vector<EvalScenario> out;
  for (const auto pos : picked) {
    const auto& record = corpus[pos];
    const auto original = split_whitespace(clean_text(record.question, cleaning));
    const auto is_content = [&](const std::string& t) { return !cleaning.stopwords.contains(t); };
    if (std::none_of(original.begin(), original.end(), is_content)) continue;

    for (std::size_t v = 0; v < options.per_question; ++v) {
      std::vector<std::string> variant;
      bool accepted = false;
      for (int attempt = 0; attempt < kMaxRedraws && !accepted; ++attempt) {
        variant.clear();
        for (const auto& t : original) {
          if (!is_content(t) || rng.uniform() >= options.dropout) {
            variant.push_back(t);
            continue;
          }
          if (const auto syn = options.synonyms.find(t); syn != options.synonyms.end()) {
            variant.push_back(syn->second);
          }
        }
        accepted = variant != original && std::any_of(variant.begin(), variant.end(), is_content);
      }
      if (!accepted) {
        variant = original;
        std::rotate(variant.begin(), variant.begin() + 1, variant.end());
        if (variant == original) continue;
      }
      out.push_back({join(variant),
                     {record.id},
                     "paraphrase " + std::to_string(v + 1) + " of " + record.id});
    }
  }
  return out;
}

}  // namespace closedqa
