#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "closedqa/text.hpp"
#include "json.hpp"

namespace closedqa {

class EmbeddingProvider;

inline const std::set<std::string>& default_categories() {
  static const std::set<std::string> kDefaults{"fiqh_ibadah", "muamalah", "aqidah", "akhlak",
                                               "tafsir_history"};
  return kDefaults;
}

struct QARecord {
  std::string id;
  std::string question;
  std::string answer;
  std::string category;
  std::optional<std::string> source_ref;

  bool operator==(const QARecord&) const = default;
};

void to_json(nlohmann::json& j, const QARecord& record);
void from_json(const nlohmann::json& j, QARecord& record);

enum class RawFormat { csv, jsonl };

RawFormat raw_format_from_path(const std::filesystem::path& path);

// Reads CSV (header row naming question, answer, category and optionally id,
// source_ref) or JSON-lines. Text passes through unmodified. Missing ids are
// synthesized as "q_" + four-digit zero-padded row index. A non-empty
// `categories` set rejects rows whose category is outside it.
std::vector<QARecord> load_raw(const std::filesystem::path& path, RawFormat format,
                               const std::set<std::string>& categories = default_categories());

std::vector<QARecord> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, std::span<const QARecord> records);
std::string to_jsonl(std::span<const QARecord> records);

struct FilterRules {
  std::size_t min_answer_words = 20;
  bool require_both_fields = true;
  std::optional<std::set<std::string>> allowed_categories;
};

struct FilterReport {
  std::size_t empty_field = 0;
  std::size_t short_answer = 0;
  std::size_t category_excluded = 0;

  std::size_t total() const { return empty_field + short_answer + category_excluded; }
  bool operator==(const FilterReport&) const = default;
};

struct FilterResult {
  std::vector<QARecord> kept;
  FilterReport report;
};

// Field emptiness and answer length are judged on the cleaned text.
FilterResult filter_records(std::span<const QARecord> records, const FilterRules& rules,
                            const CleaningConfig& cleaning = {});

struct DedupPair {
  std::string first_id;
  std::string second_id;
  double similarity;
};

struct DedupGroup {
  std::string kept_id;
  std::vector<std::string> removed_ids;
  std::vector<DedupPair> pairs;  // every edge >= threshold inside the group
};

struct DedupReport {
  std::vector<DedupGroup> groups;
  double threshold_used = 0.0;
};

struct DedupResult {
  std::vector<QARecord> kept;
  DedupReport report;
};

// Groups questions by single-link closure over the cosine >= threshold graph
// and keeps one representative per group: highest mean similarity to the
// other members, then longest answer, then lowest id.
DedupResult deduplicate(std::span<const QARecord> records, const EmbeddingProvider& embedder,
                        double threshold = 0.95);

struct SplitCorpus {
  std::vector<QARecord> train;
  std::vector<QARecord> test;
  std::uint64_t seed = 0;
  double ratio = 0.8;
};

// Per-category quotas are floor(ratio * n_c) plus one for the categories with
// the largest remainders until the train size reaches round(ratio * N).
// Members are chosen by a seeded shuffle; both halves keep corpus order.
SplitCorpus stratified_split(std::span<const QARecord> records, double ratio, std::uint64_t seed);

void to_json(nlohmann::json& j, const FilterReport& report);
void to_json(nlohmann::json& j, const DedupReport& report);

}  // namespace closedqa
