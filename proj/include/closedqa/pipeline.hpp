#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "closedqa/corpus.hpp"
#include "closedqa/embedding.hpp"
#include "json.hpp"

namespace closedqa {

struct IngestConfig {
  std::set<std::string> categories = default_categories();
  FilterRules filter;
  CleaningConfig cleaning;
  EmbeddingConfig embedding;  // used for duplicate detection
  double dedup_threshold = 0.95;
  std::size_t summary_sentences = 3;
  // Answers longer than this many words are cut down by extractive summary.
  std::size_t summarize_over_words = 250;
  double split_ratio = 0.8;
  std::uint64_t seed = 42;
};

struct IngestResult {
  std::size_t raw_count = 0;
  FilterReport filter_report;
  std::size_t after_filter = 0;
  DedupReport dedup_report;
  std::size_t after_dedup = 0;
  std::size_t summarized = 0;
  std::vector<QARecord> corpus;  // prepared records, corpus order
  SplitCorpus split;

  nlohmann::json report() const;
};

// filter -> markup-free display text -> dedup -> answer summarization -> split.
IngestResult run_ingest(std::span<const QARecord> raw, const IngestConfig& config);

inline constexpr const char* kPreparedCorpusFile = "corpus.jsonl";
inline constexpr const char* kTrainFile = "train.jsonl";
inline constexpr const char* kTestFile = "test.jsonl";
inline constexpr const char* kCleaningFile = "cleaning.json";
inline constexpr const char* kReportFile = "report.json";

void write_ingest_output(const IngestResult& result, const IngestConfig& config,
                         const std::filesystem::path& dir);

CleaningConfig load_cleaning(const std::filesystem::path& corpus_dir);

}  // namespace closedqa
