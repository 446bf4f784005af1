#include "closedqa/pipeline.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "closedqa/error.hpp"
#include "closedqa/summarize.hpp"

namespace closedqa {

namespace fs = std::filesystem;

nlohmann::json IngestResult::report() const {
  auto per_category = [](std::span<const QARecord> records) {
    std::map<std::string, std::size_t> counts;
    for (const auto& r : records) ++counts[r.category];
    return counts;
  };
  return nlohmann::json{
      {"stages",
       {{"raw", raw_count},
        {"after_filter", after_filter},
        {"after_dedup", after_dedup},
        {"summarized_answers", summarized},
        {"train", split.train.size()},
        {"test", split.test.size()}}},
      {"filter_drops", filter_report},
      {"dedup", dedup_report},
      {"split",
       {{"ratio", split.ratio},
        {"seed", split.seed},
        {"train_per_category", per_category(split.train)},
        {"test_per_category", per_category(split.test)}}},
  };
}

IngestResult run_ingest(std::span<const QARecord> raw, const IngestConfig& config) {
  IngestResult result;
  result.raw_count = raw.size();

  auto filtered = filter_records(raw, config.filter, config.cleaning);
  result.filter_report = filtered.report;
  result.after_filter = filtered.kept.size();
  for (auto& r : filtered.kept) {
    r.question = strip_markup(r.question);
    r.answer = strip_markup(r.answer);
  }
  if (filtered.kept.empty()) throw ValidationError("no records survive filtering");

  DedupResult deduped;
  if (config.embedding.provider == ProviderKind::builtin_hash) {
    const auto embedder = BuiltinEmbedder::fit(filtered.kept, config.embedding, config.cleaning);
    deduped = deduplicate(filtered.kept, embedder, config.dedup_threshold);
  } else {
    const HttpEmbedder embedder(config.embedding, config.cleaning);
    deduped = deduplicate(filtered.kept, embedder, config.dedup_threshold);
  }
  result.dedup_report = std::move(deduped.report);
  result.after_dedup = deduped.kept.size();

  for (auto& r : deduped.kept) {
    if (word_count(r.answer) <= config.summarize_over_words) continue;
    auto summary = summarize_answer(r.answer, config.summary_sentences, config.cleaning);
    if (summary != r.answer) {
      r.answer = std::move(summary);
      ++result.summarized;
    }
  }
  result.corpus = std::move(deduped.kept);
  result.split = stratified_split(result.corpus, config.split_ratio, config.seed);
  return result;
}

void write_ingest_output(const IngestResult& result, const IngestConfig& config,
                         const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  write_jsonl(dir / kPreparedCorpusFile, result.corpus);
  write_jsonl(dir / kTrainFile, result.split.train);
  write_jsonl(dir / kTestFile, result.split.test);

  std::ofstream cleaning(dir / kCleaningFile);
  cleaning << nlohmann::json(config.cleaning).dump(2) << "\n";
  std::ofstream report(dir / kReportFile);
  report << result.report().dump(2) << "\n";
  if (!cleaning || !report) throw IoError("cannot write ingest output in " + dir.string());
}

CleaningConfig load_cleaning(const fs::path& corpus_dir) {
  const auto path = corpus_dir / kCleaningFile;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in).get<CleaningConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

}  // namespace closedqa
