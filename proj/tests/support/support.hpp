#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "closedqa/bundle.hpp"
#include "closedqa/embedding.hpp"
#include "closedqa/pipeline.hpp"

namespace closedqa::testing {

std::filesystem::path data_dir();
std::filesystem::path fixture_path();

// Cleaning used across the tests: shipped English stopwords, no stem rules.
CleaningConfig english_cleaning();

// Fixture run through the ingest pipeline with default settings.
const IngestResult& ingested_fixture();

// Engine trained on the fixture train split with default settings. Built once.
std::shared_ptr<const Engine> fixture_engine();

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "closedqa");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Looks raw text up in a fixed table; unknown text is degenerate.
class TableEmbedder final : public EmbeddingProvider {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>> table);
  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed_text(std::string_view text) const override;

 private:
  std::map<std::string, std::vector<double>, std::less<>> table_;
  std::size_t dim_ = 0;
};

QARecord make_record(std::string id, std::string question, std::string answer,
                     std::string category = "fiqh_ibadah");

// n distinct words of filler text, each "w<letters>".
std::string filler_words(std::size_t n, std::size_t salt = 0);

}  // namespace closedqa::testing
