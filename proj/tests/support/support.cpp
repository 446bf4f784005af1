#include "support.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

#include "closedqa/error.hpp"

namespace closedqa::testing {

namespace fs = std::filesystem;

fs::path data_dir() { return CLOSEDQA_DATA_DIR; }

fs::path fixture_path() { return data_dir() / "fixtures" / "qa_fixture_200.jsonl"; }

CleaningConfig english_cleaning() {
  CleaningConfig c;
  c.stopwords = load_stopwords(data_dir() / "stopwords_en.txt");
  return c;
}

const IngestResult& ingested_fixture() {
  static const IngestResult result = [] {
    IngestConfig cfg;
    cfg.cleaning = english_cleaning();
    const auto raw = load_raw(fixture_path(), RawFormat::jsonl);
    return run_ingest(raw, cfg);
  }();
  return result;
}

std::shared_ptr<const Engine> fixture_engine() {
  static const std::shared_ptr<const Engine> engine = [] {
    EngineSpec spec;
    spec.cleaning = english_cleaning();
    return std::make_shared<const Engine>(build_engine(ingested_fixture().split.train, spec));
  }();
  return engine;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TableEmbedder::TableEmbedder(std::map<std::string, std::vector<double>> table) {
  for (auto& [text, v] : table) {
    if (dim_ == 0) dim_ = v.size();
    table_.emplace(text, std::move(v));
  }
}

EmbeddingVector TableEmbedder::embed_text(std::string_view text) const {
  const auto it = table_.find(text);
  if (it == table_.end()) throw DegenerateInputError("no vector for '" + std::string(text) + "'");
  return normalized(it->second);
}

QARecord make_record(std::string id, std::string question, std::string answer,
                     std::string category) {
  return {std::move(id), std::move(question), std::move(answer), std::move(category), std::nullopt};
}

std::string filler_words(std::size_t n, std::size_t salt) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t x = i * 7919 + salt * 104729 + 1;
    std::string w = "w";
    while (x > 0) {
      w.push_back(static_cast<char>('a' + x % 26));
      x /= 26;
    }
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return out;
}

}  // namespace closedqa::testing
