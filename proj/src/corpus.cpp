#include "closedqa/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

#include "closedqa/embedding.hpp"
#include "closedqa/error.hpp"
#include "closedqa/rng.hpp"

namespace closedqa {

namespace {

struct CsvRow {
  std::vector<std::string> fields;
  std::size_t line;  // 1-based line where the row starts
};

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and newlines.
std::vector<CsvRow> parse_csv(std::string_view data, const std::string& source) {
  std::vector<CsvRow> rows;
  std::size_t i = 0;
  std::size_t line = 1;
  if (data.starts_with("\xEF\xBB\xBF")) i = 3;

  while (i < data.size()) {
    CsvRow row{{}, line};
    std::string field;
    bool row_done = false;
    while (!row_done) {
      field.clear();
      if (i < data.size() && data[i] == '"') {
        ++i;
        bool closed = false;
        while (i < data.size()) {
          const char c = data[i];
          if (c == '"') {
            if (i + 1 < data.size() && data[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            closed = true;
            break;
          }
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        if (!closed) {
          throw SchemaError(source + ": unterminated quoted field in row starting at line " +
                            std::to_string(row.line));
        }
        if (i < data.size() && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
          throw SchemaError(source + ": unexpected character after closing quote at line " +
                            std::to_string(line));
        }
      } else {
        while (i < data.size() && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
          if (data[i] == '"') {
            throw SchemaError(source + ": stray quote in unquoted field at line " +
                              std::to_string(line));
          }
          field.push_back(data[i]);
          ++i;
        }
      }
      row.fields.push_back(field);
      if (i < data.size() && data[i] == ',') {
        ++i;
        continue;
      }
      if (i < data.size() && data[i] == '\r') ++i;
      if (i < data.size() && data[i] == '\n') {
        ++i;
        ++line;
      }
      row_done = true;
    }
    const bool blank = row.fields.size() == 1 && row.fields[0].empty();
    if (!blank) rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string synthesized_id(std::size_t row_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "q_%04zu", row_index);
  return buf;
}

std::string trim_copy(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

void check_category(const QARecord& r, std::size_t row, const std::set<std::string>& categories,
                    const std::string& source) {
  if (r.category.empty()) {
    throw SchemaError(source + ": row " + std::to_string(row) + ": empty category");
  }
  if (!categories.empty() && !categories.contains(r.category)) {
    throw SchemaError(source + ": row " + std::to_string(row) + ": category '" + r.category +
                      "' is not in the configured set");
  }
}

void check_unique_ids(const std::vector<QARecord>& records, const std::string& source) {
  std::set<std::string_view> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.id).second) {
      throw ValidationError(source + ": duplicate record id '" + r.id + "'");
    }
  }
}

std::vector<QARecord> load_csv(const std::filesystem::path& path,
                               const std::set<std::string>& categories) {
  const auto source = path.string();
  const auto rows = parse_csv(read_file(path), source);
  if (rows.empty()) throw SchemaError(source + ": missing header row");

  std::map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < rows[0].fields.size(); ++c) {
    column[trim_copy(rows[0].fields[c])] = c;
  }
  for (const char* required : {"question", "answer", "category"}) {
    if (!column.contains(required)) {
      throw SchemaError(source + ": missing required column \"" + std::string(required) + "\"");
    }
  }
  const auto id_col = column.find("id");
  const auto ref_col = column.find("source_ref");

  std::vector<QARecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r].fields;
    if (f.size() != rows[0].fields.size()) {
      throw SchemaError(source + ": row " + std::to_string(r) + ": expected " +
                        std::to_string(rows[0].fields.size()) + " fields, found " +
                        std::to_string(f.size()));
    }
    QARecord rec;
    rec.question = f[column["question"]];
    rec.answer = f[column["answer"]];
    rec.category = trim_copy(f[column["category"]]);
    rec.id = id_col != column.end() && !f[id_col->second].empty() ? f[id_col->second]
                                                                 : synthesized_id(r - 1);
    if (ref_col != column.end() && !f[ref_col->second].empty()) rec.source_ref = f[ref_col->second];
    check_category(rec, r, categories, source);
    records.push_back(std::move(rec));
  }
  check_unique_ids(records, source);
  return records;
}

std::vector<QARecord> load_jsonl_records(const std::filesystem::path& path,
                                         const std::set<std::string>& categories,
                                         bool synthesize_ids) {
  const auto source = path.string();
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + source);

  std::vector<QARecord> records;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim_copy(line).empty()) continue;
    ++row;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(source + ": row " + std::to_string(row) + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) {
      throw SchemaError(source + ": row " + std::to_string(row) + ": expected a JSON object");
    }
    for (const char* required : {"question", "answer", "category"}) {
      if (!j.contains(required)) {
        throw SchemaError(source + ": row " + std::to_string(row) + ": missing required column \"" +
                          std::string(required) + "\"");
      }
      if (!j[required].is_string()) {
        throw SchemaError(source + ": row " + std::to_string(row) + ": \"" +
                          std::string(required) + "\" must be a string");
      }
    }
    QARecord rec;
    rec.question = j["question"].get<std::string>();
    rec.answer = j["answer"].get<std::string>();
    rec.category = j["category"].get<std::string>();
    if (j.contains("id") && j["id"].is_string() && !j["id"].get<std::string>().empty()) {
      rec.id = j["id"].get<std::string>();
    } else if (synthesize_ids) {
      rec.id = synthesized_id(row - 1);
    } else {
      throw SchemaError(source + ": row " + std::to_string(row) + ": missing required column \"id\"");
    }
    if (j.contains("source_ref") && j["source_ref"].is_string()) {
      rec.source_ref = j["source_ref"].get<std::string>();
    }
    check_category(rec, row, categories, source);
    records.push_back(std::move(rec));
  }
  check_unique_ids(records, source);
  return records;
}

}  // namespace

void to_json(nlohmann::json& j, const QARecord& record) {
  j = nlohmann::json{{"id", record.id},
                     {"question", record.question},
                     {"answer", record.answer},
                     {"category", record.category}};
  if (record.source_ref) j["source_ref"] = *record.source_ref;
}

void from_json(const nlohmann::json& j, QARecord& record) {
  record.id = j.at("id").get<std::string>();
  record.question = j.at("question").get<std::string>();
  record.answer = j.at("answer").get<std::string>();
  record.category = j.at("category").get<std::string>();
  if (j.contains("source_ref") && j["source_ref"].is_string()) {
    record.source_ref = j["source_ref"].get<std::string>();
  } else {
    record.source_ref.reset();
  }
}

RawFormat raw_format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".csv") return RawFormat::csv;
  if (ext == ".jsonl" || ext == ".ndjson") return RawFormat::jsonl;
  throw ConfigError("cannot infer input format from extension '" + ext + "' (use .csv or .jsonl)");
}

std::vector<QARecord> load_raw(const std::filesystem::path& path, RawFormat format,
                               const std::set<std::string>& categories) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  return format == RawFormat::csv ? load_csv(path, categories)
                                  : load_jsonl_records(path, categories, true);
}

std::vector<QARecord> read_jsonl(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
  return load_jsonl_records(path, {}, false);
}

std::string to_jsonl(std::span<const QARecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += nlohmann::json(r).dump();
    out += '\n';
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, std::span<const QARecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_jsonl(records);
  if (!out) throw IoError("write failed for " + path.string());
}

FilterResult filter_records(std::span<const QARecord> records, const FilterRules& rules,
                            const CleaningConfig& cleaning) {
  FilterResult result;
  for (const auto& r : records) {
    const auto question = clean_text(r.question, cleaning);
    const auto answer = clean_text(r.answer, cleaning);
    if (rules.require_both_fields && (question.empty() || answer.empty())) {
      ++result.report.empty_field;
      continue;
    }
    if (word_count(answer) < rules.min_answer_words) {
      ++result.report.short_answer;
      continue;
    }
    if (rules.allowed_categories && !rules.allowed_categories->contains(r.category)) {
      ++result.report.category_excluded;
      continue;
    }
    result.kept.push_back(r);
  }
  return result;
}

DedupResult deduplicate(std::span<const QARecord> records, const EmbeddingProvider& embedder,
                        double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError("dedup threshold must be in (0, 1], got " + std::to_string(threshold));
  }
  const std::size_t n = records.size();
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(n);
  for (const auto& r : records) {
    try {
      vectors.push_back(embedder.embed_text(r.question));
    } catch (const Error& e) {
      rethrow_with_context(e, "record " + r.id);
    }
  }

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };

  std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = cosine_similarity(vectors[i], vectors[j]);
      if (s >= threshold) {
        edges.emplace_back(i, j, s);
        const auto a = find(i);
        const auto b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < n; ++i) components[find(i)].push_back(i);

  DedupResult result;
  result.report.threshold_used = threshold;
  std::vector<bool> removed(n, false);
  for (const auto& [root, members] : components) {
    if (members.size() < 2) continue;
    std::size_t best = members.front();
    double best_mean = -2.0;
    for (const auto m : members) {
      double sum = 0.0;
      for (const auto o : members) {
        if (o != m) sum += cosine_similarity(vectors[m], vectors[o]);
      }
      const double mean = sum / static_cast<double>(members.size() - 1);
      const auto& cand = records[m];
      const auto& cur = records[best];
      const bool better =
          mean > best_mean ||
          (mean == best_mean && (cand.answer.size() > cur.answer.size() ||
                                 (cand.answer.size() == cur.answer.size() && cand.id < cur.id)));
      if (better) {
        best = m;
        best_mean = mean;
      }
    }
    DedupGroup group;
    group.kept_id = records[best].id;
    for (const auto m : members) {
      if (m == best) continue;
      group.removed_ids.push_back(records[m].id);
      removed[m] = true;
    }
    for (const auto& [i, j, s] : edges) {
      if (find(i) == root) group.pairs.push_back({records[i].id, records[j].id, s});
    }
    result.report.groups.push_back(std::move(group));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!removed[i]) result.kept.push_back(records[i]);
  }
  return result;
}

SplitCorpus stratified_split(std::span<const QARecord> records, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ConfigError("split ratio must be in (0, 1), got " + std::to_string(ratio));
  }
  std::map<std::string, std::vector<std::size_t>> by_category;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].category.empty()) {
      throw ValidationError("record " + records[i].id + " has no category");
    }
    by_category[records[i].category].push_back(i);
  }

  constexpr double kEps = 1e-9;
  const auto target = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(records.size())));

  struct Quota {
    std::string category;
    std::size_t count;
    double remainder;
  };
  std::vector<Quota> quotas;
  std::size_t assigned = 0;
  for (const auto& [category, members] : by_category) {
    const double exact = ratio * static_cast<double>(members.size());
    const auto base = static_cast<std::size_t>(std::floor(exact + kEps));
    quotas.push_back({category, base, std::max(0.0, exact - static_cast<double>(base))});
    assigned += base;
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return quotas[a].remainder > quotas[b].remainder;
  });
  for (std::size_t k = 0; assigned < target && k < order.size(); ++k) {
    auto& q = quotas[order[k]];
    if (q.count < by_category[q.category].size()) {
      ++q.count;
      ++assigned;
    }
  }

  Rng rng(seed);
  std::vector<bool> in_train(records.size(), false);
  for (const auto& q : quotas) {
    auto members = by_category[q.category];
    rng.shuffle(members);
    for (std::size_t k = 0; k < q.count; ++k) in_train[members[k]] = true;
  }

  SplitCorpus split;
  split.seed = seed;
  split.ratio = ratio;
  for (std::size_t i = 0; i < records.size(); ++i) {
    (in_train[i] ? split.train : split.test).push_back(records[i]);
  }
  return split;
}

void to_json(nlohmann::json& j, const FilterReport& report) {
  j = nlohmann::json{{"empty_field", report.empty_field},
                     {"short_answer", report.short_answer},
                     {"category_excluded", report.category_excluded}};
}

void to_json(nlohmann::json& j, const DedupReport& report) {
  auto groups = nlohmann::json::array();
  for (const auto& g : report.groups) {
    auto pairs = nlohmann::json::array();
    for (const auto& p : g.pairs) pairs.push_back({p.first_id, p.second_id, p.similarity});
    groups.push_back({{"kept_id", g.kept_id}, {"removed_ids", g.removed_ids}, {"pairs", pairs}});
  }
  j = nlohmann::json{{"threshold_used", report.threshold_used}, {"groups", groups}};
}

}  // namespace closedqa
