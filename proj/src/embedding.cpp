#include "closedqa/embedding.hpp"

#include <algorithm>

#include <chrono>
#include <cmath>
#include <set>

#include "closedqa/corpus.hpp"
#include "closedqa/error.hpp"
#include "httplib.h"

namespace closedqa {

namespace {

constexpr double kUnitTolerance = 1e-6;
constexpr double kCosineSlack = 1e-9;

std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string require_non_empty_clean(std::string_view text, const CleaningConfig& cleaning) {
  auto cleaned = clean_text(text, cleaning);
  if (cleaned.empty()) throw DegenerateInputError("text is empty after cleaning");
  return cleaned;
}

}  // namespace

void check_unit_norm(const EmbeddingVector& v) {
  double sq = 0.0;
  for (const double x : v.values) {
    if (!std::isfinite(x)) throw NumericError("embedding has a non-finite component");
    sq += x * x;
  }
  if (std::abs(std::sqrt(sq) - 1.0) > kUnitTolerance) {
    throw NumericError("embedding norm " + std::to_string(std::sqrt(sq)) + " is not 1");
  }
}

EmbeddingVector normalized(std::vector<double> raw) {
  double sq = 0.0;
  for (const double x : raw) {
    if (!std::isfinite(x)) throw DegenerateInputError("embedding has a non-finite component");
    sq += x * x;
  }
  if (sq == 0.0) throw DegenerateInputError("embedding is the zero vector");
  const double norm = std::sqrt(sq);
  for (double& x : raw) x /= norm;
  return EmbeddingVector{std::move(raw)};
}

std::string to_string(ProviderKind kind) {
  return kind == ProviderKind::builtin_hash ? "builtin_hash" : "external_http";
}

ProviderKind provider_kind_from_string(std::string_view name) {
  if (name == "builtin_hash" || name == "builtin") return ProviderKind::builtin_hash;
  if (name == "external_http" || name == "external") return ProviderKind::external_http;
  throw ConfigError("unknown embedding provider '" + std::string(name) + "'");
}

void EmbeddingConfig::validate() const {
  if (dim < 2) throw ConfigError("embedding dim must be at least 2");
  if (provider == ProviderKind::external_http && (!endpoint || endpoint->empty())) {
    throw ConfigError("external_http provider requires an endpoint");
  }
  if (provider == ProviderKind::builtin_hash && endpoint) {
    throw ConfigError("builtin_hash provider does not take an endpoint");
  }
}

void to_json(nlohmann::json& j, const EmbeddingConfig& config) {
  j = nlohmann::json{
      {"provider", to_string(config.provider)},
      {"dim", config.dim},
      {"timeout_ms", config.timeout.count()},
  };
  if (config.provider == ProviderKind::builtin_hash) {
    j["hash"] = {{"algorithm", kHashAlgorithm},
                 {"seed", config.hash_seed},
                 {"sign", kSignConvention},
                 {"bucket", "hash mod dim"}};
    j["idf_table"] = config.idf_table;
  } else {
    j["endpoint"] = config.endpoint.value_or("");
  }
}

void from_json(const nlohmann::json& j, EmbeddingConfig& config) {
  config.provider = provider_kind_from_string(j.at("provider").get<std::string>());
  config.dim = j.at("dim").get<std::size_t>();
  config.timeout = std::chrono::milliseconds(j.value("timeout_ms", 10'000));
  config.endpoint.reset();
  config.idf_table.clear();
  if (config.provider == ProviderKind::builtin_hash) {
    const auto& hash = j.at("hash");
    if (hash.at("algorithm").get<std::string>() != kHashAlgorithm ||
        hash.at("sign").get<std::string>() != kSignConvention) {
      throw ConfigError("unsupported builtin hash scheme");
    }
    config.hash_seed = hash.at("seed").get<std::uint64_t>();
    config.idf_table = j.at("idf_table").get<std::map<std::string, double>>();
  } else {
    config.endpoint = j.at("endpoint").get<std::string>();
  }
  config.validate();
}

std::uint64_t token_hash(std::string_view token, std::uint64_t seed) {
  std::uint64_t h = kFnvOffsetBasis ^ seed;
  for (const char c : token) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnvPrime;
  }
  return splitmix64_finalize(h);
}

std::map<std::string, double> compute_idf(std::span<const std::vector<std::string>> documents) {
  std::map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    for (const auto& t : std::set<std::string>(doc.begin(), doc.end())) ++df[t];
  }
  const auto n = static_cast<double>(documents.size());
  std::map<std::string, double> idf;
  for (const auto& [token, count] : df) {
    idf[token] = std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0;
  }
  return idf;
}

EmbeddingVector builtin_embed(std::span<const std::string> tokens, const EmbeddingConfig& config) {
  if (config.dim < 2) throw ConfigError("embedding dim must be at least 2");
  std::map<std::string_view, std::size_t> tf;
  for (const auto& t : tokens) ++tf[t];

  // Accumulate in sorted token order so the result is independent of token order.
  std::vector<double> buckets(config.dim, 0.0);
  for (const auto& [token, count] : tf) {
    const auto it = config.idf_table.find(std::string(token));
    if (it == config.idf_table.end() || it->second == 0.0) continue;
    const auto h = token_hash(token, config.hash_seed);
    const double sign = (h >> 63) == 0 ? 1.0 : -1.0;
    buckets[h % config.dim] += sign * static_cast<double>(count) * it->second;
  }
  try {
    return normalized(std::move(buckets));
  } catch (const DegenerateInputError&) {
    throw DegenerateInputError("no token carries weight in the idf table");
  }
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) {
    throw DimensionError("cosine of vectors with dims " + std::to_string(u.dim()) + " and " +
                         std::to_string(v.dim()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) dot += u.values[i] * v.values[i];
  if (!(dot >= -1.0 - kCosineSlack && dot <= 1.0 + kCosineSlack)) {
    throw NumericError("cosine " + std::to_string(dot) + " outside [-1, 1]; inputs not unit");
  }
  return dot;
}

std::vector<EmbeddingVector> EmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed_text(t));
  return out;
}

BuiltinEmbedder::BuiltinEmbedder(EmbeddingConfig config, CleaningConfig cleaning)
    : config_(std::move(config)), cleaning_(std::move(cleaning)) {
  if (config_.provider != ProviderKind::builtin_hash) {
    throw ConfigError("BuiltinEmbedder needs a builtin_hash config");
  }
  config_.validate();
}

BuiltinEmbedder BuiltinEmbedder::fit(std::span<const QARecord> corpus, EmbeddingConfig config,
                                     CleaningConfig cleaning) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.size());
  for (const auto& r : corpus) {
    docs.push_back(tokenize_normalize(clean_text(r.question, cleaning), cleaning));
  }
  config.idf_table = compute_idf(docs);
  return BuiltinEmbedder(std::move(config), std::move(cleaning));
}

EmbeddingVector BuiltinEmbedder::embed_text(std::string_view text) const {
  const auto cleaned = require_non_empty_clean(text, cleaning_);
  return builtin_embed(tokenize_normalize(cleaned, cleaning_), config_);
}

HttpEmbedder::HttpEmbedder(EmbeddingConfig config, CleaningConfig cleaning)
    : config_(std::move(config)), cleaning_(std::move(cleaning)) {
  if (config_.provider != ProviderKind::external_http) {
    throw ConfigError("HttpEmbedder needs an external_http config");
  }
  config_.validate();
  const std::string& url = *config_.endpoint;
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

EmbeddingVector HttpEmbedder::embed_text(std::string_view text) const {
  const std::string s(text);
  return embed_batch(std::span<const std::string>(&s, 1)).front();
}

std::vector<EmbeddingVector> HttpEmbedder::embed_batch(std::span<const std::string> texts) const {
  nlohmann::json body;
  body["texts"] = nlohmann::json::array();
  for (const auto& t : texts) body["texts"].push_back(require_non_empty_clean(t, cleaning_));

  const auto started = std::chrono::steady_clock::now();
  const auto elapsed_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 started)
        .count();
  };

  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  auto res = client.Post(path_prefix_ + "/embed", body.dump(), "application/json");
  if (!res) {
    throw ProviderError("embedding endpoint " + *config_.endpoint + " failed (" +
                        httplib::to_string(res.error()) + ") after " +
                        std::to_string(elapsed_ms()) + " ms");
  }
  if (res->status != 200) {
    throw ProviderError("embedding endpoint " + *config_.endpoint + " returned HTTP " +
                        std::to_string(res->status) + " after " + std::to_string(elapsed_ms()) +
                        " ms");
  }

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProviderError("embedding endpoint " + *config_.endpoint + " sent invalid JSON: " +
                        e.what());
  }
  if (!reply.contains("vectors") || !reply["vectors"].is_array()) {
    throw ProviderError("embedding endpoint reply lacks a \"vectors\" array");
  }
  if (reply.contains("dim") && reply["dim"].get<std::size_t>() != config_.dim) {
    throw DimensionError("embedding endpoint reports dim " +
                         std::to_string(reply["dim"].get<std::size_t>()) + ", configured " +
                         std::to_string(config_.dim));
  }
  if (reply["vectors"].size() != texts.size()) {
    throw ProviderError("embedding endpoint returned " + std::to_string(reply["vectors"].size()) +
                        " vectors for " + std::to_string(texts.size()) + " texts");
  }
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& v : reply["vectors"]) {
    auto raw = v.get<std::vector<double>>();
    if (raw.size() != config_.dim) {
      throw DimensionError("embedding endpoint returned a vector of dim " +
                           std::to_string(raw.size()) + ", configured " +
                           std::to_string(config_.dim));
    }
    out.push_back(normalized(std::move(raw)));
  }
  return out;
}

void VectorIndex::add(std::string id, EmbeddingVector vector) {
  if (vector.dim() != dim_) {
    throw DimensionError("index dim " + std::to_string(dim_) + ", vector dim " +
                         std::to_string(vector.dim()));
  }
  if (positions_.contains(id)) throw ValidationError("duplicate index id '" + id + "'");
  positions_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  vectors_.push_back(std::move(vector));
}

std::vector<ScoredEntry> VectorIndex::query(const EmbeddingVector& query, std::size_t k) const {
  if (query.dim() != dim_) {
    throw DimensionError("query dim " + std::to_string(query.dim()) + ", index dim " +
                         std::to_string(dim_));
  }
  if (k == 0) throw ConfigError("k must be at least 1");
  std::vector<ScoredEntry> scored;
  scored.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    scored.push_back({i, ids_[i], cosine_similarity(query, vectors_[i])});
  }
  const auto before = [](const ScoredEntry& a, const ScoredEntry& b) {
    return a.score > b.score || (a.score == b.score && a.position < b.position);
  };
  const auto keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), before);
  scored.resize(keep);
  return scored;
}

std::optional<std::size_t> VectorIndex::position_of(std::string_view id) const {
  const auto it = positions_.find(id);
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

VectorIndex build_index(std::span<const QARecord> corpus, const EmbeddingProvider& provider) {
  if (corpus.empty()) throw ConfigError("cannot build an index over an empty corpus");
  VectorIndex index(provider.dim());
  for (const auto& r : corpus) {
    try {
      index.add(r.id, provider.embed_text(r.question));
    } catch (const Error& e) {
      rethrow_with_context(e, "record " + r.id);
    }
  }
  return index;
}

std::vector<ScoredEntry> query_index(const VectorIndex& index, const EmbeddingVector& query,
                                     std::size_t k) {
  return index.query(query, k);
}

}  // namespace closedqa
