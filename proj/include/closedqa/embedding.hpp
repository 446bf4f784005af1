#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "closedqa/text.hpp"
#include "json.hpp"

namespace closedqa {

struct QARecord;

// Unit-length dense vector. Providers normalize before handing one out.
struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dim() const noexcept { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

// Throws NumericError unless every component is finite and the L2 norm is
// 1 +/- 1e-6.
void check_unit_norm(const EmbeddingVector& v);

// Scales `raw` to unit length; DegenerateInputError for a zero or non-finite vector.
EmbeddingVector normalized(std::vector<double> raw);

enum class ProviderKind { builtin_hash, external_http };

std::string to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(std::string_view name);

// Fixed parameters of the builtin hashing embedder. They are written to the
// bundle manifest so an index can be rebuilt bit-for-bit elsewhere.
inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
inline constexpr std::uint64_t kDefaultHashSeed = 0x51a7c0de5eed2025ULL;
inline constexpr const char* kHashAlgorithm = "fnv1a64-splitmix64";
inline constexpr const char* kSignConvention = "positive-if-bit63-clear";

struct EmbeddingConfig {
  ProviderKind provider = ProviderKind::builtin_hash;
  std::size_t dim = 256;
  std::optional<std::string> endpoint;
  std::chrono::milliseconds timeout{10'000};
  std::uint64_t hash_seed = kDefaultHashSeed;
  std::map<std::string, double> idf_table;

  // ConfigError on dim < 2 or an endpoint that does not match the provider.
  void validate() const;

  bool operator==(const EmbeddingConfig&) const = default;
};

void to_json(nlohmann::json& j, const EmbeddingConfig& config);
void from_json(const nlohmann::json& j, EmbeddingConfig& config);

// Stable token hash: FNV-1a over the bytes, basis xor seed, then the
// splitmix64 finalizer.
std::uint64_t token_hash(std::string_view token, std::uint64_t seed);

// Smoothed inverse document frequency, ln((1 + N) / (1 + df)) + 1, over the
// token sets of the given documents.
std::map<std::string, double> compute_idf(std::span<const std::vector<std::string>> documents);

// Hashed tf-idf bag of words. Tokens absent from the idf table weigh 0.
EmbeddingVector builtin_embed(std::span<const std::string> tokens, const EmbeddingConfig& config);

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

// Provider contract. embed_text takes raw text and cleans it itself; text that
// is empty after cleaning raises DegenerateInputError.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::size_t dim() const = 0;
  virtual EmbeddingVector embed_text(std::string_view text) const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const;
};

class BuiltinEmbedder final : public EmbeddingProvider {
 public:
  BuiltinEmbedder(EmbeddingConfig config, CleaningConfig cleaning);

  // Fits the idf table on the cleaned questions of `corpus`.
  static BuiltinEmbedder fit(std::span<const QARecord> corpus, EmbeddingConfig config,
                             CleaningConfig cleaning);

  std::size_t dim() const override { return config_.dim; }
  EmbeddingVector embed_text(std::string_view text) const override;

  const EmbeddingConfig& config() const { return config_; }
  const CleaningConfig& cleaning() const { return cleaning_; }

 private:
  EmbeddingConfig config_;
  CleaningConfig cleaning_;
};

// Calls POST {endpoint}/embed with {"texts": [...]} and expects
// {"vectors": [[...], ...], "dim": n}. Returned vectors are normalized here.
class HttpEmbedder final : public EmbeddingProvider {
 public:
  HttpEmbedder(EmbeddingConfig config, CleaningConfig cleaning);

  std::size_t dim() const override { return config_.dim; }
  EmbeddingVector embed_text(std::string_view text) const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) const override;

  const EmbeddingConfig& config() const { return config_; }

 private:
  EmbeddingConfig config_;
  CleaningConfig cleaning_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

struct ScoredEntry {
  std::size_t position;  // corpus order
  std::string id;
  double score;

  bool operator==(const ScoredEntry&) const = default;
};

class VectorIndex {
 public:
  VectorIndex() = default;
  explicit VectorIndex(std::size_t dim) : dim_(dim) {}

  // DimensionError on mismatch, ValidationError on a duplicate id.
  void add(std::string id, EmbeddingVector vector);

  // Exhaustive cosine scan; score descending, ties by corpus order.
  std::vector<ScoredEntry> query(const EmbeddingVector& query, std::size_t k) const;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::string& id(std::size_t position) const { return ids_.at(position); }
  const EmbeddingVector& vector(std::size_t position) const { return vectors_.at(position); }
  std::optional<std::size_t> position_of(std::string_view id) const;

  bool operator==(const VectorIndex&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<EmbeddingVector> vectors_;
  std::map<std::string, std::size_t, std::less<>> positions_;
};

// One entry per record in corpus order, embedding each question. Provider
// failures are rethrown with the record id prepended.
VectorIndex build_index(std::span<const QARecord> corpus, const EmbeddingProvider& provider);

std::vector<ScoredEntry> query_index(const VectorIndex& index, const EmbeddingVector& query,
                                     std::size_t k);

}  // namespace closedqa
