#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "closedqa/inference.hpp"

namespace closedqa {

inline constexpr int kBundleFormatVersion = 1;

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kCorpusFile = "corpus.jsonl";
inline constexpr const char* kEmbeddingsFile = "embeddings.json";
inline constexpr const char* kQTableFile = "qtable.json";

std::string sha256_hex(std::string_view data);

struct EngineSpec {
  CleaningConfig cleaning;
  EmbeddingConfig embedding;
  RewardSpec reward;
  TrainingConfig training;
  InferenceConfig inference;
};

// Fits the embedder (idf over the training questions for builtin_hash),
// indexes the questions and trains the Q-table.
Engine build_engine(std::vector<QARecord> train_split, const EngineSpec& spec);

// Creates the provider an EmbeddingConfig describes.
std::shared_ptr<const EmbeddingProvider> make_provider(const EmbeddingConfig& embedding,
                                                       const CleaningConfig& cleaning);

// Writes manifest.json, corpus.jsonl, embeddings.json and qtable.json. Output
// bytes depend only on the engine state. Returns the manifest's SHA-256.
std::string save_bundle(const Engine& engine, const std::filesystem::path& dir);

// Validates version, presence and checksum of every file and the size
// invariants before returning a ready engine. `endpoint_override` replaces
// the external embedding endpoint recorded in the manifest.
Engine load_bundle(const std::filesystem::path& dir,
                   const std::optional<std::string>& endpoint_override = std::nullopt);

}  // namespace closedqa
