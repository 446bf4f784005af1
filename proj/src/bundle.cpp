#include "closedqa/bundle.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "closedqa/error.hpp"

namespace closedqa {

namespace fs = std::filesystem;

namespace {

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

std::string embeddings_json(const VectorIndex& index) {
  auto rows = nlohmann::json::array();
  for (std::size_t i = 0; i < index.size(); ++i) rows.push_back(index.vector(i).values);
  return rows.dump() + "\n";
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericError("SHA-256 computation failed");
  }
  std::string hex;
  hex.reserve(len * 2);
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::shared_ptr<const EmbeddingProvider> make_provider(const EmbeddingConfig& embedding,
                                                       const CleaningConfig& cleaning) {
  if (embedding.provider == ProviderKind::builtin_hash) {
    return std::make_shared<BuiltinEmbedder>(embedding, cleaning);
  }
  return std::make_shared<HttpEmbedder>(embedding, cleaning);
}

Engine build_engine(std::vector<QARecord> train_split, const EngineSpec& spec) {
  spec.inference.validate();
  spec.reward.validate();
  spec.training.validate();
  if (train_split.empty()) throw ConfigError("cannot build an engine from an empty training split");

  Engine engine;
  engine.cleaning = spec.cleaning;
  engine.embedding = spec.embedding;
  if (spec.embedding.provider == ProviderKind::builtin_hash) {
    auto fitted = BuiltinEmbedder::fit(train_split, spec.embedding, spec.cleaning);
    engine.embedding = fitted.config();
    engine.embedder = std::make_shared<BuiltinEmbedder>(std::move(fitted));
  } else {
    engine.embedder = make_provider(spec.embedding, spec.cleaning);
  }
  engine.index = build_index(train_split, *engine.embedder);
  auto trained = train(train_split, engine.index, spec.reward, spec.training);
  engine.qtable = std::move(trained.table);
  engine.training_report = std::move(trained.report);
  engine.corpus = std::move(train_split);
  engine.reward = spec.reward;
  engine.training = spec.training;
  engine.inference = spec.inference;
  engine.validate();
  return engine;
}

std::string save_bundle(const Engine& engine, const fs::path& dir) {
  if (!engine.loaded()) throw StateError("nothing to save: engine is not trained");
  engine.validate();

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create bundle directory " + dir.string() + ": " + ec.message());

  const auto corpus = to_jsonl(engine.corpus);
  const auto embeddings = embeddings_json(engine.index);
  const auto qtable = engine.qtable.serialize();

  const auto& rep = engine.training_report;
  nlohmann::json manifest = {
      {"format_version", kBundleFormatVersion},
      {"counts", {{"records", engine.corpus.size()}, {"dim", engine.index.dim()}}},
      {"embedding", engine.embedding},
      {"cleaning", engine.cleaning},
      {"reward", engine.reward},
      {"training", engine.training},
      {"inference", engine.inference},
      {"training_summary",
       {{"converged", rep.converged},
        {"sweeps_run", rep.sweeps_run},
        {"final_max_delta", rep.max_delta.empty() ? 0.0 : rep.max_delta.back()},
        {"max_delta", rep.max_delta},
        {"mean_reward", rep.mean_reward},
        {"epsilon", rep.epsilon}}},
      {"corpus_checksum", sha256_hex(corpus)},
      {"files",
       {{kCorpusFile, sha256_hex(corpus)},
        {kEmbeddingsFile, sha256_hex(embeddings)},
        {kQTableFile, sha256_hex(qtable)}}},
  };
  const auto manifest_text = manifest.dump(2) + "\n";

  write_bytes(dir / kCorpusFile, corpus);
  write_bytes(dir / kEmbeddingsFile, embeddings);
  write_bytes(dir / kQTableFile, qtable);
  write_bytes(dir / kManifestFile, manifest_text);
  return sha256_hex(manifest_text);
}

Engine load_bundle(const fs::path& dir, const std::optional<std::string>& endpoint_override) {
  const auto manifest_path = dir / kManifestFile;
  if (!fs::exists(manifest_path)) {
    throw MissingFileError("bundle " + dir.string() + " is missing " + kManifestFile);
  }
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_bytes(manifest_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string(kManifestFile) + " is not valid JSON: " + e.what());
  }

  const auto version = manifest.value("format_version", -1);
  if (version != kBundleFormatVersion) {
    throw VersionError("bundle format version " + std::to_string(version) +
                       " is not supported (expected " + std::to_string(kBundleFormatVersion) + ")");
  }

  std::map<std::string, std::string> contents;
  for (const char* name : {kCorpusFile, kEmbeddingsFile, kQTableFile}) {
    const auto path = dir / name;
    if (!fs::exists(path)) {
      throw MissingFileError("bundle " + dir.string() + " is missing " + name);
    }
    contents[name] = read_bytes(path);
  }
  try {
    for (const char* name : {kCorpusFile, kEmbeddingsFile, kQTableFile}) {
      const auto expected = manifest.at("files").at(name).get<std::string>();
      if (sha256_hex(contents[name]) != expected) {
        throw ChecksumError(std::string(name) + " does not match its manifest checksum");
      }
    }
    if (manifest.at("corpus_checksum").get<std::string>() != sha256_hex(contents[kCorpusFile])) {
      throw ChecksumError(std::string(kCorpusFile) + " does not match the corpus checksum");
    }

    Engine engine;
    engine.cleaning = manifest.at("cleaning").get<CleaningConfig>();
    engine.embedding = manifest.at("embedding").get<EmbeddingConfig>();
    if (endpoint_override && engine.embedding.provider == ProviderKind::external_http) {
      engine.embedding.endpoint = *endpoint_override;
    }
    engine.reward = manifest.at("reward").get<RewardSpec>();
    engine.training = manifest.at("training").get<TrainingConfig>();
    engine.inference = manifest.at("inference").get<InferenceConfig>();
    const auto& summary = manifest.at("training_summary");
    engine.training_report.converged = summary.at("converged").get<bool>();
    engine.training_report.sweeps_run = summary.at("sweeps_run").get<std::size_t>();
    engine.training_report.max_delta = summary.value("max_delta", std::vector<double>{});
    engine.training_report.mean_reward = summary.value("mean_reward", std::vector<double>{});
    engine.training_report.epsilon = summary.value("epsilon", std::vector<double>{});

    {
      std::istringstream lines(contents[kCorpusFile]);
      std::string line;
      while (std::getline(lines, line)) {
        if (!line.empty()) engine.corpus.push_back(nlohmann::json::parse(line).get<QARecord>());
      }
    }

    const auto vectors = nlohmann::json::parse(contents[kEmbeddingsFile]);
    const auto dim = manifest.at("counts").at("dim").get<std::size_t>();
    if (dim != engine.embedding.dim) {
      throw ConsistencyError("manifest dim " + std::to_string(dim) + " differs from embedding dim " +
                             std::to_string(engine.embedding.dim));
    }
    if (vectors.size() != engine.corpus.size()) {
      throw ConsistencyError(std::string(kEmbeddingsFile) + " holds " +
                             std::to_string(vectors.size()) + " vectors for " +
                             std::to_string(engine.corpus.size()) + " records");
    }
    engine.index = VectorIndex(dim);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      EmbeddingVector v{vectors[i].get<std::vector<double>>()};
      check_unit_norm(v);
      engine.index.add(engine.corpus[i].id, std::move(v));
    }

    engine.qtable = QTable::parse(contents[kQTableFile]);
    const auto records = manifest.at("counts").at("records").get<std::size_t>();
    if (records != engine.corpus.size()) {
      throw ConsistencyError("manifest lists " + std::to_string(records) + " records, " +
                             std::string(kCorpusFile) + " has " +
                             std::to_string(engine.corpus.size()));
    }
    engine.embedder = make_provider(engine.embedding, engine.cleaning);
    engine.validate();
    return engine;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("malformed bundle " + dir.string() + ": " + e.what());
  }
}

}  // namespace closedqa
