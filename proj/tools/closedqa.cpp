// closedqa: prepare a QA corpus, train the answer-selection policy, evaluate
// it and serve it over HTTP.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "closedqa/bundle.hpp"
#include "closedqa/error.hpp"
#include "closedqa/eval.hpp"
#include "closedqa/pipeline.hpp"
#include "closedqa/service.hpp"
#include "httplib.h"

namespace fs = std::filesystem;
using namespace closedqa;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::validation:
    case ErrorKind::schema:
    case ErrorKind::degenerate_input:
    case ErrorKind::dimension_mismatch:
    case ErrorKind::consistency:
      return kExitValidation;
    default:
      return kExitIo;
  }
}

fs::path default_data_file(const char* name) {
  const fs::path p = fs::path(CLOSEDQA_DATA_DIR) / name;
  return fs::exists(p) ? p : fs::path{};
}

httplib::Server* g_server = nullptr;

void stop_server(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-domain QA engine: ingest, train, eval, serve, ask"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Filter, clean, deduplicate, summarize and split a raw corpus");
  fs::path ingest_in, ingest_out;
  std::string ingest_format;
  fs::path stopwords_file = default_data_file("stopwords_en.txt");
  fs::path stem_rules_file;
  IngestConfig icfg;
  std::vector<std::string> categories, allowed;
  ingest->add_option("--in", ingest_in, "Raw corpus (.csv or .jsonl)")->required();
  ingest->add_option("--out", ingest_out, "Output directory")->required();
  ingest->add_option("--format", ingest_format, "csv or jsonl (default: from extension)");
  ingest->add_option("--stopwords", stopwords_file, "Stopword list, one token per line");
  ingest->add_option("--stem-rules", stem_rules_file, "Suffix rules, '<suffix> [replacement]' per line");
  ingest->add_option("--dedup-threshold", icfg.dedup_threshold, "Cosine threshold for duplicates")
      ->capture_default_str();
  ingest->add_option("--min-answer-words", icfg.filter.min_answer_words)->capture_default_str();
  ingest->add_option("--categories", categories, "Configured category set")->delimiter(',');
  ingest->add_option("--allow-categories", allowed, "Category whitelist")->delimiter(',');
  ingest->add_option("--ratio", icfg.split_ratio, "Train fraction")->capture_default_str();
  ingest->add_option("--seed", icfg.seed)->capture_default_str();
  ingest->add_option("--summary-sentences", icfg.summary_sentences)->capture_default_str();
  ingest->add_option("--summarize-over", icfg.summarize_over_words,
                     "Summarize answers longer than this many words")
      ->capture_default_str();
  ingest->add_option("--dim", icfg.embedding.dim, "Builtin embedding dimension")->capture_default_str();

  // train
  auto* train_cmd = app.add_subcommand("train", "Embed the training split and learn the Q-table");
  fs::path corpus_dir, bundle_out;
  EngineSpec spec;
  std::string embedder = "builtin";
  std::string endpoint;
  train_cmd->add_option("--corpus", corpus_dir, "Directory written by ingest")->required();
  train_cmd->add_option("--out", bundle_out, "Bundle directory")->required();
  train_cmd->add_option("--alpha", spec.training.alpha)->capture_default_str();
  train_cmd->add_option("--gamma", spec.training.gamma)->capture_default_str();
  train_cmd->add_option("--epsilon", spec.training.epsilon)->capture_default_str();
  train_cmd->add_option("--epsilon-final", spec.training.epsilon_final)->capture_default_str();
  train_cmd->add_option("--episodes", spec.training.episodes)->capture_default_str();
  train_cmd->add_option("--tol", spec.training.convergence_tol)->capture_default_str();
  train_cmd->add_option("--seed", spec.training.seed)->capture_default_str();
  train_cmd->add_option("--candidate-k", spec.training.candidate_k)->capture_default_str();
  train_cmd->add_option("--top-k", spec.inference.top_k)->capture_default_str();
  train_cmd->add_option("--lambda", spec.inference.lambda)->capture_default_str();
  train_cmd->add_option("--dim", spec.embedding.dim)->capture_default_str();
  train_cmd->add_option("--embedder", embedder, "builtin or external")->capture_default_str();
  train_cmd->add_option("--endpoint", endpoint, "External embedding endpoint URL");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Run a scenario file against a bundle");
  fs::path bundle_dir, scenarios_file;
  std::optional<double> lambda_override;
  std::optional<std::size_t> top_k_override;
  eval_cmd->add_option("--bundle", bundle_dir)->required();
  eval_cmd->add_option("--scenarios", scenarios_file)->required();
  eval_cmd->add_option("--lambda", lambda_override);
  eval_cmd->add_option("--top-k", top_k_override);

  // gen-paraphrases
  auto* gen = app.add_subcommand("gen-paraphrases", "Write a paraphrase scenario file from a bundle corpus");
  ParaphraseOptions popts;
  fs::path synonyms_file, scenarios_out;
  gen->add_option("--bundle", bundle_dir)->required();
  gen->add_option("--n", popts.per_question, "Variants per question")->capture_default_str();
  gen->add_option("--questions", popts.questions, "Number of sampled questions (default: all)");
  gen->add_option("--dropout", popts.dropout)->capture_default_str();
  gen->add_option("--seed", popts.seed)->capture_default_str();
  gen->add_option("--synonyms", synonyms_file, "Tab separated synonym table");
  gen->add_option("--out", scenarios_out)->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the chat API");
  int port = 8080;
  std::string host = "0.0.0.0";
  ServiceOptions sopts;
  std::string embed_override;
  serve->add_option("--bundle", bundle_dir, "Bundle to load (omit to start empty)")
      ->envname("CLOSEDQA_BUNDLE");
  serve->add_option("--port", port)->envname("CLOSEDQA_PORT")->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--cors-origin", sopts.cors_origin)
      ->envname("CLOSEDQA_CORS_ORIGIN")
      ->capture_default_str();
  serve->add_option("--embed-endpoint", embed_override, "Override the external embedding endpoint")
      ->envname("CLOSEDQA_EMBED_ENDPOINT");

  // ask
  auto* ask = app.add_subcommand("ask", "Answer one question");
  std::string question;
  ask->add_option("--bundle", bundle_dir)->required();
  ask->add_option("question", question)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitIo;
  }

  try {
    if (*ingest) {
      if (!categories.empty()) icfg.categories = {categories.begin(), categories.end()};
      if (!allowed.empty()) icfg.filter.allowed_categories = std::set<std::string>(allowed.begin(), allowed.end());
      if (!stopwords_file.empty()) icfg.cleaning.stopwords = load_stopwords(stopwords_file);
      if (!stem_rules_file.empty()) icfg.cleaning.set_stem_rules(load_stem_rules(stem_rules_file));
      const auto format = ingest_format.empty() ? raw_format_from_path(ingest_in)
                          : ingest_format == "csv" ? RawFormat::csv
                          : ingest_format == "jsonl"
                              ? RawFormat::jsonl
                              : throw ConfigError("unknown format '" + ingest_format + "'");
      const auto raw = load_raw(ingest_in, format, icfg.categories);
      const auto result = run_ingest(raw, icfg);
      write_ingest_output(result, icfg, ingest_out);
      std::cout << result.report().dump(2) << "\n";
      return 0;
    }

    if (*train_cmd) {
      spec.cleaning = load_cleaning(corpus_dir);
      spec.embedding.provider = provider_kind_from_string(embedder);
      if (!endpoint.empty()) spec.embedding.endpoint = endpoint;
      auto records = read_jsonl(corpus_dir / kTrainFile);
      const auto engine = build_engine(std::move(records), spec);
      const auto checksum = save_bundle(engine, bundle_out);
      nlohmann::json out{{"bundle", bundle_out.string()},
                         {"manifest_sha256", checksum},
                         {"records", engine.corpus.size()},
                         {"training", engine.training_report}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*eval_cmd) {
      const auto engine = load_bundle(bundle_dir);
      auto cfg = engine.inference;
      if (lambda_override) cfg.lambda = *lambda_override;
      if (top_k_override) cfg.top_k = *top_k_override;
      const auto report = run_eval(read_scenarios(scenarios_file), engine, cfg);
      std::cout << nlohmann::json(report).dump(2) << "\n";
      std::cerr << format_report(report);
      return 0;
    }

    if (*gen) {
      const auto engine = load_bundle(bundle_dir);
      if (!synonyms_file.empty()) popts.synonyms = load_synonyms(synonyms_file);
      const auto scenarios = generate_paraphrases(engine.corpus, engine.cleaning, popts);
      write_scenarios(scenarios_out, scenarios);
      std::cerr << "wrote " << scenarios.size() << " scenarios to " << scenarios_out << "\n";
      return 0;
    }

    if (*serve) {
      ChatService service(sopts);
      if (!bundle_dir.empty()) {
        std::optional<std::string> override_endpoint;
        if (!embed_override.empty()) override_endpoint = embed_override;
        service.load(std::make_shared<const Engine>(load_bundle(bundle_dir, override_endpoint)));
      }
      httplib::Server server;
      service.mount(server);
      g_server = &server;
      std::signal(SIGINT, stop_server);
      std::signal(SIGTERM, stop_server);
      std::cerr << "listening on " << host << ":" << port
                << (bundle_dir.empty() ? " (no bundle loaded)" : "") << "\n";
      if (!server.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
      return 0;
    }

    if (*ask) {
      const auto engine = load_bundle(bundle_dir);
      const auto result = answer_query(question, engine, engine.inference);
      std::cout << nlohmann::json(result).dump(2) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}
