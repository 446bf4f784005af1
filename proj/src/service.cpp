#include "closedqa/service.hpp"

#include <chrono>
#include <vector>

#include "closedqa/error.hpp"
#include "closedqa/eval.hpp"
#include "httplib.h"

namespace closedqa {

namespace {

HttpReply error_reply(int status, std::string code, std::string message) {
  return {status, nlohmann::json{{"error", std::move(code)}, {"message", std::move(message)}}};
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

ChatService::ChatService(ServiceOptions options) : options_(std::move(options)) {}

void ChatService::load(std::shared_ptr<const Engine> engine) {
  if (engine) engine->validate();
  std::lock_guard lock(engine_mutex_);
  engine_ = std::move(engine);
}

std::shared_ptr<const Engine> ChatService::engine() const {
  std::lock_guard lock(engine_mutex_);
  return engine_;
}

void ChatService::record(double latency_ms) {
  std::lock_guard lock(latency_mutex_);
  latencies_.push_back(latency_ms);
  while (latencies_.size() > options_.latency_window) latencies_.pop_front();
}

HttpReply ChatService::handle_chat(std::string_view body) {
  const auto started = std::chrono::steady_clock::now();
  ++requests_;
  auto reply = [&]() -> HttpReply {
    nlohmann::json request;
    try {
      request = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      return error_reply(400, "malformed_json", e.what());
    }
    if (!request.is_object() || !request.contains("question")) {
      return error_reply(400, "missing_field", "request body needs a \"question\" string");
    }
    if (!request["question"].is_string()) {
      return error_reply(400, "invalid_field", "\"question\" must be a string");
    }
    const auto engine = this->engine();
    if (!engine || !engine->loaded()) {
      return error_reply(503, "engine_not_loaded", "no engine bundle is loaded");
    }
    try {
      const auto result =
          answer_query(request["question"].get<std::string>(), *engine, engine->inference);
      switch (result.confidence) {
        case Confidence::relevant: ++relevant_; break;
        case Confidence::fairly_relevant: ++fairly_relevant_; break;
        case Confidence::not_relevant: ++not_relevant_; break;
      }
      nlohmann::json out = result;
      if (request.contains("session_id") && request["session_id"].is_string()) {
        out["session_id"] = request["session_id"];
      }
      return {200, std::move(out)};
    } catch (const DegenerateInputError& e) {
      return error_reply(422, "degenerate_input", e.what());
    } catch (const StateError& e) {
      return error_reply(503, "engine_not_loaded", e.what());
    } catch (const std::exception& e) {
      return error_reply(500, "internal", e.what());
    }
  }();
  if (reply.status != 200) ++errors_;
  const double latency = elapsed_ms(started);
  if (reply.status == 200) reply.body["latency_ms"] = latency;
  record(latency);
  return reply;
}

HttpReply ChatService::health() const {
  const auto engine = this->engine();
  return {200, nlohmann::json{{"status", "ok"}, {"bundle_loaded", engine && engine->loaded()}}};
}

HttpReply ChatService::stats() const {
  std::vector<double> sample;
  {
    std::lock_guard lock(latency_mutex_);
    sample.assign(latencies_.begin(), latencies_.end());
  }
  const auto engine = this->engine();
  return {200, nlohmann::json{
                   {"requests", requests_.load()},
                   {"errors", errors_.load()},
                   {"latency_ms", {{"p50", percentile(sample, 50.0)}, {"p95", percentile(sample, 95.0)}}},
                   {"corpus_size", engine ? engine->corpus.size() : 0},
                   {"tiers",
                    {{"relevant", relevant_.load()},
                     {"fairly_relevant", fairly_relevant_.load()},
                     {"not_relevant", not_relevant_.load()}}},
               }};
}

void ChatService::mount(httplib::Server& server) {
  // httplib closes a keep-alive connection after 5 requests by default, and
  // clients reconnecting in bulk overflow the listen backlog
  server.set_keep_alive_max_count(options_.keep_alive_max_count);
  const auto send = [this](httplib::Response& res, const HttpReply& reply) {
    res.status = reply.status;
    res.set_header("Access-Control-Allow-Origin", options_.cors_origin);
    res.set_content(reply.body.dump(), "application/json");
  };
  server.Post("/v1/chat", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, handle_chat(req.body));
  });
  server.Get("/v1/health", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, health());
  });
  server.Get("/v1/stats", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, stats());
  });
  server.Options(R"(/v1/.*)", [this](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Origin", options_.cors_origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  server.set_error_handler([this](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    res.set_header("Access-Control-Allow-Origin", options_.cors_origin);
    res.set_content(nlohmann::json{{"error", res.status == 404 ? "not_found" : "http_error"},
                                   {"message", httplib::status_message(res.status)}}
                        .dump(),
                    "application/json");
  });
  server.set_exception_handler(
      [this](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "unexpected failure";
        try {
          if (ep) std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          message = e.what();
        } catch (...) {
        }
        res.status = 500;
        res.set_header("Access-Control-Allow-Origin", options_.cors_origin);
        res.set_content(nlohmann::json{{"error", "internal"}, {"message", message}}.dump(),
                        "application/json");
      });
}

}  // namespace closedqa
