#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "closedqa/inference.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace closedqa {

struct ServiceOptions {
  std::string cors_origin = "*";
  std::size_t latency_window = 8192;  // samples kept for the stats percentiles
  std::size_t keep_alive_max_count = 10000;
};

struct HttpReply {
  int status = 200;
  nlohmann::json body;
};

// Request handling for the chat API, independent of the socket layer. The
// engine is swapped atomically: a request works against exactly the engine it
// picked up when it started.
class ChatService {
 public:
  explicit ChatService(ServiceOptions options = {});

  void load(std::shared_ptr<const Engine> engine);
  std::shared_ptr<const Engine> engine() const;

  // POST /v1/chat. 400 for malformed JSON or a missing "question", 422 when
  // the question cleans to nothing, 503 without an engine, 500 otherwise.
  HttpReply handle_chat(std::string_view body);

  HttpReply health() const;  // GET /v1/health
  HttpReply stats() const;   // GET /v1/stats

  // Registers the routes, including CORS preflight, on `server`.
  void mount(httplib::Server& server);

  const ServiceOptions& options() const { return options_; }

 private:
  void record(double latency_ms);

  ServiceOptions options_;
  mutable std::mutex engine_mutex_;
  std::shared_ptr<const Engine> engine_;

  std::atomic<std::uint64_t> requests_{0};
  std::atomic<std::uint64_t> errors_{0};
  std::atomic<std::uint64_t> relevant_{0};
  std::atomic<std::uint64_t> fairly_relevant_{0};
  std::atomic<std::uint64_t> not_relevant_{0};
  mutable std::mutex latency_mutex_;
  std::deque<double> latencies_;
};

}  // namespace closedqa
