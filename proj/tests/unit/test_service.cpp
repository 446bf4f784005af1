#include <thread>

#include "closedqa/service.hpp"
#include "doctest.h"
#include "httplib.h"
#include "support.hpp"

using namespace closedqa;

namespace {

struct LiveServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit LiveServer(ChatService& service) {
    service.mount(server);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
};

std::string chat_body(const std::string& question) {
  return nlohmann::json{{"question", question}}.dump();
}

}  // namespace

TEST_CASE("handle_chat status codes") {
  ChatService service;
  const auto question = closedqa::testing::fixture_engine()->corpus[0].question;

  auto r = service.handle_chat(chat_body(question));
  CHECK(r.status == 503);
  CHECK(r.body.at("error") == "engine_not_loaded");

  service.load(closedqa::testing::fixture_engine());
  r = service.handle_chat(chat_body(question));
  REQUIRE(r.status == 200);
  CHECK(r.body.at("similarity").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.body.at("confidence") == "relevant");
  for (const char* field : {"answer", "matched_question_id", "similarity", "q_value", "confidence",
                            "latency_ms"}) {
    CHECK(r.body.contains(field));
  }

  r = service.handle_chat(R"({"q": "hello"})");
  CHECK(r.status == 400);
  CHECK(r.body.at("error") == "missing_field");
  r = service.handle_chat("{not json");
  CHECK(r.status == 400);
  CHECK(r.body.at("error") == "malformed_json");
  r = service.handle_chat(R"({"question": 5})");
  CHECK(r.status == 400);
  r = service.handle_chat(R"({"question": "?!"})");
  CHECK(r.status == 422);
  CHECK(r.body.at("error") == "degenerate_input");
}

TEST_CASE("session_id is echoed") {
  ChatService service;
  service.load(closedqa::testing::fixture_engine());
  const auto r = service.handle_chat(R"({"question": "zakat on gold", "session_id": "abc"})");
  REQUIRE(r.status == 200);
  CHECK(r.body.at("session_id") == "abc");
}

TEST_CASE("health and stats") {
  ChatService service;
  auto h = service.health();
  CHECK(h.body.at("status") == "ok");
  CHECK(h.body.at("bundle_loaded") == false);

  service.load(closedqa::testing::fixture_engine());
  CHECK(service.health().body.at("bundle_loaded") == true);
  for (int i = 0; i < 10; ++i) service.handle_chat(chat_body("fasting while travelling"));
  const auto s = service.stats().body;
  CHECK(s.at("requests") == 10);
  const double p50 = s.at("latency_ms").at("p50"), p95 = s.at("latency_ms").at("p95");
  CHECK(p50 >= 0.0);
  CHECK(p50 <= p95);
  CHECK(s.at("corpus_size") == closedqa::testing::fixture_engine()->corpus.size());
  const auto& tiers = s.at("tiers");
  CHECK(tiers.at("relevant").get<int>() + tiers.at("fairly_relevant").get<int>() +
            tiers.at("not_relevant").get<int>() ==
        10);
}

TEST_CASE("HTTP routes, CORS and JSON errors") {
  ServiceOptions opts;
  opts.cors_origin = "http://localhost:5173";
  ChatService service(opts);
  LiveServer live(service);
  httplib::Client client("127.0.0.1", live.port);

  auto res = client.Get("/v1/health");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Access-Control-Allow-Origin") == "http://localhost:5173");
  CHECK(nlohmann::json::parse(res->body).at("bundle_loaded") == false);

  res = client.Post("/v1/chat", chat_body("zakat"), "application/json");
  REQUIRE(res);
  CHECK(res->status == 503);

  service.load(closedqa::testing::fixture_engine());
  const auto& first = closedqa::testing::fixture_engine()->corpus[3];
  res = client.Post("/v1/chat", chat_body(first.question), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  const auto body = nlohmann::json::parse(res->body);
  CHECK(body.at("answer_id") == first.id);
  CHECK(body.at("confidence") == "relevant");

  res = client.Post("/v1/chat", "{oops", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  CHECK(nlohmann::json::parse(res->body).contains("error"));

  res = client.Get("/v1/nothing");
  REQUIRE(res);
  CHECK(res->status == 404);
  CHECK(nlohmann::json::parse(res->body).at("error") == "not_found");

  res = client.Options("/v1/chat");
  REQUIRE(res);
  CHECK(res->status == 204);
  CHECK(res->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);

  res = client.Get("/v1/stats");
  REQUIRE(res);
  CHECK(nlohmann::json::parse(res->body).at("requests") == 3);
}

TEST_CASE("hot swap: every request sees exactly one engine") {
  // engine B answers every question with a single record
  auto base = closedqa::testing::fixture_engine();
  auto b = std::make_shared<Engine>(*base);
  b->corpus.resize(1);
  VectorIndex idx(base->index.dim());
  idx.add(base->index.id(0), base->index.vector(0));
  b->index = idx;
  b->qtable = QTable(1, 1);

  ChatService service;
  service.load(base);
  std::atomic<bool> stop{false};
  std::thread swapper([&] {
    for (int i = 0; !stop; ++i) service.load(i % 2 ? base : std::shared_ptr<const Engine>(b));
  });
  const auto& probe = base->corpus[5];
  int from_a = 0, from_b = 0;
  for (int i = 0; i < 300; ++i) {
    const auto r = service.handle_chat(chat_body(probe.question));
    REQUIRE(r.status == 200);
    const auto id = r.body.at("answer_id").get<std::string>();
    if (id == probe.id) {
      ++from_a;
      CHECK(r.body.at("similarity").get<double>() == doctest::Approx(1.0).epsilon(1e-9));
    } else {
      ++from_b;
      CHECK(id == base->corpus[0].id);
    }
  }
  stop = true;
  swapper.join();
  CHECK(from_a + from_b == 300);
}
