#include <atomic>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "skillchair/error.hpp"
#include "skillchair/gateway.hpp"
#include "skillchair/log_io.hpp"
#include "skillchair/replay.hpp"
#include "skillchair/session_store.hpp"
#include "test_util.hpp"

using namespace skillchair;
using nlohmann::json;
using testutil::grid_samples;
using testutil::TempDir;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ConfigError;
}

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

GatewayOptions test_gateway(const std::filesystem::path& root) {
  GatewayOptions o;
  o.port = 0;
  o.store_root = root;
  return o;
}

}  // namespace

TEST_CASE("first batch is acknowledged with count and next seq") {
  TempDir dir("store");
  SessionStore store(dir.path());
  const auto ack = store.post_batch("p01", "s1", 0, grid_samples(0, 100));
  CHECK(ack.accepted_count == 100);
  CHECK(ack.next_expected_seq == 1);
  CHECK_FALSE(ack.duplicate);
  CHECK_FALSE(ack.gap);
}

TEST_CASE("resending a persisted batch re-acks without new rows") {
  TempDir dir("store");
  SessionStore store(dir.path());
  const auto first = store.post_batch("p01", "s1", 0, grid_samples(0, 100));
  store.post_batch("p01", "s1", 1, grid_samples(100, 100));
  const auto again = store.post_batch("p01", "s1", 0, grid_samples(0, 100));
  CHECK(again.accepted_count == first.accepted_count);
  CHECK(again.next_expected_seq == 2);
  CHECK(again.duplicate);
  CHECK(line_count(dir / "p01/s1/samples.jsonl") == 200);
  store.close_session("p01", "s1", Skill::high);
  const auto log = store.load_log("p01", "s1");
  CHECK(log.samples == grid_samples(0, 200));
  CHECK(log.skill == Skill::high);
}

TEST_CASE("a skipped sequence number is accepted and recorded as a gap") {
  TempDir dir("store");
  SessionStore store(dir.path());
  store.post_batch("p01", "s1", 0, grid_samples(0, 100));
  const auto ack = store.post_batch("p01", "s1", 3, grid_samples(300, 100));
  CHECK(ack.gap);
  CHECK(ack.next_expected_seq == 4);
  const auto info = store.info("p01", "s1");
  REQUIRE(info.has_value());
  REQUIRE(info->gaps.size() == 1);
  CHECK(info->gaps[0] == std::pair<std::uint64_t, std::uint64_t>{1, 3});
  CHECK(code_of([&] { store.post_batch("p01", "s1", 2, grid_samples(200, 100)); }) == ErrorCode::SchemaError);
}

TEST_CASE("batch validation names the sample index and field") {
  TempDir dir("store");
  SessionStore store(dir.path());
  auto samples = grid_samples(0, 10);
  samples[4].gx = std::numeric_limits<double>::quiet_NaN();
  try {
    store.post_batch("p01", "s1", 0, samples);
    FAIL("expected SchemaError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaError);
    CHECK(e.subject() == "samples[4].gx");
  }
  samples = grid_samples(0, 10);
  samples[6].t = samples[5].t;
  CHECK(code_of([&] { store.post_batch("p01", "s1", 0, samples); }) == ErrorCode::SchemaError);
  CHECK(code_of([&] { store.post_batch("../x", "s1", 0, grid_samples(0, 1)); }) == ErrorCode::SchemaError);

  store.post_batch("p01", "s1", 0, grid_samples(100, 10));
  CHECK(code_of([&] { store.post_batch("p01", "s1", 1, grid_samples(50, 10)); }) == ErrorCode::SchemaError);
}

TEST_CASE("close errors") {
  TempDir dir("store");
  SessionStore store(dir.path());
  CHECK(code_of([&] { store.close_session("nobody", "s1", Skill::low); }) == ErrorCode::UnknownSession);
  store.post_batch("p01", "s1", 0, grid_samples(0, 100));
  store.post_batch("p01", "s1", 1, grid_samples(100, 100));
  store.post_batch("p01", "s1", 2, grid_samples(200, 100));
  const auto info = store.close_session("p01", "s1", Skill::low);
  CHECK(info.sample_count == 300);
  CHECK(store.load_log("p01", "s1").samples.size() == 300);
  CHECK(code_of([&] { store.close_session("p01", "s1", Skill::low); }) == ErrorCode::AlreadyClosed);
  CHECK(code_of([&] { store.post_batch("p01", "s1", 3, grid_samples(300, 1)); }) == ErrorCode::AlreadyClosed);
  CHECK(code_of([&] { store.load_log("p01", "nope"); }) == ErrorCode::UnknownSession);
}

TEST_CASE("empty sealed session loads as a log with no samples") {
  TempDir dir("store");
  SessionStore store(dir.path());
  store.post_batch("p02", "s1", 0, {});
  store.close_session("p02", "s1", Skill::high);
  const auto log = store.load_log("p02", "s1");
  CHECK(log.samples.empty());
  CHECK(log.skill == Skill::high);
}

TEST_CASE("truncated last line of a sealed session is CorruptLog with a line number") {
  TempDir dir("store");
  {
    SessionStore store(dir.path());
    store.post_batch("p01", "s1", 0, grid_samples(0, 50));
    store.close_session("p01", "s1", Skill::low);
  }
  const auto path = dir / "p01/s1/samples.jsonl";
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 10);
  SessionStore reopened(dir.path());
  try {
    reopened.load_log("p01", "s1");
    FAIL("expected CorruptLog");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CorruptLog);
    CHECK(e.subject() == "line 50");
  }
}

TEST_CASE("reopening drops bytes of a batch that was never committed") {
  TempDir dir("store");
  {
    SessionStore store(dir.path());
    store.post_batch("p01", "s1", 0, grid_samples(0, 100));
    store.post_batch("p01", "s1", 1, grid_samples(100, 100));
  }
  // simulate a crash half way through appending batch 2
  {
    std::ofstream out(dir / "p01/s1/samples.jsonl", std::ios::app);
    std::string partial;
    for (const auto& s : grid_samples(200, 37)) partial += sample_to_json_line(s) + "\n";
    out << partial.substr(0, partial.size() - 23);
  }
  SessionStore store(dir.path());
  const auto info = store.info("p01", "s1");
  REQUIRE(info.has_value());
  CHECK(info->sample_count == 200);
  CHECK(info->next_expected_seq == 2);
  CHECK(line_count(dir / "p01/s1/samples.jsonl") == 200);
  const auto ack = store.post_batch("p01", "s1", 2, grid_samples(200, 100));
  CHECK(ack.accepted_count == 100);
  store.close_session("p01", "s1", Skill::high);
  CHECK(store.load_log("p01", "s1").samples == grid_samples(0, 300));
}

TEST_CASE("idempotency: replaying any prefix leaves the same store contents") {
  TempDir a("store"), b("store");
  SessionStore sa(a.path()), sb(b.path());
  for (std::uint64_t k = 0; k < 5; ++k) {
    sa.post_batch("p", "s", k, grid_samples(k * 100, 100));
  }
  for (std::uint64_t k = 0; k < 5; ++k) {
    for (std::uint64_t j = 0; j <= k; ++j) {
      sb.post_batch("p", "s", j, grid_samples(j * 100, 100));
    }
  }
  sa.close_session("p", "s", Skill::low);
  sb.close_session("p", "s", Skill::low);
  CHECK(sa.load_log("p", "s") == sb.load_log("p", "s"));
}

TEST_CASE("batch body parsing") {
  const auto batch = parse_batch_body(batch_to_json(4, grid_samples(0, 3)).dump(), 100);
  CHECK(batch.seq == 4);
  CHECK(batch.samples == grid_samples(0, 3));
  auto subject = [](const std::string& body) {
    try {
      parse_batch_body(body, 100);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SchemaError);
      return e.subject();
    }
    FAIL("expected SchemaError");
    return std::string();
  };
  CHECK(subject("not json") == "body");
  CHECK(subject(R"({"samples":[]})") == "seq");
  CHECK(subject(R"({"seq":-1,"samples":[]})") == "seq");
  CHECK(subject(R"({"seq":0})") == "samples");
  auto doc = batch_to_json(0, grid_samples(0, 3));
  doc["samples"][1]["az"] = "NaN";
  CHECK(subject(doc.dump()) == "samples[1].az");
  doc = batch_to_json(0, grid_samples(0, 3));
  doc["samples"][2].erase("t");
  CHECK(subject(doc.dump()) == "samples[2].t");
  CHECK_THROWS_AS(parse_batch_body(batch_to_json(0, grid_samples(0, 101)).dump(), 100), Error);
}

TEST_CASE("partitioning a 300-sample log gives 3 batches of 100") {
  PlayerLog log{"p01", Skill::low, grid_samples(0, 300)};
  const auto batches = partition_batches(log);
  REQUIRE(batches.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(batches[i].bucket == i);
    CHECK(batches[i].samples.size() == 100);
  }
  auto gappy = grid_samples(0, 100);
  auto later = grid_samples(350, 50);
  gappy.insert(gappy.end(), later.begin(), later.end());
  const auto parts = partition_batches(PlayerLog{"p", Skill::low, gappy});
  REQUIRE(parts.size() == 2);
  CHECK(parts[1].bucket == 3);
}

TEST_CASE("HTTP gateway end to end") {
  TempDir dir("gw");
  GatewayServer server(test_gateway(dir.path()));
  const int port = server.start();
  const std::string url = "http://127.0.0.1:" + std::to_string(port);
  CHECK(gateway_healthy(url));

  httplib::Client client(url);
  SUBCASE("status codes") {
    auto res = client.Post("/v1/sessions/p01/s1/batches", batch_to_json(0, grid_samples(0, 100)).dump(),
                           "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto ack = json::parse(res->body);
    CHECK(ack["accepted_count"] == 100);
    CHECK(ack["next_expected_seq"] == 1);

    res = client.Post("/v1/sessions/p01/s1/batches", batch_to_json(0, grid_samples(0, 100)).dump(),
                      "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body)["accepted_count"] == 100);

    auto bad = batch_to_json(1, grid_samples(100, 10));
    bad["samples"][3]["gy"] = nullptr;
    res = client.Post("/v1/sessions/p01/s1/batches", bad.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body)["field"] == "samples[3].gy");

    res = client.Post("/v1/sessions/p01/s1/close", R"({"skill":3})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    res = client.Post("/v1/sessions/p09/s1/close", R"({"skill":1})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 404);
    res = client.Post("/v1/sessions/p01/s1/close", R"({"skill":1})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    res = client.Post("/v1/sessions/p01/s1/close", R"({"skill":1})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 409);
  }

  SUBCASE("replay round trip with pacing off") {
    PlayerLog log{"p05", Skill::high, grid_samples(0, 1050)};
    ReplayOptions opts;
    opts.gateway = url;
    const auto summary = replay(log, opts);
    CHECK(summary.batches_sent == 11);
    CHECK(summary.samples_sent == 1050);
    CHECK(summary.retries == 0);
    CHECK(server.store().load_log("p05", "s1") == log);
  }

  SUBCASE("a dropped acknowledgement is retried without duplicating rows") {
    std::atomic<int> failures{0};
    server.set_fault_injector([&](const std::string&, const std::string&, std::uint64_t seq) {
      return seq == 2 && failures.fetch_add(1) == 0;
    });
    PlayerLog log{"p06", Skill::low, grid_samples(0, 500)};
    ReplayOptions opts;
    opts.gateway = url;
    const auto summary = replay(log, opts);
    CHECK(summary.retries == 1);
    CHECK(summary.batches_sent == 5);
    CHECK(server.store().load_log("p06", "s1") == log);
  }

  SUBCASE("4xx is not retried") {
    PlayerLog log{"p07", Skill::low, grid_samples(0, 100)};
    ReplayOptions opts;
    opts.gateway = url;
    replay(log, opts);
    CHECK(code_of([&] { replay(log, opts); }) == ErrorCode::SchemaError);
  }

  SUBCASE("concurrent sessions") {
    std::vector<std::thread> threads;
    std::vector<PlayerLog> logs;
    for (int i = 0; i < 4; ++i) {
      logs.push_back({"c" + std::to_string(i), i % 2 ? Skill::high : Skill::low, grid_samples(i * 7, 700)});
    }
    for (int i = 0; i < 4; ++i) {
      threads.emplace_back([&, i] {
        ReplayOptions opts;
        opts.gateway = url;
        replay(logs[static_cast<std::size_t>(i)], opts);
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& l : logs) {
      CHECK(server.store().load_log(l.player_id, "s1") == l);
    }
  }
  server.stop();
}

TEST_CASE("replay gives up with GatewayUnreachable") {
  ReplayOptions opts;
  opts.gateway = "http://127.0.0.1:1";
  opts.max_retries = 2;
  opts.retry_backoff_ms = 1;
  opts.timeout_ms = 200;
  PlayerLog log{"p01", Skill::low, grid_samples(0, 10)};
  CHECK(code_of([&] { replay(log, opts); }) == ErrorCode::GatewayUnreachable);
  CHECK_FALSE(gateway_healthy(opts.gateway, 200));
}

TEST_CASE("binding a taken port fails with the address") {
  TempDir dir("gw");
  GatewayServer first(test_gateway(dir / "a"));
  const int port = first.start();
  GatewayOptions o = test_gateway(dir / "b");
  o.port = port;
  GatewayServer second(o);
  try {
    second.bind();
    FAIL("expected bind failure");
  } catch (const Error& e) {
    CHECK(e.subject() == "127.0.0.1:" + std::to_string(port));
  }
  first.stop();
}
