#include "skillchair/replay.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "skillchair/error.hpp"
#include "skillchair/gateway.hpp"

namespace skillchair {

using nlohmann::json;

std::vector<ReplayBatch> partition_batches(const PlayerLog& log, double batch_seconds) {
  std::vector<ReplayBatch> batches;
  if (log.samples.empty()) {
    return batches;
  }
  const double origin = log.samples.front().t;
  for (const auto& s : log.samples) {
    // Snap to the 0.01 s grid before bucketing so 0.99999 stays in bucket 0.
    const double offset = std::round((s.t - origin) / kSamplePeriod) * kSamplePeriod;
    const auto bucket = static_cast<std::size_t>(std::floor(offset / batch_seconds + 1e-9));
    if (batches.empty() || batches.back().bucket != bucket) {
      batches.push_back({bucket, {}});
    }
    batches.back().samples.push_back(s);
  }
  return batches;
}

namespace {

httplib::Client make_client(const std::string& gateway, int timeout_ms) {
  httplib::Client client(gateway);
  const auto timeout = std::chrono::milliseconds(timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  client.set_keep_alive(true);
  client.set_tcp_nodelay(true);
  return client;
}

// Returns the parsed 200 body; retries transport errors and 5xx.
json post_with_retry(httplib::Client& client, const std::string& path, const std::string& body,
                     const ReplayOptions& options, std::size_t& retries) {
  for (int attempt = 0;; ++attempt) {
    auto res = client.Post(path, body, "application/json");
    if (res && res->status == 200) {
      return json::parse(res->body);
    }
    if (res && res->status >= 400 && res->status < 500) {
      std::string field;
      try {
        field = json::parse(res->body).value("field", "");
      } catch (const json::exception&) {
      }
      throw Error(ErrorCode::SchemaError, "gateway rejected " + path + " with " + std::to_string(res->status) +
                                              ": " + res->body,
                  field);
    }
    if (attempt >= options.max_retries) {
      const std::string why = res ? "status " + std::to_string(res->status) : httplib::to_string(res.error());
      throw Error(ErrorCode::GatewayUnreachable, "giving up on " + path + " after " +
                                                     std::to_string(attempt + 1) + " attempts (" + why + ")",
                  options.gateway);
    }
    ++retries;
    std::this_thread::sleep_for(std::chrono::milliseconds(options.retry_backoff_ms * (attempt + 1)));
  }
}

}  // namespace

ReplaySummary replay(const PlayerLog& log, const ReplayOptions& options) {
  SessionStore::validate_id(log.player_id, "player_id");
  SessionStore::validate_id(options.session_id, "session_id");
  auto client = make_client(options.gateway, options.timeout_ms);
  const std::string base = "/v1/sessions/" + log.player_id + "/" + options.session_id;

  ReplaySummary summary;
  const auto batches = partition_batches(log, options.batch_seconds);
  const auto start = std::chrono::steady_clock::now();
  std::size_t expected_bucket = 0;
  for (std::size_t seq = 0; seq < batches.size(); ++seq) {
    const auto& batch = batches[seq];
    summary.gaps += batch.bucket - expected_bucket;
    expected_bucket = batch.bucket + 1;
    if (options.speed > 0.0) {
      const auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(
                                   static_cast<double>(batch.bucket) * options.batch_seconds / options.speed));
      std::this_thread::sleep_until(due);
    }
    const std::string body = batch_to_json(seq, batch.samples).dump();
    post_with_retry(client, base + "/batches", body, options, summary.retries);
    ++summary.batches_sent;
    summary.samples_sent += batch.samples.size();
  }
  if (options.close) {
    const json body = {{"skill", skill_value(log.skill)}};
    post_with_retry(client, base + "/close", body.dump(), options, summary.retries);
  }
  return summary;
}

bool gateway_healthy(const std::string& gateway, int timeout_ms) {
  auto client = make_client(gateway, timeout_ms);
  auto res = client.Get("/v1/healthz");
  if (!res || res->status != 200) {
    return false;
  }
  try {
    return json::parse(res->body).value("status", "") == "ok";
  } catch (const json::exception&) {
    return false;
  }
}

}  // namespace skillchair
