#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "skillchair/sensor.hpp"

namespace skillchair {

struct ReplayOptions {
  /// e.g. "http://127.0.0.1:8080"
  std::string gateway = "http://127.0.0.1:8080";
  std::string session_id = "s1";
  /// Playback rate relative to real time; 0 posts as fast as possible.
  double speed = 0.0;
  double batch_seconds = 1.0;
  /// Attempts per batch beyond the first before giving up.
  int max_retries = 5;
  int retry_backoff_ms = 20;
  int timeout_ms = 5000;
  /// Seal the session with the log's skill label after the last batch.
  bool close = true;
};

struct ReplaySummary {
  std::size_t batches_sent = 0;
  std::size_t samples_sent = 0;
  std::size_t retries = 0;
  /// Empty batch intervals skipped because the log had no samples there.
  std::size_t gaps = 0;
};

/// A batch is one `batch_seconds` interval measured from the first sample;
/// empty intervals are omitted. `bucket` is the interval index.
struct ReplayBatch {
  std::size_t bucket = 0;
  std::vector<ImuSample> samples;
};

std::vector<ReplayBatch> partition_batches(const PlayerLog& log, double batch_seconds = 1.0);

/// Posts `log` to the gateway in order with sequence numbers 0, 1, ...
/// Transport failures and 5xx answers are retried (the gateway treats a
/// resent batch as a duplicate); after the retry budget the call throws
/// GatewayUnreachable. 4xx answers raise SchemaError without retrying.
ReplaySummary replay(const PlayerLog& log, const ReplayOptions& options);

/// True if GET /v1/healthz answers {"status":"ok"}.
bool gateway_healthy(const std::string& gateway, int timeout_ms = 1000);

}  // namespace skillchair
