#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "skillchair/session_store.hpp"

namespace httplib {
class Server;
}

namespace skillchair {

struct SampleBatch {
  std::uint64_t seq = 0;
  std::vector<ImuSample> samples;
};

/// Parses {"seq": int, "samples": [{...}, ...]}. Any problem raises
/// SchemaError naming the field, e.g. "samples[3].az".
SampleBatch parse_batch_body(const std::string& body, std::size_t max_batch);

nlohmann::json batch_to_json(std::uint64_t seq, std::span<const ImuSample> samples);

struct GatewayOptions {
  std::string host = "127.0.0.1";
  /// 0 binds an ephemeral port.
  int port = 8080;
  std::filesystem::path store_root = "gateway-store";
  std::size_t max_batch = 1000;
  StoreOptions store;
};

/// HTTP front end over a SessionStore.
///
///   POST /v1/sessions/{player}/{session}/batches  -> 200 {"accepted_count","next_expected_seq"}
///   POST /v1/sessions/{player}/{session}/close    -> 200 session summary
///   GET  /v1/healthz                              -> 200 {"status":"ok"}
///
/// Errors: 400 SchemaError, 404 UnknownSession, 409 AlreadyClosed,
/// 500 StorageError. Duplicate batches are re-acknowledged with 200.
class GatewayServer {
public:
  explicit GatewayServer(GatewayOptions options);
  ~GatewayServer();

  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  /// Binds the listening socket; throws Error{StorageError} naming the
  /// address when the port is taken. Returns the bound port.
  int bind();
  /// Serves on the calling thread until stop().
  void serve();
  /// bind() then serve() on a background thread.
  int start();
  void stop();

  int port() const { return port_; }
  SessionStore& store() { return *store_; }

  /// Test hook, called after a batch is persisted; returning true makes the
  /// gateway answer 503 as if the connection had dropped before the ack.
  using FaultInjector = std::function<bool(const std::string& player, const std::string& session, std::uint64_t seq)>;
  void set_fault_injector(FaultInjector f) { fault_ = std::move(f); }

private:
  void install_routes();

  GatewayOptions options_;
  std::unique_ptr<SessionStore> store_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  FaultInjector fault_;
  int port_ = 0;
};

}  // namespace skillchair
