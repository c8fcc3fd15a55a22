#include "skillchair/gateway.hpp"

#include "httplib.h"
#include "skillchair/error.hpp"
#include "skillchair/log_io.hpp"

namespace skillchair {

using nlohmann::json;

SampleBatch parse_batch_body(const std::string& body, std::size_t max_batch) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaError, std::string("body is not JSON: ") + e.what(), "body");
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::SchemaError, "body must be an object", "body");
  }
  SampleBatch batch;
  auto seq = doc.find("seq");
  if (seq == doc.end() || !seq->is_number_integer() || (seq->is_number_integer() && seq->get<long long>() < 0)) {
    throw Error(ErrorCode::SchemaError, "seq must be a non-negative integer", "seq");
  }
  batch.seq = seq->get<std::uint64_t>();
  auto samples = doc.find("samples");
  if (samples == doc.end() || !samples->is_array()) {
    throw Error(ErrorCode::SchemaError, "samples must be an array", "samples");
  }
  if (samples->size() > max_batch) {
    throw Error(ErrorCode::SchemaError,
                "batch of " + std::to_string(samples->size()) + " exceeds limit " + std::to_string(max_batch),
                "samples");
  }
  batch.samples.reserve(samples->size());
  for (std::size_t i = 0; i < samples->size(); ++i) {
    try {
      batch.samples.push_back(sample_from_json((*samples)[i]));
    } catch (const Error& e) {
      std::string field = "samples[" + std::to_string(i) + "]";
      if (!e.subject().empty()) {
        field += "." + e.subject();
      }
      throw Error(ErrorCode::SchemaError, e.what(), field);
    }
  }
  return batch;
}

json batch_to_json(std::uint64_t seq, std::span<const ImuSample> samples) {
  json arr = json::array();
  for (const auto& s : samples) {
    arr.push_back(sample_to_json(s));
  }
  return {{"seq", seq}, {"samples", std::move(arr)}};
}

namespace {

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaError:
    case ErrorCode::NonBinaryLabels:
      return 400;
    case ErrorCode::UnknownSession:
      return 404;
    case ErrorCode::AlreadyClosed:
      return 409;
    default:
      return 500;
  }
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  send_json(res, http_status(e.code()),
            {{"error", to_string(e.code())}, {"message", e.what()}, {"field", e.subject()}});
}

}  // namespace

GatewayServer::GatewayServer(GatewayOptions options)
    : options_(std::move(options)),
      store_(std::make_unique<SessionStore>(options_.store_root, options_.store)),
      server_(std::make_unique<httplib::Server>()) {
  // without SO_REUSEPORT a second gateway on the same port fails to bind
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  server_->set_tcp_nodelay(true);
  install_routes();
}

GatewayServer::~GatewayServer() { stop(); }

void GatewayServer::install_routes() {
  server_->Get("/v1/healthz", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });

  server_->Post(R"(/v1/sessions/([^/]+)/([^/]+)/batches)", [this](const httplib::Request& req,
                                                                  httplib::Response& res) {
    const std::string player = req.matches[1];
    const std::string session = req.matches[2];
    try {
      const SampleBatch batch = parse_batch_body(req.body, options_.max_batch);
      const BatchAck ack = store_->post_batch(player, session, batch.seq, batch.samples);
      if (fault_ && fault_(player, session, batch.seq)) {
        send_json(res, 503, {{"error", "InjectedFault"}});
        return;
      }
      send_json(res, 200,
                {{"accepted_count", ack.accepted_count},
                 {"next_expected_seq", ack.next_expected_seq},
                 {"duplicate", ack.duplicate},
                 {"gap", ack.gap}});
    } catch (const Error& e) {
      send_error(res, e);
    }
  });

  server_->Post(R"(/v1/sessions/([^/]+)/([^/]+)/close)", [this](const httplib::Request& req,
                                                                httplib::Response& res) {
    const std::string player = req.matches[1];
    const std::string session = req.matches[2];
    try {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("body is not JSON: ") + e.what(), "body");
      }
      if (!body.is_object() || !body.contains("skill") || !body["skill"].is_number_integer()) {
        throw Error(ErrorCode::SchemaError, "skill must be 0 or 1", "skill");
      }
      const auto value = body["skill"].get<long long>();
      if (value != 0 && value != 1) {
        throw Error(ErrorCode::SchemaError, "skill must be 0 or 1", "skill");
      }
      const SessionInfo info = store_->close_session(player, session, skill_from_int(value));
      send_json(res, 200,
                {{"player_id", info.player_id},
                 {"session_id", info.session_id},
                 {"sample_count", info.sample_count},
                 {"batch_count", info.batch_count},
                 {"skill", value},
                 {"gaps", info.gaps}});
    } catch (const Error& e) {
      send_error(res, e);
    }
  });
}

int GatewayServer::bind() {
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
    if (port_ < 0) {
      port_ = 0;
    }
  } else if (server_->bind_to_port(options_.host, options_.port)) {
    port_ = options_.port;
  }
  if (port_ <= 0) {
    throw Error(ErrorCode::StorageError, "cannot bind listening socket",
                options_.host + ":" + std::to_string(options_.port));
  }
  return port_;
}

void GatewayServer::serve() { server_->listen_after_bind(); }

int GatewayServer::start() {
  const int port = bind();
  thread_ = std::thread([this] { serve(); });
  server_->wait_until_ready();
  return port;
}

void GatewayServer::stop() {
  if (server_) {
    server_->stop();
  }
  if (thread_.joinable()) {
    thread_.join();
  }
}

}  // namespace skillchair
