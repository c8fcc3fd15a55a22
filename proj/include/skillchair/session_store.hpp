#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "skillchair/sensor.hpp"

namespace skillchair {

struct BatchAck {
  std::size_t accepted_count = 0;
  std::uint64_t next_expected_seq = 0;
  bool duplicate = false;
  /// Set when this batch skipped sequence numbers; the gap is recorded.
  bool gap = false;

  bool operator==(const BatchAck&) const = default;
};

struct SessionInfo {
  std::string player_id;
  std::string session_id;
  bool sealed = false;
  std::optional<Skill> skill;
  std::uint64_t next_expected_seq = 0;
  std::size_t sample_count = 0;
  std::size_t batch_count = 0;
  /// Half-open [from, to) ranges of sequence numbers never received.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> gaps;
};

struct StoreOptions {
  /// fsync data and metadata after every batch. Process crashes are covered
  /// without it; power loss is not.
  bool fsync = false;
};

/// Append-only per-session JSONL logs under `root/<player>/<session>/`.
///
/// Each batch is appended with a single write, then the session metadata is
/// replaced atomically (write + rename) to commit it. On open, any bytes past
/// the last committed batch are truncated, so the store always holds a whole
/// number of batches.
class SessionStore {
public:
  explicit SessionStore(std::filesystem::path root, StoreOptions options = {});

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  /// Appends a validated batch. `seq` below the next expected value is a
  /// duplicate and re-acknowledged without writing; above it, the batch is
  /// accepted and the skipped range recorded. Samples must be strictly
  /// time-ordered and later than everything already stored (SchemaError).
  BatchAck post_batch(const std::string& player_id, const std::string& session_id, std::uint64_t seq,
                      std::span<const ImuSample> samples);

  /// Seals the session with its skill label. UnknownSession, AlreadyClosed.
  SessionInfo close_session(const std::string& player_id, const std::string& session_id, Skill skill);

  /// Samples of a sealed session, exactly as acknowledged.
  /// UnknownSession if absent or unsealed; CorruptLog naming the bad line.
  PlayerLog load_log(const std::string& player_id, const std::string& session_id) const;

  std::optional<SessionInfo> info(const std::string& player_id, const std::string& session_id) const;
  std::vector<SessionInfo> sessions() const;

  /// Every sealed session as a PlayerLog, ordered by (player, session).
  std::vector<PlayerLog> load_sealed_logs() const;

  const std::filesystem::path& root() const { return root_; }

  /// Throws SchemaError unless `id` is a non-empty run of [A-Za-z0-9_.-]
  /// other than "." and "..".
  static void validate_id(const std::string& id, const char* field);

private:
  struct Session;
  using Key = std::pair<std::string, std::string>;

  std::shared_ptr<Session> find(const Key& key) const;
  std::shared_ptr<Session> find_or_create(const Key& key);
  void commit(Session& s) const;
  void recover();

  std::filesystem::path root_;
  StoreOptions options_;
  mutable std::mutex index_mutex_;
  std::map<Key, std::shared_ptr<Session>> index_;
};

}  // namespace skillchair
