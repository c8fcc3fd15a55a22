#include "skillchair/session_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "skillchair/error.hpp"
#include "skillchair/log_io.hpp"

namespace skillchair {

namespace fs = std::filesystem;
using nlohmann::json;

struct SessionStore::Session {
  std::mutex mutex;
  std::string player_id;
  std::string session_id;
  fs::path dir;
  bool sealed = false;
  std::optional<Skill> skill;
  std::uint64_t next_expected_seq = 0;
  std::uint64_t committed_bytes = 0;
  std::size_t sample_count = 0;
  std::optional<double> last_t;
  std::vector<std::pair<std::uint64_t, std::size_t>> batches;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> gaps;

  fs::path samples_path() const { return dir / "samples.jsonl"; }
  fs::path meta_path() const { return dir / "meta.json"; }

  SessionInfo info() const {
    SessionInfo i;
    i.player_id = player_id;
    i.session_id = session_id;
    i.sealed = sealed;
    i.skill = skill;
    i.next_expected_seq = next_expected_seq;
    i.sample_count = sample_count;
    i.batch_count = batches.size();
    i.gaps = gaps;
    return i;
  }
};

namespace {

[[noreturn]] void storage_failure(const std::string& what, const fs::path& path) {
  throw Error(ErrorCode::StorageError, what + ": " + std::strerror(errno), path.string());
}

void write_all(int fd, const std::string& data, const fs::path& path) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(fd, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      storage_failure("write", path);
    }
    off += static_cast<std::size_t>(n);
  }
}

void write_file_atomically(const fs::path& path, const std::string& data, bool sync) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) {
    storage_failure("open", tmp);
  }
  try {
    write_all(fd, data, tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  if (sync) {
    ::fsync(fd);
  }
  ::close(fd);
  if (::rename(tmp.c_str(), path.c_str()) != 0) {
    storage_failure("rename", path);
  }
}

}  // namespace

void SessionStore::validate_id(const std::string& id, const char* field) {
  const bool ok = !id.empty() && id != "." && id != ".." && id.size() <= 128 &&
                  std::all_of(id.begin(), id.end(), [](unsigned char c) {
                    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
                  });
  if (!ok) {
    throw Error(ErrorCode::SchemaError, "identifiers must match [A-Za-z0-9_.-]+", field);
  }
}

SessionStore::SessionStore(fs::path root, StoreOptions options) : root_(std::move(root)), options_(options) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (!fs::is_directory(root_)) {
    throw Error(ErrorCode::StorageError, "cannot create store root", root_.string());
  }
  recover();
}

void SessionStore::commit(Session& s) const {
  json meta;
  meta["player_id"] = s.player_id;
  meta["session_id"] = s.session_id;
  meta["state"] = s.sealed ? "sealed" : "open";
  meta["skill"] = s.skill ? json(skill_value(*s.skill)) : json(nullptr);
  meta["next_expected_seq"] = s.next_expected_seq;
  meta["committed_bytes"] = s.committed_bytes;
  meta["sample_count"] = s.sample_count;
  meta["last_t"] = s.last_t ? json(*s.last_t) : json(nullptr);
  meta["batches"] = s.batches;
  meta["gaps"] = s.gaps;
  write_file_atomically(s.meta_path(), meta.dump() + "\n", options_.fsync);
}

void SessionStore::recover() {
  for (const auto& player_dir : fs::directory_iterator(root_)) {
    if (!player_dir.is_directory()) {
      continue;
    }
    for (const auto& session_dir : fs::directory_iterator(player_dir.path())) {
      if (!session_dir.is_directory()) {
        continue;
      }
      const fs::path meta_path = session_dir.path() / "meta.json";
      std::ifstream in(meta_path);
      if (!in) {
        continue;
      }
      json meta;
      try {
        meta = json::parse(in);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptLog, std::string("unreadable session metadata: ") + e.what(),
                    meta_path.string());
      }
      auto s = std::make_shared<Session>();
      s->player_id = meta.at("player_id").get<std::string>();
      s->session_id = meta.at("session_id").get<std::string>();
      s->dir = session_dir.path();
      s->sealed = meta.at("state").get<std::string>() == "sealed";
      if (!meta.at("skill").is_null()) {
        s->skill = skill_from_int(meta.at("skill").get<int>());
      }
      s->next_expected_seq = meta.at("next_expected_seq").get<std::uint64_t>();
      s->committed_bytes = meta.at("committed_bytes").get<std::uint64_t>();
      s->sample_count = meta.at("sample_count").get<std::size_t>();
      if (!meta.at("last_t").is_null()) {
        s->last_t = meta.at("last_t").get<double>();
      }
      s->batches = meta.at("batches").get<std::vector<std::pair<std::uint64_t, std::size_t>>>();
      s->gaps = meta.at("gaps").get<std::vector<std::pair<std::uint64_t, std::uint64_t>>>();

      // Bytes beyond the last commit belong to a batch that was never acknowledged.
      std::error_code ec;
      const auto size = fs::file_size(s->samples_path(), ec);
      if (!ec && !s->sealed && size > s->committed_bytes) {
        fs::resize_file(s->samples_path(), s->committed_bytes, ec);
        if (ec) {
          throw Error(ErrorCode::StorageError, "cannot truncate torn batch", s->samples_path().string());
        }
      }
      std::error_code ignore;
      fs::remove(meta_path.string() + ".tmp", ignore);
      index_[{s->player_id, s->session_id}] = std::move(s);
    }
  }
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const Key& key) const {
  std::lock_guard lock(index_mutex_);
  auto it = index_.find(key);
  return it == index_.end() ? nullptr : it->second;
}

std::shared_ptr<SessionStore::Session> SessionStore::find_or_create(const Key& key) {
  std::lock_guard lock(index_mutex_);
  auto& slot = index_[key];
  if (!slot) {
    auto s = std::make_shared<Session>();
    s->player_id = key.first;
    s->session_id = key.second;
    s->dir = root_ / key.first / key.second;
    std::error_code ec;
    fs::create_directories(s->dir, ec);
    if (!fs::is_directory(s->dir)) {
      index_.erase(key);
      throw Error(ErrorCode::StorageError, "cannot create session directory", s->dir.string());
    }
    // A leftover data file without metadata never had a committed batch.
    std::ofstream(s->samples_path(), std::ios::trunc);
    try {
      commit(*s);
    } catch (...) {
      index_.erase(key);
      throw;
    }
    slot = std::move(s);
  }
  return slot;
}

BatchAck SessionStore::post_batch(const std::string& player_id, const std::string& session_id, std::uint64_t seq,
                                  std::span<const ImuSample> samples) {
  validate_id(player_id, "player_id");
  validate_id(session_id, "session_id");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      validate_sample(samples[i]);
    } catch (const Error& e) {
      throw Error(ErrorCode::SchemaError, e.what(), "samples[" + std::to_string(i) + "]." + e.subject());
    }
    if (i > 0 && !(samples[i].t > samples[i - 1].t)) {
      throw Error(ErrorCode::SchemaError, "timestamps must be strictly increasing",
                  "samples[" + std::to_string(i) + "].t");
    }
  }

  auto session = find_or_create({player_id, session_id});
  std::lock_guard lock(session->mutex);
  if (session->sealed) {
    throw Error(ErrorCode::AlreadyClosed, "session is sealed", player_id + "/" + session_id);
  }

  if (seq < session->next_expected_seq) {
    auto it = std::lower_bound(session->batches.begin(), session->batches.end(), std::make_pair(seq, std::size_t{0}));
    if (it == session->batches.end() || it->first != seq) {
      throw Error(ErrorCode::SchemaError, "sequence number " + std::to_string(seq) + " falls in a recorded gap",
                  "seq");
    }
    return BatchAck{it->second, session->next_expected_seq, true, false};
  }

  if (!samples.empty() && session->last_t && !(samples.front().t > *session->last_t)) {
    throw Error(ErrorCode::SchemaError, "timestamp regresses behind stored samples", "samples[0].t");
  }

  std::string buf;
  buf.reserve(samples.size() * 160);
  for (const auto& s : samples) {
    append_sample_line(buf, s);
    buf += '\n';
  }
  const fs::path path = session->samples_path();
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
  if (fd < 0) {
    storage_failure("open", path);
  }
  try {
    write_all(fd, buf, path);
    if (options_.fsync) {
      ::fsync(fd);
    }
  } catch (...) {
    // If this truncate fails too, recovery on the next open removes the tail.
    [[maybe_unused]] const int rc = ::ftruncate(fd, static_cast<off_t>(session->committed_bytes));
    ::close(fd);
    throw;
  }
  ::close(fd);

  const bool gap = seq > session->next_expected_seq;
  const auto saved_gaps = session->gaps;
  const auto saved_batches = session->batches;
  const auto saved_next = session->next_expected_seq;
  const auto saved_bytes = session->committed_bytes;
  const auto saved_count = session->sample_count;
  const auto saved_last_t = session->last_t;
  if (gap) {
    session->gaps.emplace_back(session->next_expected_seq, seq);
  }
  session->batches.emplace_back(seq, samples.size());
  session->next_expected_seq = seq + 1;
  session->committed_bytes += buf.size();
  session->sample_count += samples.size();
  if (!samples.empty()) {
    session->last_t = samples.back().t;
  }
  try {
    commit(*session);
  } catch (...) {
    session->gaps = saved_gaps;
    session->batches = saved_batches;
    session->next_expected_seq = saved_next;
    session->committed_bytes = saved_bytes;
    session->sample_count = saved_count;
    session->last_t = saved_last_t;
    std::error_code ec;
    fs::resize_file(path, session->committed_bytes, ec);
    throw;
  }
  return BatchAck{samples.size(), session->next_expected_seq, false, gap};
}

SessionInfo SessionStore::close_session(const std::string& player_id, const std::string& session_id, Skill skill) {
  auto session = find({player_id, session_id});
  if (!session) {
    throw Error(ErrorCode::UnknownSession, "no such session", player_id + "/" + session_id);
  }
  std::lock_guard lock(session->mutex);
  if (session->sealed) {
    throw Error(ErrorCode::AlreadyClosed, "session is already sealed", player_id + "/" + session_id);
  }
  session->sealed = true;
  session->skill = skill;
  try {
    commit(*session);
  } catch (...) {
    session->sealed = false;
    session->skill.reset();
    throw;
  }
  return session->info();
}

PlayerLog SessionStore::load_log(const std::string& player_id, const std::string& session_id) const {
  auto session = find({player_id, session_id});
  if (!session) {
    throw Error(ErrorCode::UnknownSession, "no such session", player_id + "/" + session_id);
  }
  std::size_t expected = 0;
  Skill skill = Skill::low;
  fs::path path;
  {
    std::lock_guard lock(session->mutex);
    if (!session->sealed) {
      throw Error(ErrorCode::UnknownSession, "session is not sealed", player_id + "/" + session_id);
    }
    expected = session->sample_count;
    skill = *session->skill;
    path = session->samples_path();
  }
  PlayerLog log;
  log.player_id = player_id;
  log.skill = skill;
  std::error_code ec;
  if (fs::exists(path, ec)) {
    log.samples = read_samples(path);
  }
  if (log.samples.size() != expected) {
    throw Error(ErrorCode::CorruptLog,
                path.string() + ": expected " + std::to_string(expected) + " samples, found " +
                    std::to_string(log.samples.size()),
                "line " + std::to_string(std::min(log.samples.size(), expected) + 1));
  }
  return log;
}

std::optional<SessionInfo> SessionStore::info(const std::string& player_id, const std::string& session_id) const {
  auto session = find({player_id, session_id});
  if (!session) {
    return std::nullopt;
  }
  std::lock_guard lock(session->mutex);
  return session->info();
}

std::vector<SessionInfo> SessionStore::sessions() const {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(index_mutex_);
    for (const auto& [key, s] : index_) {
      all.push_back(s);
    }
  }
  std::vector<SessionInfo> out;
  for (const auto& s : all) {
    std::lock_guard lock(s->mutex);
    out.push_back(s->info());
  }
  return out;
}

std::vector<PlayerLog> SessionStore::load_sealed_logs() const {
  std::vector<PlayerLog> logs;
  for (const auto& info : sessions()) {
    if (info.sealed) {
      logs.push_back(load_log(info.player_id, info.session_id));
    }
  }
  return logs;
}

}  // namespace skillchair
