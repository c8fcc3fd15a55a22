#include "skillchair/log_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <system_error>

#include "skillchair/error.hpp"

namespace skillchair {

namespace fs = std::filesystem;

void append_double(std::string& out, double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) {
    throw Error(ErrorCode::StorageError, "cannot format double");
  }
  out.append(buf, end);
}

std::string format_double(double value) {
  std::string out;
  append_double(out, value);
  return out;
}

void append_sample_line(std::string& out, const ImuSample& s) {
  out += "{\"t\":";
  append_double(out, s.t);
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    out += ",\"";
    out += kChannelNames[i];
    out += "\":";
    append_double(out, s.channel(static_cast<Channel>(i)));
  }
  out += '}';
}

std::string sample_to_json_line(const ImuSample& s) {
  std::string out;
  append_sample_line(out, s);
  return out;
}

nlohmann::json sample_to_json(const ImuSample& s) {
  nlohmann::json j;
  j["t"] = s.t;
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    j[std::string(kChannelNames[i])] = s.channel(static_cast<Channel>(i));
  }
  return j;
}

namespace {

double number_field(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(ErrorCode::MalformedRecord, "missing key", key);
  }
  if (!it->is_number()) {
    // NaN and infinity are not JSON numbers; they commonly arrive as strings or null.
    if (it->is_string()) {
      const auto& text = it->get_ref<const std::string&>();
      std::string lower(text);
      std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
      if (lower == "nan" || lower == "inf" || lower == "-inf" || lower == "infinity" || lower == "-infinity") {
        throw Error(ErrorCode::NonFiniteChannel, "channel value is not finite", key);
      }
    }
    if (it->is_null() && std::string_view(key) != "t") {
      throw Error(ErrorCode::NonFiniteChannel, "channel value is null", key);
    }
    throw Error(ErrorCode::MalformedRecord, "value is not a number", key);
  }
  return it->get<double>();
}

}  // namespace

ImuSample sample_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::MalformedRecord, "sample is not a JSON object");
  }
  ImuSample s;
  s.t = number_field(j, "t");
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    s.channel(static_cast<Channel>(i)) = number_field(j, kChannelNames[i].data());
  }
  return validate_sample(s);
}

LogPaths LogPaths::in_directory(const fs::path& dir, std::string_view player_id) {
  const std::string stem(player_id);
  return {dir / (stem + ".jsonl"), dir / (stem + ".meta.json")};
}

void write_log(const PlayerLog& log, const LogPaths& paths) {
  std::ofstream out(paths.samples, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::StorageError, "cannot open for writing", paths.samples.string());
  }
  std::string buf;
  buf.reserve(1 << 20);
  for (const auto& s : log.samples) {
    append_sample_line(buf, s);
    buf += '\n';
    if (buf.size() > (1 << 20) - 512) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) {
    throw Error(ErrorCode::StorageError, "write failed", paths.samples.string());
  }

  nlohmann::json meta = {{"player_id", log.player_id}, {"skill", skill_value(log.skill)}};
  std::ofstream mout(paths.metadata, std::ios::trunc);
  mout << meta.dump() << '\n';
  if (!mout) {
    throw Error(ErrorCode::StorageError, "write failed", paths.metadata.string());
  }
}

std::vector<ImuSample> read_samples(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::StorageError, "cannot open for reading", path.string());
  }
  std::vector<ImuSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      samples.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::CorruptLog, path.string() + ": " + e.what(), "line " + std::to_string(line_no));
    } catch (const Error& e) {
      throw Error(ErrorCode::CorruptLog, path.string() + ": " + e.what(), "line " + std::to_string(line_no));
    }
  }
  return samples;
}

PlayerLog read_log(const LogPaths& paths) {
  PlayerLog log;
  const std::string fallback_id = paths.samples.stem().string();
  std::ifstream min(paths.metadata);
  if (!min) {
    throw Error(ErrorCode::MalformedRecord, "missing skill metadata " + paths.metadata.string(), fallback_id);
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(min);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("unreadable metadata: ") + e.what(), fallback_id);
  }
  log.player_id = meta.value("player_id", fallback_id);
  if (!meta.contains("skill") || !meta["skill"].is_number_integer()) {
    throw Error(ErrorCode::MalformedRecord, "metadata has no integer skill label", log.player_id);
  }
  log.skill = skill_from_int(meta["skill"].get<long long>());
  log.samples = read_samples(paths.samples);
  require_sorted(log.samples, log.player_id);
  return log;
}

void write_log_directory(const std::vector<PlayerLog>& logs, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorCode::StorageError, "cannot create output directory", dir.string());
  }
  for (const auto& log : logs) {
    write_log(log, LogPaths::in_directory(dir, log.player_id));
  }
}

std::vector<PlayerLog> read_log_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::StorageError, "not a directory", dir.string());
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<PlayerLog> logs;
  logs.reserve(files.size());
  for (const auto& f : files) {
    const auto stem = f.stem().string();
    logs.push_back(read_log(LogPaths::in_directory(dir, stem)));
  }
  std::sort(logs.begin(), logs.end(),
            [](const PlayerLog& a, const PlayerLog& b) { return a.player_id < b.player_id; });
  return logs;
}

}  // namespace skillchair
