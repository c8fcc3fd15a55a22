#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "skillchair/sensor.hpp"

namespace skillchair {

/// Shortest decimal representation that parses back to the identical double.
std::string format_double(double value);
void append_double(std::string& out, double value);

/// {"t":..,"ax":..,...,"mz":..} without a trailing newline.
std::string sample_to_json_line(const ImuSample& s);
void append_sample_line(std::string& out, const ImuSample& s);

/// Parses and validates one sample object. Missing or non-numeric keys raise
/// MalformedRecord; the remaining checks are those of validate_sample.
ImuSample sample_from_json(const nlohmann::json& j);

nlohmann::json sample_to_json(const ImuSample& s);

/// Session-log file pair: `<stem>.jsonl` plus `<stem>.meta.json`.
struct LogPaths {
  std::filesystem::path samples;
  std::filesystem::path metadata;

  static LogPaths in_directory(const std::filesystem::path& dir, std::string_view player_id);
};

void write_log(const PlayerLog& log, const LogPaths& paths);

/// Reads a JSONL sample file. Parse failures raise CorruptLog naming the
/// 1-based line number.
std::vector<ImuSample> read_samples(const std::filesystem::path& path);

PlayerLog read_log(const LogPaths& paths);

/// Writes every log as `<player_id>.jsonl` + `<player_id>.meta.json`.
void write_log_directory(const std::vector<PlayerLog>& logs, const std::filesystem::path& dir);

/// Loads all `*.jsonl` logs in `dir`, ordered by player id. A log without a
/// readable skill label raises MalformedRecord naming the player.
std::vector<PlayerLog> read_log_directory(const std::filesystem::path& dir);

}  // namespace skillchair
