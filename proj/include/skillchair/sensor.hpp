#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace skillchair {

/// Nominal inter-sample spacing of the chair IMU, in seconds (100 Hz).
inline constexpr double kSamplePeriod = 0.01;

enum class Channel : std::size_t { ax, ay, az, gx, gy, gz, mx, my, mz };

inline constexpr std::size_t kChannelCount = 9;
inline constexpr std::array<std::string_view, kChannelCount> kChannelNames = {
    "ax", "ay", "az", "gx", "gy", "gz", "mx", "my", "mz"};

/// One 0.01 s reading. Accelerometer in g, gyroscope in deg/s, magnetometer in
/// raw sensor units. `t` is seconds since the session start.
struct ImuSample {
  double t = 0.0;
  double ax = 0.0, ay = 0.0, az = 0.0;
  double gx = 0.0, gy = 0.0, gz = 0.0;
  double mx = 0.0, my = 0.0, mz = 0.0;

  double channel(Channel c) const;
  double& channel(Channel c);

  bool operator==(const ImuSample&) const = default;
};

enum class Skill : int { low = 0, high = 1 };

struct PlayerLog {
  std::string player_id;
  Skill skill = Skill::low;
  std::vector<ImuSample> samples;

  bool operator==(const PlayerLog&) const = default;
};

/// A contiguous slice of one player's log covering `window_seconds`.
struct SessionWindow {
  std::string player_id;
  Skill skill = Skill::low;
  std::size_t window_index = 0;
  std::vector<ImuSample> samples;

  std::vector<double> series(Channel c) const;
};

/// Checks that all nine channels are finite and the timestamp is non-negative.
/// Throws Error{NonFiniteChannel | NegativeTimestamp} naming the field.
ImuSample validate_sample(const ImuSample& candidate);

/// Throws Error{UnsortedLog} unless timestamps are strictly increasing.
void require_sorted(std::span<const ImuSample> samples, std::string_view player_id = {});

struct WindowingOptions {
  double window_seconds = 180.0;
  double completeness_fraction = 0.8;
};

/// Cuts `log` into consecutive non-overlapping windows aligned to its first
/// timestamp. Windows holding fewer than
/// completeness_fraction * window_seconds / kSamplePeriod samples are dropped;
/// window_index is the ordinal of the interval within the log, so indices can
/// skip where a window was dropped.
std::vector<SessionWindow> segment_windows(const PlayerLog& log, const WindowingOptions& options = {});

int skill_value(Skill s);
Skill skill_from_int(long long value);

}  // namespace skillchair
