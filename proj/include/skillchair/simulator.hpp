#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "skillchair/sensor.hpp"

namespace skillchair {

/// Generator parameters for one simulated player.
struct BehaviorProfile {
  Skill skill = Skill::low;
  /// Poisson event rate per minute for ax, ay, az, gx, gy, gz.
  std::array<double, 6> active_event_rate{};
  /// Peak of an active event as a multiple of the channel's quiescent std.
  double active_event_amplitude = 12.0;
  std::array<double, 3> quiescent_std_accel{0.004, 0.004, 0.004};
  std::array<double, 3> quiescent_std_gyro{0.6, 0.6, 0.6};
  double lean_back_fraction = 0.0;
  double lean_back_tilt_deg = 15.0;
  /// Sensor-link outages: Poisson arrivals per minute and mean length in
  /// seconds. Samples inside an outage are missing from the log.
  double dropout_rate = 0.0;
  double dropout_mean_seconds = 0.0;
  std::uint64_t rng_seed = 0;
};

/// Throws Error{InvalidProfile} naming the offending field.
void validate_profile(const BehaviorProfile& profile);

/// 100 Hz log covering [0, duration_seconds). Deterministic in rng_seed.
/// Accelerometer values are quantized to 1e-4 g, gyroscope to 1e-3 deg/s,
/// magnetometer to 1e-2 units.
PlayerLog generate_log(const BehaviorProfile& profile, double duration_seconds, std::string player_id = "p00");

/// Per-class distributions that player profiles are drawn from.
struct ClassDistribution {
  double event_rate_median = 1.0;
  /// Between-player spread (log space) of the rate.
  double event_rate_log_sd = 0.35;
  /// Per-axis jitter (log space) around the player's rate.
  double event_axis_log_sd = 0.3;
  std::array<double, 2> amplitude_range{8.0, 16.0};
  std::array<double, 3> accel_std_median{0.004, 0.004, 0.004};
  std::array<double, 3> gyro_std_median{0.6, 0.6, 0.6};
  double std_log_sd = 0.2;
  std::array<double, 2> lean_fraction_range{0.1, 0.4};
  std::array<double, 2> tilt_range_deg{12.0, 22.0};
  double dropout_rate = 0.0;
  double dropout_mean_seconds = 0.0;
};

struct PopulationSpec {
  int high_count = 9;
  int low_count = 10;
  double duration_seconds = 35.0 * 60.0;
  std::uint64_t seed = 2019;
  ClassDistribution high = default_high();
  ClassDistribution low = default_low();

  static ClassDistribution default_high();
  static ClassDistribution default_low();
};

/// Throws Error{InvalidSpec}.
void validate_spec(const PopulationSpec& spec);

/// Draws one profile per player from the class distributions. Players are
/// ordered high-skill first; profile i uses a seed derived from spec.seed and i.
std::vector<BehaviorProfile> draw_profiles(const PopulationSpec& spec);

/// Player ids are "p01", "p02", ... in profile order.
std::vector<PlayerLog> generate_population(const PopulationSpec& spec);

void to_json(nlohmann::json& j, const ClassDistribution& d);
void from_json(const nlohmann::json& j, ClassDistribution& d);
void to_json(nlohmann::json& j, const PopulationSpec& s);
/// Keys absent from `j` keep their defaults.
void from_json(const nlohmann::json& j, PopulationSpec& s);

PopulationSpec read_population_spec(const std::filesystem::path& path);

}  // namespace skillchair
