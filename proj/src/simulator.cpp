#include "skillchair/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "skillchair/error.hpp"
#include "skillchair/rng.hpp"

namespace skillchair {

namespace {

constexpr std::array<double, 3> kMagneticBaseline{24.0, -6.5, 41.0};
constexpr double kMagneticNoise = 0.3;

// Stream identifiers for mix_seed; motion channels use 0..5.
constexpr std::uint64_t kLeanStream = 16;
constexpr std::uint64_t kDropoutStream = 17;
constexpr std::uint64_t kMagneticStream = 18;

void require(bool ok, const char* field, const std::string& detail, ErrorCode code) {
  if (!ok) {
    throw Error(code, detail, field);
  }
}

double quantize(double v, double scale) { return std::round(v * scale) / scale; }

// Splits `total` into `parts` non-negative integers at uniformly drawn cuts.
std::vector<std::size_t> random_partition(std::size_t total, std::size_t parts, Rng& rng) {
  std::vector<std::size_t> cuts;
  cuts.reserve(parts + 1);
  cuts.push_back(0);
  for (std::size_t i = 0; i + 1 < parts; ++i) {
    cuts.push_back(static_cast<std::size_t>(rng.below(total + 1)));
  }
  cuts.push_back(total);
  std::sort(cuts.begin(), cuts.end());
  std::vector<std::size_t> sizes;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    sizes.push_back(cuts[i] - cuts[i - 1]);
  }
  return sizes;
}

// Lean-back mask covering exactly round(fraction * n) samples, split into
// episodes of roughly ten minutes each.
std::vector<bool> lean_mask(std::size_t n, double fraction, double duration, Rng& rng) {
  std::vector<bool> mask(n, false);
  const auto lean = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (lean == 0) {
    return mask;
  }
  if (lean >= n) {
    mask.assign(n, true);
    return mask;
  }
  const auto episodes = static_cast<std::size_t>(std::max(1.0, std::round(fraction * duration / 600.0)));
  const auto lean_parts = random_partition(lean, episodes, rng);
  const auto upright_parts = random_partition(n - lean, episodes + 1, rng);
  std::size_t pos = upright_parts[0];
  for (std::size_t e = 0; e < episodes; ++e) {
    std::fill(mask.begin() + static_cast<std::ptrdiff_t>(pos),
              mask.begin() + static_cast<std::ptrdiff_t>(pos + lean_parts[e]), true);
    pos += lean_parts[e] + upright_parts[e + 1];
  }
  return mask;
}

// Half-sine bursts of 0.2-1.0 s arriving as a Poisson process.
void add_events(std::vector<double>& values, double rate_per_minute, double peak, double duration, Rng& rng) {
  if (rate_per_minute <= 0.0) {
    return;
  }
  const double rate = rate_per_minute / 60.0;
  const auto n = values.size();
  double start = rng.exponential(rate);
  while (start < duration) {
    const double length = rng.uniform(0.2, 1.0);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const auto first = static_cast<std::size_t>(std::ceil(start / kSamplePeriod));
    for (std::size_t i = first; i < n; ++i) {
      const double dt = static_cast<double>(i) * kSamplePeriod - start;
      if (dt > length) {
        break;
      }
      values[i] += sign * peak * std::sin(std::numbers::pi * dt / length);
    }
    start += rng.exponential(rate);
  }
}

std::vector<bool> dropout_mask(std::size_t n, double rate_per_minute, double mean_seconds, double duration,
                               Rng& rng) {
  std::vector<bool> missing(n, false);
  if (rate_per_minute <= 0.0 || mean_seconds <= 0.0) {
    return missing;
  }
  const double rate = rate_per_minute / 60.0;
  double start = rng.exponential(rate);
  while (start < duration) {
    const double length = rng.exponential(1.0 / mean_seconds);
    const auto first = static_cast<std::size_t>(std::ceil(start / kSamplePeriod));
    const auto last = std::min(n, static_cast<std::size_t>(std::ceil((start + length) / kSamplePeriod)));
    for (std::size_t i = first; i < last; ++i) {
      missing[i] = true;
    }
    start += length + rng.exponential(rate);
  }
  return missing;
}

}  // namespace

void validate_profile(const BehaviorProfile& p) {
  constexpr auto code = ErrorCode::InvalidProfile;
  for (double r : p.active_event_rate) {
    require(std::isfinite(r) && r >= 0.0, "active_event_rate", "rates must be finite and >= 0", code);
  }
  require(std::isfinite(p.active_event_amplitude) && p.active_event_amplitude > 3.0, "active_event_amplitude",
          "amplitude must exceed 3 standard deviations", code);
  for (double s : p.quiescent_std_accel) {
    require(std::isfinite(s) && s > 0.0, "quiescent_std_accel", "std must be > 0", code);
  }
  for (double s : p.quiescent_std_gyro) {
    require(std::isfinite(s) && s > 0.0, "quiescent_std_gyro", "std must be > 0", code);
  }
  require(p.lean_back_fraction >= 0.0 && p.lean_back_fraction <= 1.0, "lean_back_fraction",
          "fraction must lie in [0, 1]", code);
  require(std::isfinite(p.lean_back_tilt_deg) && p.lean_back_tilt_deg >= 0.0 && p.lean_back_tilt_deg < 90.0,
          "lean_back_tilt_deg", "tilt must lie in [0, 90)", code);
  require(std::isfinite(p.dropout_rate) && p.dropout_rate >= 0.0, "dropout_rate", "rate must be >= 0", code);
  require(std::isfinite(p.dropout_mean_seconds) && p.dropout_mean_seconds >= 0.0, "dropout_mean_seconds",
          "mean must be >= 0", code);
}

PlayerLog generate_log(const BehaviorProfile& profile, double duration_seconds, std::string player_id) {
  validate_profile(profile);
  if (!std::isfinite(duration_seconds) || duration_seconds < 0.0) {
    throw Error(ErrorCode::InvalidProfile, "duration must be finite and >= 0", "duration");
  }
  const auto n = static_cast<std::size_t>(std::floor(duration_seconds / kSamplePeriod + 1e-9));

  Rng lean_rng(mix_seed(profile.rng_seed, kLeanStream));
  const auto leaning = lean_mask(n, profile.lean_back_fraction, duration_seconds, lean_rng);
  const double lean_az = std::cos(profile.lean_back_tilt_deg * std::numbers::pi / 180.0);

  std::array<std::vector<double>, 6> motion;
  for (std::size_t c = 0; c < 6; ++c) {
    Rng rng(mix_seed(profile.rng_seed, c));
    const double sd = c < 3 ? profile.quiescent_std_accel[c] : profile.quiescent_std_gyro[c - 3];
    auto& v = motion[c];
    v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double baseline = 0.0;
      if (c == 2) {
        baseline = leaning[i] ? lean_az : 1.0;
      }
      v[i] = baseline + sd * rng.normal();
    }
    add_events(v, profile.active_event_rate[c], profile.active_event_amplitude * sd, duration_seconds, rng);
  }

  Rng drop_rng(mix_seed(profile.rng_seed, kDropoutStream));
  const auto missing =
      dropout_mask(n, profile.dropout_rate, profile.dropout_mean_seconds, duration_seconds, drop_rng);

  Rng mag_rng(mix_seed(profile.rng_seed, kMagneticStream));
  PlayerLog log;
  log.player_id = std::move(player_id);
  log.skill = profile.skill;
  log.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Magnetometer noise is drawn for every tick so dropout does not shift the stream.
    std::array<double, 3> mag{};
    for (std::size_t k = 0; k < 3; ++k) {
      mag[k] = kMagneticBaseline[k] + kMagneticNoise * mag_rng.normal();
    }
    if (missing[i]) {
      continue;
    }
    ImuSample s;
    s.t = static_cast<double>(i) / 100.0;
    s.ax = quantize(motion[0][i], 1e4);
    s.ay = quantize(motion[1][i], 1e4);
    s.az = quantize(motion[2][i], 1e4);
    s.gx = quantize(motion[3][i], 1e3);
    s.gy = quantize(motion[4][i], 1e3);
    s.gz = quantize(motion[5][i], 1e3);
    s.mx = quantize(mag[0], 1e2);
    s.my = quantize(mag[1], 1e2);
    s.mz = quantize(mag[2], 1e2);
    log.samples.push_back(s);
  }
  return log;
}

ClassDistribution PopulationSpec::default_high() {
  ClassDistribution d;
  d.event_rate_median = 1.0;
  d.accel_std_median = {0.0055, 0.004, 0.004};
  d.gyro_std_median = {0.6, 0.85, 0.6};
  d.lean_fraction_range = {0.05, 0.35};
  d.dropout_rate = 0.15;
  d.dropout_mean_seconds = 40.0;
  return d;
}

ClassDistribution PopulationSpec::default_low() {
  ClassDistribution d;
  d.event_rate_median = 2.2;
  d.accel_std_median = {0.004, 0.004, 0.004};
  d.gyro_std_median = {0.6, 0.6, 0.6};
  d.lean_fraction_range = {0.25, 0.65};
  d.dropout_rate = 0.15;
  d.dropout_mean_seconds = 40.0;
  return d;
}

namespace {

void validate_distribution(const ClassDistribution& d, const char* which) {
  constexpr auto code = ErrorCode::InvalidSpec;
  const std::string prefix = which;
  auto ok_range = [](const std::array<double, 2>& r) {
    return std::isfinite(r[0]) && std::isfinite(r[1]) && r[0] <= r[1];
  };
  require(std::isfinite(d.event_rate_median) && d.event_rate_median >= 0.0, which, "event_rate_median < 0", code);
  require(d.event_rate_log_sd >= 0.0 && d.event_axis_log_sd >= 0.0 && d.std_log_sd >= 0.0, which,
          "log-space spreads must be >= 0", code);
  require(ok_range(d.amplitude_range) && d.amplitude_range[0] > 3.0, which,
          "amplitude_range must be ordered and above 3", code);
  for (double s : d.accel_std_median) {
    require(std::isfinite(s) && s > 0.0, which, "accel_std_median must be > 0", code);
  }
  for (double s : d.gyro_std_median) {
    require(std::isfinite(s) && s > 0.0, which, "gyro_std_median must be > 0", code);
  }
  require(ok_range(d.lean_fraction_range) && d.lean_fraction_range[0] >= 0.0 && d.lean_fraction_range[1] <= 1.0,
          which, "lean_fraction_range must be an ordered sub-range of [0, 1]", code);
  require(ok_range(d.tilt_range_deg) && d.tilt_range_deg[0] >= 0.0 && d.tilt_range_deg[1] < 90.0, which,
          "tilt_range_deg must be an ordered sub-range of [0, 90)", code);
  require(d.dropout_rate >= 0.0 && d.dropout_mean_seconds >= 0.0, which, "dropout parameters must be >= 0", code);
}

BehaviorProfile draw_profile(const ClassDistribution& d, Skill skill, std::uint64_t seed) {
  Rng rng(seed);
  BehaviorProfile p;
  p.skill = skill;
  const double rate = rng.lognormal(d.event_rate_median, d.event_rate_log_sd);
  for (auto& r : p.active_event_rate) {
    r = rng.lognormal(rate, d.event_axis_log_sd);
  }
  p.active_event_amplitude = rng.uniform(d.amplitude_range[0], d.amplitude_range[1]);
  for (std::size_t k = 0; k < 3; ++k) {
    p.quiescent_std_accel[k] = rng.lognormal(d.accel_std_median[k], d.std_log_sd);
  }
  for (std::size_t k = 0; k < 3; ++k) {
    p.quiescent_std_gyro[k] = rng.lognormal(d.gyro_std_median[k], d.std_log_sd);
  }
  p.lean_back_fraction = rng.uniform(d.lean_fraction_range[0], d.lean_fraction_range[1]);
  p.lean_back_tilt_deg = rng.uniform(d.tilt_range_deg[0], d.tilt_range_deg[1]);
  p.dropout_rate = d.dropout_rate;
  p.dropout_mean_seconds = d.dropout_mean_seconds;
  p.rng_seed = rng.next_u64();
  return p;
}

}  // namespace

void validate_spec(const PopulationSpec& spec) {
  constexpr auto code = ErrorCode::InvalidSpec;
  require(spec.high_count >= 0 && spec.low_count >= 0, "count", "class counts must be >= 0", code);
  require(spec.high_count + spec.low_count >= 1, "count", "population must contain at least one player", code);
  require(std::isfinite(spec.duration_seconds) && spec.duration_seconds > 0.0, "duration_seconds",
          "duration must be > 0", code);
  validate_distribution(spec.high, "high");
  validate_distribution(spec.low, "low");
}

std::vector<BehaviorProfile> draw_profiles(const PopulationSpec& spec) {
  validate_spec(spec);
  std::vector<BehaviorProfile> profiles;
  const int total = spec.high_count + spec.low_count;
  for (int i = 0; i < total; ++i) {
    const bool high = i < spec.high_count;
    profiles.push_back(draw_profile(high ? spec.high : spec.low, high ? Skill::high : Skill::low,
                                    mix_seed(spec.seed, static_cast<std::uint64_t>(i))));
  }
  return profiles;
}

std::vector<PlayerLog> generate_population(const PopulationSpec& spec) {
  const auto profiles = draw_profiles(spec);
  std::vector<PlayerLog> logs;
  logs.reserve(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "p%02zu", i + 1);
    logs.push_back(generate_log(profiles[i], spec.duration_seconds, id));
  }
  return logs;
}

void to_json(nlohmann::json& j, const ClassDistribution& d) {
  j = nlohmann::json{{"event_rate_median", d.event_rate_median},
                     {"event_rate_log_sd", d.event_rate_log_sd},
                     {"event_axis_log_sd", d.event_axis_log_sd},
                     {"amplitude_range", d.amplitude_range},
                     {"accel_std_median", d.accel_std_median},
                     {"gyro_std_median", d.gyro_std_median},
                     {"std_log_sd", d.std_log_sd},
                     {"lean_fraction_range", d.lean_fraction_range},
                     {"tilt_range_deg", d.tilt_range_deg},
                     {"dropout_rate", d.dropout_rate},
                     {"dropout_mean_seconds", d.dropout_mean_seconds}};
}

namespace {

template <class T>
void read_optional(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      it->get_to(out);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidSpec, e.what(), key);
    }
  }
}

}  // namespace

void from_json(const nlohmann::json& j, ClassDistribution& d) {
  read_optional(j, "event_rate_median", d.event_rate_median);
  read_optional(j, "event_rate_log_sd", d.event_rate_log_sd);
  read_optional(j, "event_axis_log_sd", d.event_axis_log_sd);
  read_optional(j, "amplitude_range", d.amplitude_range);
  read_optional(j, "accel_std_median", d.accel_std_median);
  read_optional(j, "gyro_std_median", d.gyro_std_median);
  read_optional(j, "std_log_sd", d.std_log_sd);
  read_optional(j, "lean_fraction_range", d.lean_fraction_range);
  read_optional(j, "tilt_range_deg", d.tilt_range_deg);
  read_optional(j, "dropout_rate", d.dropout_rate);
  read_optional(j, "dropout_mean_seconds", d.dropout_mean_seconds);
}

void to_json(nlohmann::json& j, const PopulationSpec& s) {
  j = nlohmann::json{{"high_count", s.high_count},
                     {"low_count", s.low_count},
                     {"duration_seconds", s.duration_seconds},
                     {"seed", s.seed},
                     {"high", s.high},
                     {"low", s.low}};
}

void from_json(const nlohmann::json& j, PopulationSpec& s) {
  if (!j.is_object()) {
    throw Error(ErrorCode::InvalidSpec, "population spec must be a JSON object");
  }
  read_optional(j, "high_count", s.high_count);
  read_optional(j, "low_count", s.low_count);
  read_optional(j, "duration_seconds", s.duration_seconds);
  read_optional(j, "seed", s.seed);
  if (auto it = j.find("high"); it != j.end()) {
    from_json(*it, s.high);
  }
  if (auto it = j.find("low"); it != j.end()) {
    from_json(*it, s.low);
  }
}

PopulationSpec read_population_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot open population spec", path.string());
  }
  PopulationSpec spec;
  try {
    from_json(nlohmann::json::parse(in), spec);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, e.what(), path.string());
  }
  validate_spec(spec);
  return spec;
}

}  // namespace skillchair
