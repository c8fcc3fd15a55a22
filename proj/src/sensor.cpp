#include "skillchair/sensor.hpp"

#include <cmath>

#include "skillchair/error.hpp"

namespace skillchair {

double ImuSample::channel(Channel c) const {
  switch (c) {
    case Channel::ax: return ax;
    case Channel::ay: return ay;
    case Channel::az: return az;
    case Channel::gx: return gx;
    case Channel::gy: return gy;
    case Channel::gz: return gz;
    case Channel::mx: return mx;
    case Channel::my: return my;
    case Channel::mz: return mz;
  }
  return 0.0;
}

double& ImuSample::channel(Channel c) {
  switch (c) {
    case Channel::ax: return ax;
    case Channel::ay: return ay;
    case Channel::az: return az;
    case Channel::gx: return gx;
    case Channel::gy: return gy;
    case Channel::gz: return gz;
    case Channel::mx: return mx;
    case Channel::my: return my;
    case Channel::mz: return mz;
  }
  return ax;
}

std::vector<double> SessionWindow::series(Channel c) const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    out.push_back(s.channel(c));
  }
  return out;
}

ImuSample validate_sample(const ImuSample& candidate) {
  if (!std::isfinite(candidate.t)) {
    throw Error(ErrorCode::MalformedRecord, "timestamp is not a finite number", "t");
  }
  if (candidate.t < 0.0) {
    throw Error(ErrorCode::NegativeTimestamp, "timestamp " + std::to_string(candidate.t) + " < 0", "t");
  }
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    if (!std::isfinite(candidate.channel(static_cast<Channel>(i)))) {
      throw Error(ErrorCode::NonFiniteChannel, "channel value is not finite", std::string(kChannelNames[i]));
    }
  }
  return candidate;
}

void require_sorted(std::span<const ImuSample> samples, std::string_view player_id) {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw Error(ErrorCode::UnsortedLog,
                  "timestamp at index " + std::to_string(i) + " does not exceed its predecessor",
                  std::string(player_id));
    }
  }
}

std::vector<SessionWindow> segment_windows(const PlayerLog& log, const WindowingOptions& options) {
  require_sorted(log.samples, log.player_id);
  std::vector<SessionWindow> windows;
  if (log.samples.empty()) {
    return windows;
  }
  const double origin = log.samples.front().t;
  const double min_samples = options.completeness_fraction * (options.window_seconds / kSamplePeriod);

  auto flush = [&](std::size_t index, std::size_t begin, std::size_t end) {
    if (static_cast<double>(end - begin) + 1e-9 < min_samples) {
      return;
    }
    SessionWindow w;
    w.player_id = log.player_id;
    w.skill = log.skill;
    w.window_index = index;
    w.samples.assign(log.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     log.samples.begin() + static_cast<std::ptrdiff_t>(end));
    windows.push_back(std::move(w));
  };

  std::size_t current = 0;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    // Offsets are rounded to the sample grid first so that 100 Hz timestamps
    // such as 179.99999999 land in the window they nominally belong to.
    const double offset = std::round((log.samples[i].t - origin) / kSamplePeriod) * kSamplePeriod;
    const auto index = static_cast<std::size_t>(std::floor(offset / options.window_seconds + 1e-9));
    if (index != current) {
      flush(current, begin, i);
      current = index;
      begin = i;
    }
  }
  flush(current, begin, log.samples.size());
  return windows;
}

int skill_value(Skill s) { return static_cast<int>(s); }

Skill skill_from_int(long long value) {
  if (value != 0 && value != 1) {
    throw Error(ErrorCode::NonBinaryLabels, "skill must be 0 or 1, got " + std::to_string(value), "skill");
  }
  return value == 1 ? Skill::high : Skill::low;
}

}  // namespace skillchair
