#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "skillchair/sensor.hpp"

namespace testutil {

class TempDir {
public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("skillchair-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline skillchair::ImuSample sample_at(double t, double az = 1.0) {
  skillchair::ImuSample s;
  s.t = t;
  s.az = az;
  s.mx = 24.0;
  return s;
}

// `n` samples on the 100 Hz grid starting at index `first`.
inline std::vector<skillchair::ImuSample> grid_samples(std::size_t first, std::size_t n) {
  std::vector<skillchair::ImuSample> out;
  for (std::size_t i = first; i < first + n; ++i) {
    auto s = sample_at(static_cast<double>(i) / 100.0);
    s.ax = 0.001 * static_cast<double>(i % 7);
    s.gy = -0.25 * static_cast<double>(i % 5);
    out.push_back(s);
  }
  return out;
}

}  // namespace testutil
