#include <cmath>
#include <numbers>

#include "doctest.h"
#include "skillchair/error.hpp"
#include "skillchair/features.hpp"
#include "skillchair/simulator.hpp"

using namespace skillchair;

namespace {

BehaviorProfile quiet_profile(std::uint64_t seed) {
  BehaviorProfile p;
  p.rng_seed = seed;
  p.active_event_rate = {0, 0, 0, 0, 0, 0};
  p.lean_back_fraction = 0.0;
  return p;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ConfigError;
}

double mean_feature(const Dataset& ds, std::string_view name, int label) {
  const auto col = static_cast<Eigen::Index>(feature_index(name));
  double sum = 0.0;
  int n = 0;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    if (ds.labels[r] == label) {
      sum += ds.features(static_cast<Eigen::Index>(r), col);
      ++n;
    }
  }
  return sum / n;
}

}  // namespace

TEST_CASE("profile invariants are enforced") {
  auto p = quiet_profile(1);
  CHECK_NOTHROW(validate_profile(p));
  p.active_event_amplitude = 3.0;
  CHECK(code_of([&] { generate_log(p, 10.0); }) == ErrorCode::InvalidProfile);
  p = quiet_profile(1);
  p.quiescent_std_gyro[1] = 0.0;
  CHECK(code_of([&] { validate_profile(p); }) == ErrorCode::InvalidProfile);
  p = quiet_profile(1);
  p.lean_back_fraction = 1.01;
  CHECK(code_of([&] { validate_profile(p); }) == ErrorCode::InvalidProfile);
  p = quiet_profile(1);
  p.active_event_rate[4] = -0.1;
  CHECK(code_of([&] { validate_profile(p); }) == ErrorCode::InvalidProfile);
}

TEST_CASE("generated log covers the duration at 100 Hz") {
  const auto log = generate_log(quiet_profile(3), 12.5, "p42");
  REQUIRE(log.samples.size() == 1250);
  CHECK(log.player_id == "p42");
  CHECK(log.samples.front().t == 0.0);
  CHECK(log.samples[1249].t == 12.49);
  for (std::size_t i = 1; i < log.samples.size(); ++i) {
    REQUIRE(log.samples[i].t > log.samples[i - 1].t);
  }
}

TEST_CASE("same seed gives identical streams, different seeds differ") {
  BehaviorProfile p = quiet_profile(99);
  p.active_event_rate = {2, 2, 2, 2, 2, 2};
  p.lean_back_fraction = 0.3;
  p.dropout_rate = 1.0;
  p.dropout_mean_seconds = 5.0;
  const auto a = generate_log(p, 300.0);
  const auto b = generate_log(p, 300.0);
  CHECK(a == b);
  p.rng_seed = 100;
  CHECK_FALSE(generate_log(p, 300.0) == a);
}

TEST_CASE("no events and no lean-back give near-zero active features and lb") {
  const auto log = generate_log(quiet_profile(5), 360.0);
  const auto ds = build_dataset(std::vector<PlayerLog>{log});
  REQUIRE(ds.rows() == 2);
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < 6; ++c) {
      // Gaussian tail beyond 3 sigma is 0.0027; allow sampling noise on 18000 samples.
      CHECK(ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) < 0.0027 + 0.0015);
    }
    CHECK(ds.features(static_cast<Eigen::Index>(r), 6) == 0.0);
  }
}

TEST_CASE("full lean-back at 20 degrees puts az near cos(20) and lb at 1") {
  auto p = quiet_profile(6);
  p.lean_back_fraction = 1.0;
  p.lean_back_tilt_deg = 20.0;
  const auto log = generate_log(p, 180.0);
  double sum = 0.0;
  for (const auto& s : log.samples) sum += s.az;
  CHECK(sum / log.samples.size() == doctest::Approx(std::cos(20.0 * std::numbers::pi / 180.0)).epsilon(1e-3));
  const auto ds = build_dataset(std::vector<PlayerLog>{log});
  REQUIRE(ds.rows() == 1);
  CHECK(ds.features(0, 6) == 1.0);
}

TEST_CASE("lean-back covers the configured fraction of samples") {
  auto p = quiet_profile(8);
  p.lean_back_fraction = 0.37;
  p.lean_back_tilt_deg = 25.0;
  const auto log = generate_log(p, 1800.0);
  std::size_t below = 0;
  for (const auto& s : log.samples) below += s.az < 0.98 ? 1 : 0;
  CHECK(static_cast<double>(below) / log.samples.size() == doctest::Approx(0.37).epsilon(1e-3));
}

TEST_CASE("empirical quiescent std tracks the configured std within 10%") {
  BehaviorProfile p = quiet_profile(0);
  p.active_event_rate = {1, 1, 1, 1, 1, 1};
  p.quiescent_std_accel = {0.003, 0.005, 0.004};
  p.quiescent_std_gyro = {0.5, 0.9, 0.7};
  std::array<double, 6> total{};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    p.rng_seed = 1000 + seed;
    const auto ds = build_dataset(std::vector<PlayerLog>{generate_log(p, 540.0)});
    for (std::size_t c = 0; c < 6; ++c) {
      for (std::size_t r = 0; r < ds.rows(); ++r) {
        total[c] += std::sqrt(ds.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(7 + c))) /
                    static_cast<double>(ds.rows());
      }
    }
  }
  const std::array<double, 6> want = {0.003, 0.005, 0.004, 0.5, 0.9, 0.7};
  for (std::size_t c = 0; c < 6; ++c) {
    CHECK(total[c] / 10.0 == doctest::Approx(want[c]).epsilon(0.10));
  }
}

TEST_CASE("active portion tracks rate times mean event duration within 25%") {
  // Mean event length is 0.6 s, so the expected portion is rate * 0.6 / 60.
  struct Case {
    double rate;
    double amplitude;
  };
  for (const Case k : {Case{0.5, 12.0}, Case{1.0, 20.0}, Case{2.0, 30.0}}) {
    BehaviorProfile p = quiet_profile(0);
    p.active_event_rate = {k.rate, k.rate, k.rate, k.rate, k.rate, k.rate};
    p.active_event_amplitude = k.amplitude;
    double sum = 0.0;
    int n = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      p.rng_seed = 77 + seed;
      const auto ds = build_dataset(std::vector<PlayerLog>{generate_log(p, 900.0)});
      for (Eigen::Index r = 0; r < ds.features.rows(); ++r) {
        for (Eigen::Index c = 0; c < 6; ++c) {
          sum += ds.features(r, c);
          ++n;
        }
      }
    }
    const double expected = k.rate * 0.6 / 60.0;
    INFO("rate " << k.rate << " amplitude " << k.amplitude << " measured " << sum / n);
    CHECK(sum / n == doctest::Approx(expected).epsilon(0.25));
  }
}

TEST_CASE("default population has 9 high and 10 low players") {
  PopulationSpec spec;
  spec.duration_seconds = 30.0;
  const auto logs = generate_population(spec);
  REQUIRE(logs.size() == 19);
  int high = 0;
  for (const auto& l : logs) high += l.skill == Skill::high ? 1 : 0;
  CHECK(high == 9);
  CHECK(logs.front().player_id == "p01");
  CHECK(logs.back().player_id == "p19");
}

TEST_CASE("population counts and seeds") {
  PopulationSpec spec;
  spec.duration_seconds = 20.0;
  spec.high_count = 1;
  spec.low_count = 1;
  const auto a = generate_population(spec);
  CHECK(a.size() == 2);
  spec.seed = 7;
  const auto b = generate_population(spec);
  REQUIRE(b.size() == 2);
  CHECK(b[0].skill == a[0].skill);
  CHECK(b[1].skill == a[1].skill);
  CHECK_FALSE(b[0].samples == a[0].samples);
  spec.high_count = 0;
  spec.low_count = 0;
  CHECK(code_of([&] { generate_population(spec); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("population spec JSON round trips and accepts partial overrides") {
  PopulationSpec spec;
  spec.high.event_rate_median = 0.7;
  spec.low.lean_fraction_range = {0.3, 0.5};
  nlohmann::json j = spec;
  PopulationSpec back;
  from_json(j, back);
  CHECK(nlohmann::json(back) == j);

  PopulationSpec partial;
  from_json(nlohmann::json{{"high_count", 4}, {"low", {{"event_rate_median", 3.0}}}}, partial);
  CHECK(partial.high_count == 4);
  CHECK(partial.low_count == 10);
  CHECK(partial.low.event_rate_median == 3.0);
  CHECK(partial.low.lean_fraction_range == PopulationSpec::default_low().lean_fraction_range);
}

TEST_CASE("default population reproduces the class contrast") {
  const auto ds = build_dataset(generate_population(PopulationSpec{}));
  CHECK(ds.rows() >= 150);
  for (auto name : {"axn", "ayn", "azn", "gxn", "gyn", "gzn"}) {
    INFO(name);
    CHECK(mean_feature(ds, name, 1) < mean_feature(ds, name, 0));
  }
  CHECK(mean_feature(ds, "gyo", 1) > mean_feature(ds, "gyo", 0));
  CHECK(mean_feature(ds, "axo", 1) > mean_feature(ds, "axo", 0));
  CHECK(mean_feature(ds, "lb", 1) < mean_feature(ds, "lb", 0));
}
