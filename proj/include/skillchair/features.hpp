#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "skillchair/sensor.hpp"

namespace skillchair {

inline constexpr std::size_t kFeatureCount = 13;

/// Column order used by every file and report: active portions, lean-back,
/// then quiescent dispersions.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "axn", "ayn", "azn", "gxn", "gyn", "gzn", "lb", "axo", "ayo", "azo", "gxo", "gyo", "gzo"};

/// Index of `name` in kFeatureNames; throws std::out_of_range if unknown.
std::size_t feature_index(std::string_view name);

inline constexpr double kDefaultLeanThresholdG = 0.98;

struct FeatureVector {
  std::array<double, kFeatureCount> values{};
  std::string player_id;
  std::size_t window_index = 0;
  Skill skill = Skill::low;

  double operator[](std::string_view name) const { return values[feature_index(name)]; }
};

/// Fraction of samples farther than 3 standard deviations from the series
/// mean. Mean and (population) standard deviation are taken over the series
/// itself; a constant series yields 0.
double active_portion(std::span<const double> series);

/// Population variance of the samples inside the 3-sigma band of the full
/// series. Returns 0 when fewer than two samples are inside the band.
double quiescent_dispersion(std::span<const double> series);

/// Fraction of samples with az strictly below `threshold_g`.
double lean_back_portion(std::span<const double> az, double threshold_g = kDefaultLeanThresholdG);

FeatureVector extract_features(const SessionWindow& window, double threshold_g = kDefaultLeanThresholdG);

/// Rows are windows; columns follow kFeatureNames.
struct Dataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<std::string> groups;
  std::vector<std::size_t> window_index;

  std::size_t rows() const { return labels.size(); }
  /// Distinct player ids in first-appearance order.
  std::vector<std::string> players() const;
  /// Label shared by all rows of `player`.
  int player_label(const std::string& player) const;

  Dataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const Dataset& other) const;
};

Dataset make_dataset(std::span<const FeatureVector> vectors);

struct FeatureOptions {
  WindowingOptions windowing;
  double threshold_g = kDefaultLeanThresholdG;
};

/// Windows every log and extracts one row per window.
Dataset build_dataset(std::span<const PlayerLog> logs, const FeatureOptions& options = {});

/// Pearson correlations over the 13 features plus skill as the last variable.
struct CorrelationMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
  /// True for zero-variance variables; their off-diagonal entries are 0.
  std::vector<bool> constant;
};

CorrelationMatrix correlation_matrix(const Dataset& dataset);

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);
void write_correlation_csv(const CorrelationMatrix& corr, const std::filesystem::path& path);

}  // namespace skillchair
