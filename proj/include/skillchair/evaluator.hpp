#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skillchair/features.hpp"
#include "skillchair/model.hpp"

namespace skillchair {

struct PlayerLabel {
  std::string player;
  int label = 0;
};

/// One entry per distinct player, in first-appearance order.
std::vector<PlayerLabel> player_labels(const Dataset& dataset);

struct GroupSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
  std::size_t repeat = 0;
  /// Seed for anything stochastic inside this repeat (forest bootstrap).
  std::uint64_t seed = 0;
};

/// Draws `n_repeats` player-disjoint splits holding out `holdout` players,
/// uniformly without replacement. A draw is repeated until both classes
/// appear in the test players and in the training players.
/// Throws InfeasibleSplit when no such split exists.
std::vector<GroupSplit> make_splits(std::span<const PlayerLabel> groups, std::size_t n_repeats = 100,
                                    std::size_t holdout = 5, std::uint64_t seed = 0);

/// Mann-Whitney statistic: P(s1 > s0) + P(s1 == s0) / 2 over all
/// positive/negative pairs. Throws SingleClassLabels.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// One point per distinct score threshold, from (0,0) to (1,1).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels);

/// Trapezoidal area under a ROC polyline.
double trapezoid_area(std::span<const RocPoint> curve);

struct ExperimentOptions {
  /// Average window scores per player before computing AUC.
  bool per_player = false;
  /// Repeat whose test predictions yield the reported ROC curve.
  std::size_t roc_repeat = 0;
};

struct ModelReport {
  ModelKind kind = ModelKind::logreg;
  std::vector<double> auc_per_repeat;
  double auc_mean = 0.0;
  /// Population standard deviation over repeats.
  double auc_std = 0.0;
  std::vector<RocPoint> roc;
};

/// For every split: fit standardizer and model on training players only,
/// score the test players, record AUC. Player sets are checked for overlap
/// and coverage at runtime.
ModelReport run_experiment(const Dataset& dataset, const ModelSpec& spec, std::span<const GroupSplit> splits,
                           const ExperimentOptions& options = {});

struct NamedValue {
  std::string name;
  double value = 0.0;
};

/// The 13 weights in feature order, intercept excluded.
std::vector<NamedValue> feature_importance(const LogisticModel& model);

struct EvaluationSettings {
  std::size_t repeats = 100;
  std::size_t holdout = 5;
  std::uint64_t seed = 0;
  ExperimentOptions experiment;
  /// Null run: each repeat permutes the skill labels across players before
  /// drawing its split.
  bool permute_labels = false;
};

struct EvalReport {
  EvaluationSettings settings;
  std::size_t rows = 0;
  std::size_t players = 0;
  std::vector<ModelReport> models;
  /// Logistic-regression coefficients fit once on all rows; present when
  /// logistic regression is among the evaluated models.
  std::optional<std::vector<NamedValue>> importance;
  CorrelationMatrix correlations;
};

EvalReport evaluate(const Dataset& dataset, std::span<const ModelSpec> specs, const EvaluationSettings& settings);

/// Copy of `dataset` with player labels permuted (class counts preserved).
Dataset permute_player_labels(const Dataset& dataset, std::uint64_t seed);

}  // namespace skillchair
