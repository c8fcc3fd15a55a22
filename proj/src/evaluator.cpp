#include "skillchair/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "skillchair/error.hpp"
#include "skillchair/labels.hpp"
#include "skillchair/rng.hpp"

namespace skillchair {

std::vector<PlayerLabel> player_labels(const Dataset& dataset) {
  std::vector<PlayerLabel> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < dataset.rows(); ++i) {
    if (seen.insert(dataset.groups[i]).second) {
      out.push_back({dataset.groups[i], dataset.labels[i]});
    }
  }
  return out;
}

std::vector<GroupSplit> make_splits(std::span<const PlayerLabel> groups, std::size_t n_repeats, std::size_t holdout,
                                    std::uint64_t seed) {
  std::size_t counts[2] = {0, 0};
  for (const auto& g : groups) {
    if (g.label != 0 && g.label != 1) {
      throw Error(ErrorCode::NonBinaryLabels, "player label must be 0 or 1", g.player);
    }
    ++counts[g.label];
  }
  const std::size_t n = groups.size();
  if (counts[0] < 2 || counts[1] < 2) {
    throw Error(ErrorCode::InfeasibleSplit, "need at least 2 players per class, have " + std::to_string(counts[0]) +
                                                " low and " + std::to_string(counts[1]) + " high");
  }
  if (holdout < 2 || holdout + 2 > n) {
    throw Error(ErrorCode::InfeasibleSplit, "holdout " + std::to_string(holdout) + " of " + std::to_string(n) +
                                                " players cannot leave both classes on both sides");
  }

  std::vector<GroupSplit> splits;
  splits.reserve(n_repeats);
  for (std::size_t r = 0; r < n_repeats; ++r) {
    const std::uint64_t repeat_seed = mix_seed(seed, r);
    Rng rng(repeat_seed);
    std::vector<std::size_t> order(n);
    for (int attempt = 0;; ++attempt) {
      if (attempt == 100000) {
        throw Error(ErrorCode::InfeasibleSplit, "no class-covering split found after 100000 draws");
      }
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(order.begin(), order.end());
      std::size_t test_counts[2] = {0, 0};
      for (std::size_t i = 0; i < holdout; ++i) {
        ++test_counts[groups[order[i]].label];
      }
      const bool test_ok = test_counts[0] > 0 && test_counts[1] > 0;
      const bool train_ok = counts[0] > test_counts[0] && counts[1] > test_counts[1];
      if (test_ok && train_ok) {
        break;
      }
    }
    std::vector<bool> in_test(n, false);
    for (std::size_t i = 0; i < holdout; ++i) {
      in_test[order[i]] = true;
    }
    GroupSplit split;
    split.repeat = r;
    split.seed = repeat_seed;
    for (std::size_t i = 0; i < n; ++i) {
      (in_test[i] ? split.test : split.train).push_back(groups[i].player);
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

namespace {

void require_both_classes(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::SingleClassLabels, "score and label counts differ");
  }
  require_binary_labels(labels, false);
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  if (pos == 0 || pos == static_cast<std::ptrdiff_t>(labels.size())) {
    throw Error(ErrorCode::SingleClassLabels, "labels contain a single class");
  }
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  require_both_classes(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Tied scores share the mean of their 1-based ranks.
  double positive_rank_sum = 0.0;
  double positives = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) {
      ++j;
    }
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank_sum += rank;
        positives += 1.0;
      }
    }
    i = j + 1;
  }
  const double negatives = static_cast<double>(n) - positives;
  const double u = positive_rank_sum - positives * (positives + 1.0) / 2.0;
  return u / (positives * negatives);
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> labels) {
  require_both_classes(scores, labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  const auto total_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double total_neg = static_cast<double>(n) - total_pos;

  std::vector<RocPoint> curve{{0.0, 0.0}};
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? tp : fp) += 1.0;
      ++j;
    }
    curve.push_back({fp / total_neg, tp / total_pos});
    i = j;
  }
  return curve;
}

double trapezoid_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

namespace {

struct RepeatResult {
  double auc = 0.0;
  std::vector<RocPoint> roc;
};

RepeatResult evaluate_split(const Dataset& dataset, const ModelSpec& spec, const GroupSplit& split,
                            const ExperimentOptions& options, bool want_roc) {
  const std::set<std::string> train(split.train.begin(), split.train.end());
  const std::set<std::string> test(split.test.begin(), split.test.end());
  for (const auto& p : test) {
    if (train.count(p) != 0) {
      throw Error(ErrorCode::DegenerateFold, "player appears in both train and test", p);
    }
  }
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  for (std::size_t i = 0; i < dataset.rows(); ++i) {
    const auto& g = dataset.groups[i];
    if (train.count(g) != 0) {
      train_rows.push_back(i);
    } else if (test.count(g) != 0) {
      test_rows.push_back(i);
    } else {
      throw Error(ErrorCode::DegenerateFold, "player is in neither train nor test", g);
    }
  }
  const Dataset train_set = dataset.subset(train_rows);
  const Dataset test_set = dataset.subset(test_rows);

  const TrainedModel model = fit_model(spec, train_set.features, train_set.labels, split.seed);
  const Eigen::VectorXd raw_scores = model.score(test_set.features);

  std::vector<double> scores(raw_scores.data(), raw_scores.data() + raw_scores.size());
  std::vector<int> labels = test_set.labels;
  if (options.per_player) {
    std::map<std::string, std::pair<double, int>> sums;
    std::map<std::string, int> player_label;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      auto& s = sums[test_set.groups[i]];
      s.first += scores[i];
      s.second += 1;
      player_label[test_set.groups[i]] = labels[i];
    }
    scores.clear();
    labels.clear();
    for (const auto& p : split.test) {
      if (auto it = sums.find(p); it != sums.end()) {
        scores.push_back(it->second.first / it->second.second);
        labels.push_back(player_label[p]);
      }
    }
  }

  RepeatResult result;
  try {
    result.auc = roc_auc(scores, labels);
    if (want_roc) {
      result.roc = roc_curve(scores, labels);
    }
  } catch (const Error& e) {
    throw Error(ErrorCode::DegenerateFold,
                "repeat " + std::to_string(split.repeat) + " test fold cannot be scored: " + e.what());
  }
  return result;
}

void summarize(ModelReport& report) {
  const auto n = static_cast<double>(report.auc_per_repeat.size());
  if (n == 0.0) {
    return;
  }
  double sum = 0.0;
  for (double a : report.auc_per_repeat) {
    sum += a;
  }
  report.auc_mean = sum / n;
  double sq = 0.0;
  for (double a : report.auc_per_repeat) {
    sq += (a - report.auc_mean) * (a - report.auc_mean);
  }
  report.auc_std = std::sqrt(sq / n);
}

}  // namespace

ModelReport run_experiment(const Dataset& dataset, const ModelSpec& spec, std::span<const GroupSplit> splits,
                           const ExperimentOptions& options) {
  const auto players = dataset.players();
  const std::set<std::string> all(players.begin(), players.end());
  ModelReport report;
  report.kind = spec.kind;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    const auto& split = splits[i];
    std::set<std::string> covered(split.train.begin(), split.train.end());
    covered.insert(split.test.begin(), split.test.end());
    if (covered != all) {
      throw Error(ErrorCode::DegenerateFold, "split players do not match dataset players",
                  "repeat " + std::to_string(split.repeat));
    }
    auto r = evaluate_split(dataset, spec, split, options, i == options.roc_repeat);
    report.auc_per_repeat.push_back(r.auc);
    if (i == options.roc_repeat) {
      report.roc = std::move(r.roc);
    }
  }
  summarize(report);
  return report;
}

std::vector<NamedValue> feature_importance(const LogisticModel& model) {
  std::vector<NamedValue> out;
  for (std::size_t i = 0; i < kFeatureCount && static_cast<Eigen::Index>(i) < model.weights.size(); ++i) {
    out.push_back({std::string(kFeatureNames[i]), model.weights(static_cast<Eigen::Index>(i))});
  }
  return out;
}

Dataset permute_player_labels(const Dataset& dataset, std::uint64_t seed) {
  auto groups = player_labels(dataset);
  std::vector<int> labels;
  for (const auto& g : groups) {
    labels.push_back(g.label);
  }
  Rng rng(seed);
  rng.shuffle(labels.begin(), labels.end());
  std::map<std::string, int> relabel;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    relabel[groups[i].player] = labels[i];
  }
  Dataset out = dataset;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    out.labels[i] = relabel[out.groups[i]];
  }
  return out;
}

EvalReport evaluate(const Dataset& dataset, std::span<const ModelSpec> specs, const EvaluationSettings& settings) {
  EvalReport report;
  report.settings = settings;
  report.rows = dataset.rows();
  report.players = dataset.players().size();
  report.correlations = correlation_matrix(dataset);

  if (!settings.permute_labels) {
    const auto groups = player_labels(dataset);
    const auto splits = make_splits(groups, settings.repeats, settings.holdout, settings.seed);
    for (const auto& spec : specs) {
      report.models.push_back(run_experiment(dataset, spec, splits, settings.experiment));
    }
  } else {
    std::vector<Dataset> permuted;
    std::vector<GroupSplit> splits;
    for (std::size_t r = 0; r < settings.repeats; ++r) {
      permuted.push_back(permute_player_labels(dataset, mix_seed(settings.seed ^ 0x6E756C6CULL, r)));
      auto split = make_splits(player_labels(permuted.back()), 1, settings.holdout, mix_seed(settings.seed, r));
      split[0].repeat = r;
      splits.push_back(std::move(split[0]));
    }
    for (const auto& spec : specs) {
      ModelReport m;
      m.kind = spec.kind;
      for (std::size_t r = 0; r < settings.repeats; ++r) {
        const bool want_roc = r == settings.experiment.roc_repeat;
        auto result = evaluate_split(permuted[r], spec, splits[r], settings.experiment, want_roc);
        m.auc_per_repeat.push_back(result.auc);
        if (want_roc) {
          m.roc = std::move(result.roc);
        }
      }
      summarize(m);
      report.models.push_back(std::move(m));
    }
  }

  for (const auto& spec : specs) {
    if (spec.kind == ModelKind::logreg) {
      const TrainedModel all = fit_model(spec, dataset.features, dataset.labels, settings.seed);
      report.importance = feature_importance(std::get<LogisticModel>(all.model));
      break;
    }
  }
  return report;
}

}  // namespace skillchair
