#include "skillchair/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "skillchair/error.hpp"
#include "skillchair/labels.hpp"
#include "skillchair/rng.hpp"

namespace skillchair {

double weighted_gini(int left_pos, int left_n, int right_pos, int right_n) {
  auto part = [](int pos, int n) {
    if (n == 0) {
      return 0.0;
    }
    const double p = pos;
    const double q = n - pos;
    return n - (p * p + q * q) / n;
  };
  return part(left_pos, left_n) + part(right_pos, right_n);
}

double DecisionTree::score(const Eigen::VectorXd& x) const {
  int node = 0;
  while (nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& n = nodes[static_cast<std::size_t>(node)];
    node = x(n.feature) <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(node)].value;
}

int DecisionTree::depth() const {
  if (nodes.empty()) {
    return 0;
  }
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  // Children are always appended after their parent.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    deepest = std::max(deepest, level[i]);
    if (n.feature >= 0) {
      level[static_cast<std::size_t>(n.left)] = level[i] + 1;
      level[static_cast<std::size_t>(n.right)] = level[i] + 1;
    }
  }
  return deepest;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

class TreeBuilder {
public:
  TreeBuilder(const Eigen::MatrixXd& X, std::span<const int> y, const ForestOptions& options, std::uint64_t seed)
      : X_(X), y_(y), options_(options), rng_(seed) {
    const auto d = static_cast<int>(X.cols());
    features_per_split_ = options.max_features > 0
                              ? std::min(options.max_features, d)
                              : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  }

  DecisionTree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(std::move(rows), 0);
    return std::move(tree_);
  }

private:
  int grow(std::vector<std::size_t> rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    int positives = 0;
    for (auto r : rows) {
      positives += y_[r];
    }
    const int n = static_cast<int>(rows.size());
    {
      auto& node = tree_.nodes.back();
      node.samples = n;
      node.value = n > 0 ? static_cast<double>(positives) / n : 0.0;
    }
    if (depth >= options_.max_depth || positives == 0 || positives == n || n < 2 * options_.min_leaf) {
      return index;
    }
    const Split split = best_split(rows, positives);
    if (split.feature < 0) {
      return index;
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) {
      (X_(static_cast<Eigen::Index>(r), split.feature) <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  std::vector<int> candidate_features() {
    const auto d = static_cast<int>(X_.cols());
    std::vector<int> all(static_cast<std::size_t>(d));
    std::iota(all.begin(), all.end(), 0);
    if (features_per_split_ >= d) {
      return all;
    }
    // Partial Fisher-Yates for a uniform subset, then index order.
    for (int i = 0; i < features_per_split_; ++i) {
      const auto j = i + static_cast<int>(rng_.below(static_cast<std::uint64_t>(d - i)));
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    all.resize(static_cast<std::size_t>(features_per_split_));
    std::sort(all.begin(), all.end());
    return all;
  }

  Split best_split(const std::vector<std::size_t>& rows, int positives) {
    const int n = static_cast<int>(rows.size());
    Split best;
    best.impurity = weighted_gini(positives, n, 0, 0) - 1e-12;
    std::vector<std::pair<double, int>> column(rows.size());
    for (int f : candidate_features()) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        column[i] = {X_(static_cast<Eigen::Index>(rows[i]), f), y_[rows[i]]};
      }
      std::sort(column.begin(), column.end());
      int left_pos = 0;
      for (int i = 0; i + 1 < n; ++i) {
        left_pos += column[static_cast<std::size_t>(i)].second;
        const double a = column[static_cast<std::size_t>(i)].first;
        const double b = column[static_cast<std::size_t>(i + 1)].first;
        if (a == b) {
          continue;
        }
        const int left_n = i + 1;
        if (left_n < options_.min_leaf || n - left_n < options_.min_leaf) {
          continue;
        }
        const double impurity = weighted_gini(left_pos, left_n, positives - left_pos, n - left_n);
        if (impurity < best.impurity) {
          double threshold = a + (b - a) / 2.0;
          if (!(threshold < b)) {
            threshold = a;
          }
          best = {f, threshold, impurity - 1e-12};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& X_;
  std::span<const int> y_;
  const ForestOptions& options_;
  Rng rng_;
  int features_per_split_ = 1;
  DecisionTree tree_;
};

}  // namespace

DecisionTree fit_tree(const Eigen::MatrixXd& X, std::span<const int> y, std::span<const std::size_t> rows,
                      const ForestOptions& options, std::uint64_t seed) {
  TreeBuilder builder(X, y, options, seed);
  return builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

double ForestModel::score(const Eigen::VectorXd& x) const {
  double sum = 0.0;
  for (const auto& t : trees) {
    sum += t.score(x);
  }
  return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
}

ForestModel train_forest(const Eigen::MatrixXd& X, std::span<const int> y, const ForestOptions& options) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw Error(ErrorCode::InsufficientRows, "row count does not match label count");
  }
  require_binary_labels(y, false);
  if (X.rows() < 1) {
    throw Error(ErrorCode::InsufficientRows, "forest needs at least one row");
  }
  if (options.n_trees < 1 || options.max_depth < 0 || options.min_leaf < 1) {
    throw Error(ErrorCode::ConfigError, "n_trees >= 1, max_depth >= 0 and min_leaf >= 1 required", "forest");
  }
  ForestModel forest;
  forest.options = options;
  const auto n = static_cast<std::uint64_t>(X.rows());
  for (int t = 0; t < options.n_trees; ++t) {
    const std::uint64_t tree_seed = mix_seed(options.seed, static_cast<std::uint64_t>(t));
    Rng sampler(mix_seed(tree_seed, 1));
    std::vector<std::size_t> rows(static_cast<std::size_t>(n));
    if (options.bootstrap) {
      for (auto& r : rows) {
        r = static_cast<std::size_t>(sampler.below(n));
      }
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    forest.trees.push_back(fit_tree(X, y, rows, options, tree_seed));
  }
  return forest;
}

}  // namespace skillchair
