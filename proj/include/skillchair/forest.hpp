#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace skillchair {

struct TreeNode {
  /// -1 for a leaf.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Fraction of class-1 training samples reaching this node.
  double value = 0.0;
  int samples = 0;
};

/// Axis-aligned binary tree; rows with x[feature] <= threshold go left.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  double score(const Eigen::VectorXd& x) const;
  /// Longest root-to-leaf path in edges; a single leaf has depth 0.
  int depth() const;
};

struct ForestOptions {
  int n_trees = 100;
  int max_depth = 4;
  int min_leaf = 1;
  /// Features examined per split; 0 means floor(sqrt(d)).
  int max_features = 0;
  bool bootstrap = true;
  std::uint64_t seed = 0;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  ForestOptions options;

  /// Mean of the leaf class-1 fractions over all trees.
  double score(const Eigen::VectorXd& x) const;
};

/// Sum over both children of n * gini(child); lower is better.
double weighted_gini(int left_pos, int left_n, int right_pos, int right_n);

/// CART fit on `rows` (indices into X, repeats allowed for bootstrap
/// samples). Splits minimise weighted Gini over midpoints between sorted
/// distinct values; among candidates within 1e-12 of each other the lower
/// feature index and then the lower threshold wins. A node becomes a leaf when
/// pure, at max_depth, or when no split improves impurity.
DecisionTree fit_tree(const Eigen::MatrixXd& X, std::span<const int> y, std::span<const std::size_t> rows,
                      const ForestOptions& options, std::uint64_t seed);

ForestModel train_forest(const Eigen::MatrixXd& X, std::span<const int> y, const ForestOptions& options = {});

}  // namespace skillchair
