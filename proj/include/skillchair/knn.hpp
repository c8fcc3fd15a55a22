#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace skillchair {

struct KnnModel {
  Eigen::MatrixXd train;
  std::vector<int> labels;
  int k = 5;
};

/// Throws KTooLarge unless 1 <= k <= rows.
KnnModel fit_knn(const Eigen::MatrixXd& X, std::span<const int> y, int k = 5);

/// Fraction of class-1 labels among the k Euclidean-nearest training rows.
/// Equal distances rank the lower row index first.
double knn_score(const KnnModel& model, const Eigen::VectorXd& x);

}  // namespace skillchair
