#include "skillchair/knn.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "skillchair/error.hpp"
#include "skillchair/labels.hpp"

namespace skillchair {

KnnModel fit_knn(const Eigen::MatrixXd& X, std::span<const int> y, int k) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw Error(ErrorCode::InsufficientRows, "row count does not match label count");
  }
  require_binary_labels(y, false);
  if (k < 1 || k > X.rows()) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " with " + std::to_string(X.rows()) + " rows", "k");
  }
  return KnnModel{X, std::vector<int>(y.begin(), y.end()), k};
}

double knn_score(const KnnModel& model, const Eigen::VectorXd& x) {
  const auto n = model.train.rows();
  if (model.k < 1 || model.k > n) {
    throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(model.k) + " with " + std::to_string(n) + " rows", "k");
  }
  std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    dist[static_cast<std::size_t>(i)] = {(model.train.row(i).transpose() - x).squaredNorm(), i};
  }
  const auto k = static_cast<std::ptrdiff_t>(model.k);
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
  int positives = 0;
  for (std::ptrdiff_t i = 0; i < k; ++i) {
    positives += model.labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(i)].second)];
  }
  return static_cast<double>(positives) / static_cast<double>(model.k);
}

}  // namespace skillchair
