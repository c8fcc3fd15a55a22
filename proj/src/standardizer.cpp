#include "skillchair/standardizer.hpp"

#include <cmath>
#include <string>

#include "skillchair/error.hpp"

namespace skillchair {

Standardizer Standardizer::fit(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) {
    throw Error(ErrorCode::InsufficientRows,
                "standardizer needs at least 2 rows, got " + std::to_string(rows.rows()));
  }
  Standardizer s;
  const auto n = static_cast<double>(rows.rows());
  s.mean = rows.colwise().mean().transpose();
  s.scale.resize(rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    const double ss = (rows.col(j).array() - s.mean(j)).square().sum();
    s.scale(j) = std::sqrt(ss / n);
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& rows) const {
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    if (scale(j) > 0.0) {
      out.col(j) = (rows.col(j).array() - mean(j)) / scale(j);
    } else {
      out.col(j).setZero();
    }
  }
  return out;
}

Eigen::VectorXd Standardizer::apply_row(const Eigen::VectorXd& row) const {
  Eigen::VectorXd out(row.size());
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    out(j) = scale(j) > 0.0 ? (row(j) - mean(j)) / scale(j) : 0.0;
  }
  return out;
}

}  // namespace skillchair
