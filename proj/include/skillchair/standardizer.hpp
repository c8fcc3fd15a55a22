#pragma once

#include <Eigen/Core>

namespace skillchair {

/// Per-column affine rescaling learned from training rows only.
/// Population standard deviation; a zero-variance column maps to 0.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  /// Throws Error{InsufficientRows} for fewer than two rows.
  static Standardizer fit(const Eigen::MatrixXd& rows);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
  Eigen::VectorXd apply_row(const Eigen::VectorXd& row) const;
};

}  // namespace skillchair
