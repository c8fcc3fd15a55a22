#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace skillchair {

struct LogRegOptions {
  /// Ridge strength on the weights; the intercept is not penalized.
  double l2 = 1e-4;
  /// First trial step of the backtracking line search.
  double initial_step = 1.0;
  int max_iter = 20000;
  /// Converged when the gradient's infinity norm drops below this.
  double tol = 1e-6;
  bool record_trace = false;
};

struct LogisticModel {
  Eigen::VectorXd weights;
  double intercept = 0.0;
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
  /// Objective after every accepted iteration when record_trace is set.
  std::vector<double> trace;

  double margin(const Eigen::VectorXd& x) const { return weights.dot(x) + intercept; }
  double predict_proba(const Eigen::VectorXd& x) const;
};

double sigmoid(double z);

/// Penalized log-likelihood: sum_i log Pr(y_i | x_i) - l2/2 * |w|^2.
/// `theta` holds the weights followed by the intercept.
double logreg_objective(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::VectorXd& theta, double l2);

/// Gradient of logreg_objective with respect to theta.
Eigen::VectorXd logreg_gradient(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::VectorXd& theta,
                                double l2);

/// Full-batch gradient ascent with Armijo backtracking; the objective never
/// decreases between iterations.
LogisticModel train_logreg(const Eigen::MatrixXd& X, std::span<const int> y, const LogRegOptions& options = {});

}  // namespace skillchair
