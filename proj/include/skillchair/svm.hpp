#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace skillchair {

struct SvmOptions {
  /// Weight of the summed slacks: objective = |w|^2/2 + gamma/2 * sum(xi).
  double gamma = 1.0;
  int epochs = 2000;
  /// Epoch t moves lr0 / (1 + lr_decay * t) along the normalized subgradient.
  double lr0 = 1.0;
  double lr_decay = 0.01;
  bool record_trace = false;
};

struct SvmModel {
  Eigen::VectorXd w;
  double b = 0.0;
  double gamma = 1.0;
  int epochs_run = 0;
  /// Objective of (w, b) as tracked by the optimizer.
  double objective = 0.0;
  std::vector<double> trace;

  double score(const Eigen::VectorXd& x) const { return w.dot(x) + b; }
};

/// Labels in {0, 1}; mapped to {-1, +1} internally.
double svm_objective(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::VectorXd& w, double b,
                     double gamma);

/// Slack max(0, 1 - y_i (w.x_i + b)) per row, with y in {-1, +1}.
Eigen::VectorXd svm_slacks(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::VectorXd& w, double b);

/// Deterministic full-batch subgradient descent on the unconstrained primal.
/// The returned model is the best iterate, so the trace never increases.
SvmModel train_svm(const Eigen::MatrixXd& X, std::span<const int> y, const SvmOptions& options = {});

}  // namespace skillchair
