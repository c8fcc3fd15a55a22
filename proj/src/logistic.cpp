#include "skillchair/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skillchair/error.hpp"
#include "skillchair/labels.hpp"

namespace skillchair {

void require_binary_labels(std::span<const int> labels, bool require_both) {
  bool seen[2] = {false, false};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) {
      throw Error(ErrorCode::NonBinaryLabels, "label " + std::to_string(labels[i]) + " at row " + std::to_string(i));
    }
    seen[labels[i]] = true;
  }
  if (require_both && !(seen[0] && seen[1])) {
    throw Error(ErrorCode::SingleClassTraining, "training labels contain a single class");
  }
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double LogisticModel::predict_proba(const Eigen::VectorXd& x) const { return sigmoid(margin(x)); }

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

Eigen::VectorXd margins(const Eigen::MatrixXd& X, const Eigen::VectorXd& theta) {
  const Eigen::Index d = X.cols();
  return (X * theta.head(d)).array() + theta(d);
}

}  // namespace

double logreg_objective(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::VectorXd& theta, double l2) {
  const Eigen::VectorXd z = margins(X, theta);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    ll += y[static_cast<std::size_t>(i)] * z(i) - softplus(z(i));
  }
  return ll - 0.5 * l2 * theta.head(X.cols()).squaredNorm();
}

Eigen::VectorXd logreg_gradient(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::VectorXd& theta,
                                double l2) {
  const Eigen::Index d = X.cols();
  const Eigen::VectorXd z = margins(X, theta);
  Eigen::VectorXd residual(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    residual(i) = y[static_cast<std::size_t>(i)] - sigmoid(z(i));
  }
  Eigen::VectorXd grad(d + 1);
  grad.head(d) = X.transpose() * residual - l2 * theta.head(d);
  grad(d) = residual.sum();
  return grad;
}

LogisticModel train_logreg(const Eigen::MatrixXd& X, std::span<const int> y, const LogRegOptions& options) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw Error(ErrorCode::InsufficientRows, "row count does not match label count");
  }
  require_binary_labels(y);
  if (options.l2 < 0.0) {
    throw Error(ErrorCode::ConfigError, "l2 must be >= 0", "l2");
  }
  const Eigen::Index d = X.cols();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(d + 1);
  double f = logreg_objective(X, y, theta, options.l2);
  double step = options.initial_step;

  LogisticModel model;
  if (options.record_trace) {
    model.trace.push_back(f);
  }
  int iter = 0;
  for (; iter < options.max_iter; ++iter) {
    const Eigen::VectorXd g = logreg_gradient(X, y, theta, options.l2);
    if (g.lpNorm<Eigen::Infinity>() < options.tol) {
      model.converged = true;
      break;
    }
    const double g2 = g.squaredNorm();
    bool accepted = false;
    while (step > 1e-20) {
      Eigen::VectorXd candidate = theta + step * g;
      const double fc = logreg_objective(X, y, candidate, options.l2);
      if (fc >= f + 1e-4 * step * g2) {
        theta = std::move(candidate);
        f = fc;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      break;
    }
    if (options.record_trace) {
      model.trace.push_back(f);
    }
    step = std::min(step * 2.0, 1e6);
  }
  model.weights = theta.head(d);
  model.intercept = theta(d);
  model.iterations = iter;
  model.objective = f;
  return model;
}

}  // namespace skillchair
