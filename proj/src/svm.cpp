#include "skillchair/svm.hpp"

#include <cmath>
#include <string>

#include "skillchair/error.hpp"
#include "skillchair/labels.hpp"

namespace skillchair {

namespace {

Eigen::VectorXd signed_labels(std::span<const int> y) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    s(static_cast<Eigen::Index>(i)) = y[i] == 1 ? 1.0 : -1.0;
  }
  return s;
}

double objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& ys, const Eigen::VectorXd& w, double b,
                 double gamma) {
  const Eigen::VectorXd m = ys.cwiseProduct((X * w).array().matrix() + Eigen::VectorXd::Constant(X.rows(), b));
  const double hinge = (1.0 - m.array()).max(0.0).sum();
  return 0.5 * w.squaredNorm() + 0.5 * gamma * hinge;
}

}  // namespace

Eigen::VectorXd svm_slacks(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::VectorXd& w, double b) {
  const Eigen::VectorXd ys = signed_labels(y);
  const Eigen::VectorXd m = ys.cwiseProduct((X * w).array().matrix() + Eigen::VectorXd::Constant(X.rows(), b));
  return (1.0 - m.array()).max(0.0).matrix();
}

double svm_objective(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::VectorXd& w, double b,
                     double gamma) {
  return objective(X, signed_labels(y), w, b, gamma);
}

SvmModel train_svm(const Eigen::MatrixXd& X, std::span<const int> y, const SvmOptions& options) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw Error(ErrorCode::InsufficientRows, "row count does not match label count");
  }
  require_binary_labels(y);
  if (!(options.gamma >= 0.0)) {
    throw Error(ErrorCode::ConfigError, "gamma must be >= 0", "gamma");
  }
  const Eigen::VectorXd ys = signed_labels(y);
  const Eigen::Index d = X.cols();

  SvmModel model;
  model.gamma = options.gamma;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  double f = objective(X, ys, w, b, options.gamma);
  if (options.record_trace) {
    model.trace.push_back(f);
  }

  Eigen::VectorXd current_w = w;
  double current_b = b;
  int epoch = 0;
  for (; epoch < options.epochs; ++epoch) {
    const Eigen::VectorXd m =
        ys.cwiseProduct((X * current_w).array().matrix() + Eigen::VectorXd::Constant(X.rows(), current_b));
    Eigen::VectorXd gw = current_w;
    double gb = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      if (m(i) < 1.0) {
        gw -= 0.5 * options.gamma * ys(i) * X.row(i).transpose();
        gb -= 0.5 * options.gamma * ys(i);
      }
    }
    const double norm = std::sqrt(gw.squaredNorm() + gb * gb);
    if (norm == 0.0) {
      break;
    }
    // normalized subgradient step; the best iterate seen so far is kept
    const double step = options.lr0 / (1.0 + options.lr_decay * epoch) / norm;
    current_w -= step * gw;
    current_b -= step * gb;
    const double fc = objective(X, ys, current_w, current_b, options.gamma);
    if (fc < f) {
      w = current_w;
      b = current_b;
      f = fc;
    }
    if (options.record_trace) {
      model.trace.push_back(f);
    }
  }
  model.w = w;
  model.b = b;
  model.epochs_run = epoch;
  model.objective = f;
  return model;
}

}  // namespace skillchair
