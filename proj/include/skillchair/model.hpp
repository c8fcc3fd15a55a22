#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "skillchair/forest.hpp"
#include "skillchair/knn.hpp"
#include "skillchair/logistic.hpp"
#include "skillchair/standardizer.hpp"
#include "skillchair/svm.hpp"

namespace skillchair {

enum class ModelKind { logreg, svm, knn, forest };

/// "lr", "svm", "knn", "rf".
std::string_view model_key(ModelKind kind);
/// Row label used in AUC tables.
std::string_view model_display_name(ModelKind kind);
/// Accepts the keys from model_key; throws Error{ConfigError} otherwise.
ModelKind parse_model_kind(std::string_view key);

struct ModelSpec {
  ModelKind kind = ModelKind::logreg;
  LogRegOptions logreg;
  SvmOptions svm;
  int knn_k = 5;
  ForestOptions forest;
};

/// A standardizer plus one fitted classifier. Scores grow with the
/// likelihood of class 1: the linear margin for LR and SVM, the neighbour
/// vote for k-NN and the mean leaf fraction for the forest.
struct TrainedModel {
  ModelKind kind = ModelKind::logreg;
  ModelSpec spec;
  Standardizer standardizer;
  std::variant<LogisticModel, SvmModel, KnnModel, ForestModel> model;

  /// Scores raw (unstandardized) feature rows.
  Eigen::VectorXd score(const Eigen::MatrixXd& raw_rows) const;
};

/// Fits the standardizer on `raw_rows`, then the classifier on the
/// standardized rows. `seed` overrides spec.forest.seed.
TrainedModel fit_model(const ModelSpec& spec, const Eigen::MatrixXd& raw_rows, std::span<const int> labels,
                       std::uint64_t seed = 0);

inline constexpr int kModelFormatVersion = 1;

/// Versioned document: format, version, type, hyperparameters, parameters,
/// standardizer.
nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);

nlohmann::json spec_to_json(const ModelSpec& spec);
/// Keys absent from `j` keep the values already in `spec`.
void spec_from_json(const nlohmann::json& j, ModelSpec& spec);

}  // namespace skillchair
