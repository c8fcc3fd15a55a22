#include "skillchair/model.hpp"

#include "skillchair/error.hpp"

namespace skillchair {

using nlohmann::json;

std::string_view model_key(ModelKind kind) {
  switch (kind) {
    case ModelKind::logreg: return "lr";
    case ModelKind::svm: return "svm";
    case ModelKind::knn: return "knn";
    case ModelKind::forest: return "rf";
  }
  return "?";
}

std::string_view model_display_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::logreg: return "Logistic Regression";
    case ModelKind::svm: return "Support Vector Machine";
    case ModelKind::knn: return "KNN";
    case ModelKind::forest: return "Random Forest";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view key) {
  for (auto kind : {ModelKind::logreg, ModelKind::svm, ModelKind::knn, ModelKind::forest}) {
    if (key == model_key(kind)) {
      return kind;
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown model '" + std::string(key) + "' (expected lr, svm, knn or rf)",
              "model");
}

Eigen::VectorXd TrainedModel::score(const Eigen::MatrixXd& raw_rows) const {
  const Eigen::MatrixXd X = standardizer.apply(raw_rows);
  Eigen::VectorXd out(X.rows());
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
          const Eigen::VectorXd x = X.row(i).transpose();
          if constexpr (std::is_same_v<M, LogisticModel>) {
            out(i) = m.margin(x);
          } else if constexpr (std::is_same_v<M, SvmModel>) {
            out(i) = m.score(x);
          } else if constexpr (std::is_same_v<M, KnnModel>) {
            out(i) = knn_score(m, x);
          } else {
            out(i) = m.score(x);
          }
        }
      },
      model);
  return out;
}

TrainedModel fit_model(const ModelSpec& spec, const Eigen::MatrixXd& raw_rows, std::span<const int> labels,
                       std::uint64_t seed) {
  TrainedModel out;
  out.kind = spec.kind;
  out.spec = spec;
  out.spec.forest.seed = seed;
  out.standardizer = Standardizer::fit(raw_rows);
  const Eigen::MatrixXd X = out.standardizer.apply(raw_rows);
  switch (spec.kind) {
    case ModelKind::logreg:
      out.model = train_logreg(X, labels, spec.logreg);
      break;
    case ModelKind::svm:
      out.model = train_svm(X, labels, spec.svm);
      break;
    case ModelKind::knn:
      out.model = fit_knn(X, labels, spec.knn_k);
      break;
    case ModelKind::forest:
      out.model = train_forest(X, labels, out.spec.forest);
      break;
  }
  return out;
}

namespace {

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a.push_back(v(i));
  }
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
  }
  return v;
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      it->get_to(out);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigError, e.what(), key);
    }
  }
}

json params_to_json(const LogisticModel& m) {
  return {{"weights", vec_to_json(m.weights)},
          {"intercept", m.intercept},
          {"iterations", m.iterations},
          {"objective", m.objective},
          {"converged", m.converged}};
}

json params_to_json(const SvmModel& m) {
  return {{"w", vec_to_json(m.w)},
          {"b", m.b},
          {"gamma", m.gamma},
          {"epochs_run", m.epochs_run},
          {"objective", m.objective}};
}

json params_to_json(const KnnModel& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.train.rows(); ++i) {
    rows.push_back(vec_to_json(m.train.row(i).transpose()));
  }
  return {{"k", m.k}, {"train", rows}, {"labels", m.labels}};
}

json params_to_json(const ForestModel& m) {
  json trees = json::array();
  for (const auto& t : m.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.samples});
    }
    trees.push_back(nodes);
  }
  return {{"trees", trees}};
}

}  // namespace

json spec_to_json(const ModelSpec& spec) {
  return {{"type", model_key(spec.kind)},
          {"logreg",
           {{"l2", spec.logreg.l2},
            {"initial_step", spec.logreg.initial_step},
            {"max_iter", spec.logreg.max_iter},
            {"tol", spec.logreg.tol}}},
          {"svm",
           {{"gamma", spec.svm.gamma},
            {"epochs", spec.svm.epochs},
            {"lr0", spec.svm.lr0},
            {"lr_decay", spec.svm.lr_decay}}},
          {"knn", {{"k", spec.knn_k}}},
          {"forest",
           {{"n_trees", spec.forest.n_trees},
            {"max_depth", spec.forest.max_depth},
            {"min_leaf", spec.forest.min_leaf},
            {"max_features", spec.forest.max_features},
            {"bootstrap", spec.forest.bootstrap},
            {"seed", spec.forest.seed}}}};
}

void spec_from_json(const json& j, ModelSpec& spec) {
  if (auto it = j.find("type"); it != j.end()) {
    spec.kind = parse_model_kind(it->get<std::string>());
  }
  if (auto it = j.find("logreg"); it != j.end()) {
    read_if(*it, "l2", spec.logreg.l2);
    read_if(*it, "initial_step", spec.logreg.initial_step);
    read_if(*it, "max_iter", spec.logreg.max_iter);
    read_if(*it, "tol", spec.logreg.tol);
  }
  if (auto it = j.find("svm"); it != j.end()) {
    read_if(*it, "gamma", spec.svm.gamma);
    read_if(*it, "epochs", spec.svm.epochs);
    read_if(*it, "lr0", spec.svm.lr0);
    read_if(*it, "lr_decay", spec.svm.lr_decay);
  }
  if (auto it = j.find("knn"); it != j.end()) {
    read_if(*it, "k", spec.knn_k);
  }
  if (auto it = j.find("forest"); it != j.end()) {
    read_if(*it, "n_trees", spec.forest.n_trees);
    read_if(*it, "max_depth", spec.forest.max_depth);
    read_if(*it, "min_leaf", spec.forest.min_leaf);
    read_if(*it, "max_features", spec.forest.max_features);
    read_if(*it, "bootstrap", spec.forest.bootstrap);
    read_if(*it, "seed", spec.forest.seed);
  }
}

json model_to_json(const TrainedModel& model) {
  json doc;
  doc["format"] = "skillchair-model";
  doc["version"] = kModelFormatVersion;
  doc["type"] = model_key(model.kind);
  doc["hyperparameters"] = spec_to_json(model.spec);
  doc["parameters"] = std::visit([](const auto& m) { return params_to_json(m); }, model.model);
  doc["standardizer"] = {{"mean", vec_to_json(model.standardizer.mean)},
                         {"scale", vec_to_json(model.standardizer.scale)}};
  return doc;
}

TrainedModel model_from_json(const json& doc) {
  try {
    if (doc.value("format", "") != "skillchair-model") {
      throw Error(ErrorCode::ConfigError, "not a skillchair model document", "format");
    }
    if (doc.value("version", 0) != kModelFormatVersion) {
      throw Error(ErrorCode::ConfigError, "unsupported model version", "version");
    }
    TrainedModel out;
    spec_from_json(doc.at("hyperparameters"), out.spec);
    out.kind = parse_model_kind(doc.at("type").get<std::string>());
    out.spec.kind = out.kind;
    out.standardizer.mean = vec_from_json(doc.at("standardizer").at("mean"));
    out.standardizer.scale = vec_from_json(doc.at("standardizer").at("scale"));
    const json& p = doc.at("parameters");
    switch (out.kind) {
      case ModelKind::logreg: {
        LogisticModel m;
        m.weights = vec_from_json(p.at("weights"));
        m.intercept = p.at("intercept").get<double>();
        m.iterations = p.at("iterations").get<int>();
        m.objective = p.at("objective").get<double>();
        m.converged = p.at("converged").get<bool>();
        out.model = std::move(m);
        break;
      }
      case ModelKind::svm: {
        SvmModel m;
        m.w = vec_from_json(p.at("w"));
        m.b = p.at("b").get<double>();
        m.gamma = p.at("gamma").get<double>();
        m.epochs_run = p.at("epochs_run").get<int>();
        m.objective = p.at("objective").get<double>();
        out.model = std::move(m);
        break;
      }
      case ModelKind::knn: {
        KnnModel m;
        m.k = p.at("k").get<int>();
        const auto& rows = p.at("train");
        const auto d = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows[0].size());
        m.train.resize(static_cast<Eigen::Index>(rows.size()), d);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          m.train.row(static_cast<Eigen::Index>(i)) = vec_from_json(rows[i]).transpose();
        }
        m.labels = p.at("labels").get<std::vector<int>>();
        out.model = std::move(m);
        break;
      }
      case ModelKind::forest: {
        ForestModel m;
        m.options = out.spec.forest;
        for (const auto& t : p.at("trees")) {
          DecisionTree tree;
          for (const auto& n : t) {
            tree.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                                  n.at(4).get<double>(), n.at(5).get<int>()});
          }
          m.trees.push_back(std::move(tree));
        }
        out.model = std::move(m);
        break;
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("malformed model document: ") + e.what());
  }
}

}  // namespace skillchair
