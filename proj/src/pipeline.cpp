#include "skillchair/pipeline.hpp"

#include <csignal>
#include <fstream>
#include <ostream>

#include "skillchair/log_io.hpp"
#include "skillchair/report.hpp"
#include "skillchair/session_store.hpp"

namespace skillchair {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<ModelSpec> ExperimentConfig::default_model_specs() {
  std::vector<ModelSpec> specs;
  for (auto kind : {ModelKind::logreg, ModelKind::svm, ModelKind::knn, ModelKind::forest}) {
    ModelSpec spec;
    spec.kind = kind;
    specs.push_back(spec);
  }
  return specs;
}

EvaluationSettings ExperimentConfig::default_evaluation() {
  EvaluationSettings s;
  s.repeats = 100;
  s.holdout = 5;
  s.seed = 2019;
  return s;
}

namespace {

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (auto key : allowed) {
      ok = ok || it.key() == key;
    }
    if (!ok) {
      throw Error(ErrorCode::ConfigError, "unknown key", where + it.key());
    }
  }
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
  if (auto it = obj.find(key); it != obj.end()) {
    out = it->get<T>();
  }
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  if (!doc.is_object()) {
    throw Error(ErrorCode::ConfigError, "config must be a JSON object");
  }
  try {
    reject_unknown(doc,
                   {"population_spec", "population", "logs", "store", "gateway", "features", "models",
                    "evaluation", "output"},
                   "");
    if (auto it = doc.find("population_spec"); it != doc.end() && !it->is_null()) {
      c.population_spec = it->get<std::string>();
    }
    if (auto it = doc.find("population"); it != doc.end()) {
      from_json(*it, c.population);
    }
    if (auto it = doc.find("logs"); it != doc.end() && !it->is_null()) {
      c.logs_dir = it->get<std::string>();
    }
    if (auto it = doc.find("store"); it != doc.end() && !it->is_null()) {
      c.store_dir = it->get<std::string>();
    }
    if (auto it = doc.find("gateway"); it != doc.end() && !it->is_null()) {
      c.gateway = it->get<std::string>();
    }
    if (auto it = doc.find("features"); it != doc.end()) {
      reject_unknown(*it, {"threshold_g", "window_seconds", "completeness"}, "features.");
      read_if(*it, "threshold_g", c.features.threshold_g);
      read_if(*it, "window_seconds", c.features.windowing.window_seconds);
      read_if(*it, "completeness", c.features.windowing.completeness_fraction);
    }
    if (auto it = doc.find("models"); it != doc.end()) {
      c.models.clear();
      for (const auto& m : *it) {
        ModelSpec spec;
        if (m.is_string()) {
          spec.kind = parse_model_kind(m.get<std::string>());
        } else {
          spec_from_json(m, spec);
        }
        c.models.push_back(spec);
      }
    }
    if (auto it = doc.find("evaluation"); it != doc.end()) {
      reject_unknown(*it, {"repeats", "holdout", "seed", "per_player", "roc_repeat", "null"}, "evaluation.");
      read_if(*it, "repeats", c.evaluation.repeats);
      read_if(*it, "holdout", c.evaluation.holdout);
      read_if(*it, "seed", c.evaluation.seed);
      read_if(*it, "per_player", c.evaluation.experiment.per_player);
      read_if(*it, "roc_repeat", c.evaluation.experiment.roc_repeat);
      read_if(*it, "null", c.evaluation.permute_labels);
    }
    if (auto it = doc.find("output"); it != doc.end()) {
      c.output = it->get<std::string>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  if (c.models.empty()) {
    throw Error(ErrorCode::ConfigError, "at least one model is required", "models");
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["population_spec"] = c.population_spec ? json(c.population_spec->string()) : json(nullptr);
  doc["population"] = c.population;
  doc["logs"] = c.logs_dir ? json(c.logs_dir->string()) : json(nullptr);
  doc["store"] = c.store_dir ? json(c.store_dir->string()) : json(nullptr);
  doc["gateway"] = c.gateway ? json(*c.gateway) : json(nullptr);
  doc["features"] = {{"threshold_g", c.features.threshold_g},
                     {"window_seconds", c.features.windowing.window_seconds},
                     {"completeness", c.features.windowing.completeness_fraction}};
  json models = json::array();
  for (const auto& m : c.models) {
    models.push_back(spec_to_json(m));
  }
  doc["models"] = models;
  doc["evaluation"] = {{"repeats", c.evaluation.repeats},
                       {"holdout", c.evaluation.holdout},
                       {"seed", c.evaluation.seed},
                       {"per_player", c.evaluation.experiment.per_player},
                       {"roc_repeat", c.evaluation.experiment.roc_repeat},
                       {"null", c.evaluation.permute_labels}};
  doc["output"] = c.output.string();
  return doc;
}

ExperimentConfig read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ConfigError, "cannot open config file", path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, e.what(), path.string());
  }
  return config_from_json(doc);
}

void resolve_config(ExperimentConfig& config) {
  if (config.population_spec) {
    config.population = read_population_spec(*config.population_spec);
  }
  if (config.logs_dir && !fs::is_directory(*config.logs_dir)) {
    throw Error(ErrorCode::ConfigError, "logs directory does not exist", config.logs_dir->string());
  }
  if (config.store_dir && !fs::is_directory(*config.store_dir)) {
    throw Error(ErrorCode::ConfigError, "store directory does not exist", config.store_dir->string());
  }
}

std::string_view error_module(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteChannel:
    case ErrorCode::NegativeTimestamp:
    case ErrorCode::MalformedRecord:
    case ErrorCode::UnsortedLog:
      return "sensor-core";
    case ErrorCode::SchemaError:
    case ErrorCode::StorageError:
    case ErrorCode::UnknownSession:
    case ErrorCode::AlreadyClosed:
    case ErrorCode::CorruptLog:
      return "ingest-gateway";
    case ErrorCode::GatewayUnreachable:
    case ErrorCode::InvalidProfile:
    case ErrorCode::InvalidSpec:
      return "chair-sim";
    case ErrorCode::EmptySeries:
    case ErrorCode::InsufficientRows:
      return "feature-extract";
    case ErrorCode::NonBinaryLabels:
    case ErrorCode::SingleClassTraining:
    case ErrorCode::KTooLarge:
      return "learners";
    case ErrorCode::InfeasibleSplit:
    case ErrorCode::SingleClassLabels:
    case ErrorCode::DegenerateFold:
      return "evaluator";
    case ErrorCode::ConfigError:
      return "cli";
  }
  return "cli";
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidProfile:
    case ErrorCode::InvalidSpec:
    case ErrorCode::KTooLarge:
    case ErrorCode::InfeasibleSplit:
      return 2;
    default:
      return 3;
  }
}

std::vector<PlayerLog> cmd_simulate(const ExperimentConfig& config, const fs::path& out_dir) {
  auto logs = generate_population(config.population);
  write_log_directory(logs, out_dir);
  return logs;
}

void cmd_serve(const GatewayOptions& options, std::ostream& log) {
  // Block the signals before any server thread exists so only sigwait sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  GatewayServer server(options);
  const int port = server.start();
  log << "listening on " << options.host << ":" << port << " store=" << options.store_root.string() << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  log << "signal " << sig << ", shutting down" << std::endl;
  server.stop();
}

std::vector<ReplaySummary> cmd_replay(const fs::path& logs_dir, const ReplayOptions& options, std::ostream& log) {
  std::vector<ReplaySummary> out;
  for (const auto& player : read_log_directory(logs_dir)) {
    auto summary = replay(player, options);
    log << player.player_id << ": batches=" << summary.batches_sent << " samples=" << summary.samples_sent
        << " retries=" << summary.retries << " gaps=" << summary.gaps << "\n";
    out.push_back(summary);
  }
  return out;
}

std::vector<PlayerLog> load_logs(const ExperimentConfig& config) {
  if (config.store_dir) {
    SessionStore store(*config.store_dir);
    return store.load_sealed_logs();
  }
  if (config.logs_dir) {
    return read_log_directory(*config.logs_dir);
  }
  return generate_population(config.population);
}

Dataset cmd_extract(const ExperimentConfig& config, const fs::path& out_csv) {
  const auto logs = load_logs(config);
  auto dataset = build_dataset(logs, config.features);
  write_dataset_csv(dataset, out_csv);
  return dataset;
}

TrainedModel cmd_train(const Dataset& dataset, const ModelSpec& spec, std::uint64_t seed, const fs::path& out_json) {
  auto model = fit_model(spec, dataset.features, dataset.labels, seed);
  if (!out_json.parent_path().empty()) {
    fs::create_directories(out_json.parent_path());
  }
  std::ofstream out(out_json);
  out << model_to_json(model).dump(2) << "\n";
  if (!out) {
    throw Error(ErrorCode::StorageError, "cannot write model", out_json.string());
  }
  return model;
}

EvalReport cmd_evaluate(const Dataset& dataset, const ExperimentConfig& config) {
  auto report = evaluate(dataset, config.models, config.evaluation);
  write_report(report, config.output);
  render_report_svgs(report_to_json(report), config.output);
  return report;
}

EvalReport cmd_run(const ExperimentConfig& config, std::ostream& out) {
  const auto logs = load_logs(config);
  const auto dataset = build_dataset(logs, config.features);
  fs::create_directories(config.output);
  write_dataset_csv(dataset, config.output / "features.csv");
  auto report = cmd_evaluate(dataset, config);
  out << format_auc_table(report_to_json(report));
  return report;
}

void cmd_report(const fs::path& report_dir, std::ostream& out) {
  std::ifstream in(report_dir / "report.json");
  if (!in) {
    throw Error(ErrorCode::ConfigError, "no report.json", report_dir.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptLog, e.what(), (report_dir / "report.json").string());
  }
  render_report_svgs(doc, report_dir);
  out << format_auc_table(doc);
}

}  // namespace skillchair
