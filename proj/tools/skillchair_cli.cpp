#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "skillchair/log_io.hpp"
#include "skillchair/pipeline.hpp"
#include "skillchair/report.hpp"

namespace fs = std::filesystem;
using namespace skillchair;

namespace {

struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> spec;
  std::optional<int> players;
  std::optional<std::uint64_t> seed;
  std::optional<double> duration_minutes;

  std::optional<std::string> logs;
  std::optional<std::string> store;

  std::optional<double> threshold_g;
  std::optional<double> window_seconds;
  std::optional<double> completeness;

  std::optional<std::string> models;
  std::optional<double> lr_l2;
  std::optional<int> lr_max_iter;
  std::optional<double> lr_tol;
  std::optional<double> svm_gamma;
  std::optional<int> svm_epochs;
  std::optional<double> svm_lr0;
  std::optional<double> svm_lr_decay;
  std::optional<int> knn_k;
  std::optional<int> rf_trees;
  std::optional<int> rf_depth;
  std::optional<int> rf_min_leaf;
  std::optional<int> rf_max_features;

  std::optional<std::size_t> repeats;
  std::optional<std::size_t> holdout;
  bool null_run = false;
  bool per_player = false;
  std::optional<std::string> out;
};

void add_config_flag(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON experiment config; flags override its values")->check(CLI::ExistingFile);
}

void add_population_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--spec", o.spec, "population spec JSON")->check(CLI::ExistingFile);
  cmd->add_option("--players", o.players, "player count, split evenly (extra player is low skill)")
      ->check(CLI::Range(2, 10000));
  cmd->add_option("--seed", o.seed, "master seed for simulation and evaluation");
  cmd->add_option("--duration-minutes", o.duration_minutes, "session length per player")
      ->check(CLI::PositiveNumber);
}

void add_source_flags(CLI::App* cmd, Overrides& o) {
  auto* logs = cmd->add_option("--logs", o.logs, "directory of JSONL player logs");
  auto* store = cmd->add_option("--store", o.store, "gateway store root; sealed sessions are used");
  logs->excludes(store);
}

void add_feature_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--threshold-g", o.threshold_g, "lean-back threshold on az, in g");
  cmd->add_option("--window", o.window_seconds, "window length in seconds")->check(CLI::PositiveNumber);
  cmd->add_option("--completeness", o.completeness, "minimum fraction of samples a window must hold")
      ->check(CLI::Range(0.0, 1.0));
}

void add_model_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--lr-l2", o.lr_l2, "logistic regression ridge strength");
  cmd->add_option("--lr-max-iter", o.lr_max_iter);
  cmd->add_option("--lr-tol", o.lr_tol, "gradient infinity-norm tolerance");
  cmd->add_option("--svm-gamma", o.svm_gamma, "slack penalty");
  cmd->add_option("--svm-epochs", o.svm_epochs);
  cmd->add_option("--svm-lr0", o.svm_lr0);
  cmd->add_option("--svm-lr-decay", o.svm_lr_decay);
  cmd->add_option("--knn-k", o.knn_k);
  cmd->add_option("--rf-trees", o.rf_trees);
  cmd->add_option("--rf-depth", o.rf_depth);
  cmd->add_option("--rf-min-leaf", o.rf_min_leaf);
  cmd->add_option("--rf-max-features", o.rf_max_features, "0 means floor(sqrt(d))");
}

void add_eval_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--models", o.models, "comma separated subset of lr,svm,knn,rf");
  cmd->add_option("--repeats", o.repeats);
  cmd->add_option("--holdout", o.holdout, "players held out per repeat");
  cmd->add_flag("--null", o.null_run, "shuffle player labels (null baseline)");
  cmd->add_flag("--per-player", o.per_player, "average window scores per player before AUC");
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) {
    out.push_back(cur);
  }
  return out;
}

ExperimentConfig build_config(const Overrides& o) {
  ExperimentConfig c = o.config ? read_config(*o.config) : ExperimentConfig{};
  if (o.spec) {
    c.population_spec = *o.spec;
  }
  resolve_config(c);
  if (o.players) {
    c.population.high_count = *o.players / 2;
    c.population.low_count = *o.players - c.population.high_count;
  }
  if (o.seed) {
    c.population.seed = *o.seed;
    c.evaluation.seed = *o.seed;
  }
  if (o.duration_minutes) {
    c.population.duration_seconds = *o.duration_minutes * 60.0;
  }
  if (o.logs) {
    c.logs_dir = *o.logs;
    c.store_dir.reset();
  }
  if (o.store) {
    c.store_dir = *o.store;
    c.logs_dir.reset();
  }
  if (o.threshold_g) c.features.threshold_g = *o.threshold_g;
  if (o.window_seconds) c.features.windowing.window_seconds = *o.window_seconds;
  if (o.completeness) c.features.windowing.completeness_fraction = *o.completeness;

  if (o.models) {
    std::vector<ModelSpec> picked;
    for (const auto& key : split_csv(*o.models)) {
      const ModelKind kind = parse_model_kind(key);
      ModelSpec spec;
      spec.kind = kind;
      for (const auto& existing : c.models) {
        if (existing.kind == kind) {
          spec = existing;
        }
      }
      picked.push_back(spec);
    }
    if (picked.empty()) {
      throw Error(ErrorCode::ConfigError, "no models selected", "--models");
    }
    c.models = picked;
  }
  for (auto& m : c.models) {
    if (o.lr_l2) m.logreg.l2 = *o.lr_l2;
    if (o.lr_max_iter) m.logreg.max_iter = *o.lr_max_iter;
    if (o.lr_tol) m.logreg.tol = *o.lr_tol;
    if (o.svm_gamma) m.svm.gamma = *o.svm_gamma;
    if (o.svm_epochs) m.svm.epochs = *o.svm_epochs;
    if (o.svm_lr0) m.svm.lr0 = *o.svm_lr0;
    if (o.svm_lr_decay) m.svm.lr_decay = *o.svm_lr_decay;
    if (o.knn_k) m.knn_k = *o.knn_k;
    if (o.rf_trees) m.forest.n_trees = *o.rf_trees;
    if (o.rf_depth) m.forest.max_depth = *o.rf_depth;
    if (o.rf_min_leaf) m.forest.min_leaf = *o.rf_min_leaf;
    if (o.rf_max_features) m.forest.max_features = *o.rf_max_features;
  }
  if (o.repeats) c.evaluation.repeats = *o.repeats;
  if (o.holdout) c.evaluation.holdout = *o.holdout;
  if (o.null_run) c.evaluation.permute_labels = true;
  if (o.per_player) c.evaluation.experiment.per_player = true;
  if (o.out) c.output = *o.out;
  validate_spec(c.population);
  return c;
}

int run(int argc, char** argv) {
  CLI::App app{"Smart-chair skill prediction pipeline"};
  app.require_subcommand(1);
  Overrides o;

  auto* simulate = app.add_subcommand("simulate", "generate synthetic player logs");
  add_config_flag(simulate, o);
  add_population_flags(simulate, o);
  simulate->add_option("--out", o.out, "output directory for logs")->required();

  GatewayOptions gw;
  auto* serve = app.add_subcommand("serve", "run the ingestion gateway until SIGINT/SIGTERM");
  serve->add_option("--host", gw.host, "listen address")->capture_default_str()->envname("SKILLCHAIR_HOST");
  serve->add_option("--port", gw.port, "listen port, 0 for any")->capture_default_str()->envname("SKILLCHAIR_PORT");
  std::string store_root = "gateway-store";
  serve->add_option("--store", store_root, "storage root")->capture_default_str()->envname("SKILLCHAIR_STORE");
  serve->add_option("--max-batch", gw.max_batch, "largest accepted batch")->capture_default_str();
  serve->add_flag("--fsync", gw.store.fsync, "fsync every batch");

  ReplayOptions ro;
  std::string replay_logs;
  bool no_close = false;
  auto* replay_cmd = app.add_subcommand("replay", "stream logs to a gateway as 1 s batches");
  replay_cmd->add_option("--logs", replay_logs, "directory of JSONL player logs")->required()->check(
      CLI::ExistingDirectory);
  replay_cmd->add_option("--gateway", ro.gateway, "gateway base URL")->capture_default_str();
  replay_cmd->add_option("--session", ro.session_id, "session id used for every player")->capture_default_str();
  replay_cmd->add_option("--speed", ro.speed, "playback speed, 0 for no pacing")->capture_default_str();
  replay_cmd->add_option("--retries", ro.max_retries, "retries per batch")->capture_default_str();
  replay_cmd->add_option("--backoff-ms", ro.retry_backoff_ms)->capture_default_str();
  replay_cmd->add_flag("--no-close", no_close, "leave sessions open");

  auto* extract = app.add_subcommand("extract", "windows and features as CSV");
  add_config_flag(extract, o);
  add_population_flags(extract, o);
  add_source_flags(extract, o);
  add_feature_flags(extract, o);
  std::string features_out;
  std::optional<std::string> corr_out;
  extract->add_option("--out", features_out, "features CSV path")->required();
  extract->add_option("--correlations", corr_out, "also write the feature correlation matrix here");

  auto* train = app.add_subcommand("train", "fit one model on a features CSV");
  std::string train_features;
  std::string model_key_arg = "lr";
  std::string model_out;
  train->add_option("--features", train_features, "features CSV from extract")->required()->check(
      CLI::ExistingFile);
  train->add_option("--model", model_key_arg, "lr, svm, knn or rf")->capture_default_str();
  train->add_option("--seed", o.seed);
  train->add_option("--out", model_out, "model JSON path")->required();
  add_model_flags(train, o);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "group-wise repeated holdout on a features CSV");
  std::string eval_features;
  add_config_flag(evaluate_cmd, o);
  evaluate_cmd->add_option("--features", eval_features, "features CSV from extract")->required()->check(
      CLI::ExistingFile);
  evaluate_cmd->add_option("--seed", o.seed);
  evaluate_cmd->add_option("--out", o.out, "report directory");
  add_eval_flags(evaluate_cmd, o);
  add_model_flags(evaluate_cmd, o);

  auto* run_cmd = app.add_subcommand("run", "logs to report in one step");
  add_config_flag(run_cmd, o);
  add_population_flags(run_cmd, o);
  add_source_flags(run_cmd, o);
  add_feature_flags(run_cmd, o);
  add_eval_flags(run_cmd, o);
  add_model_flags(run_cmd, o);
  run_cmd->add_option("--out", o.out, "report directory");

  auto* report = app.add_subcommand("report", "render SVGs and the AUC table from report.json");
  std::string report_dir;
  report->add_option("--dir", report_dir, "directory holding report.json")->required()->check(
      CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      const auto config = build_config(o);
      const auto logs = cmd_simulate(config, *o.out);
      std::cout << "wrote " << logs.size() << " logs to " << *o.out << "\n";
    } else if (*serve) {
      gw.store_root = store_root;
      cmd_serve(gw, std::cerr);
    } else if (*replay_cmd) {
      ro.close = !no_close;
      cmd_replay(replay_logs, ro, std::cout);
    } else if (*extract) {
      const auto config = build_config(o);
      const auto dataset = cmd_extract(config, features_out);
      if (corr_out) {
        write_correlation_csv(correlation_matrix(dataset), *corr_out);
      }
      std::cout << "wrote " << dataset.rows() << " windows from " << dataset.players().size() << " players to "
                << features_out << "\n";
    } else if (*train) {
      auto config = build_config(o);
      ModelSpec spec;
      spec.kind = parse_model_kind(model_key_arg);
      for (const auto& m : config.models) {
        if (m.kind == spec.kind) {
          spec = m;
        }
      }
      const auto dataset = read_dataset_csv(train_features);
      cmd_train(dataset, spec, config.evaluation.seed, model_out);
      std::cout << "wrote " << model_display_name(spec.kind) << " model to " << model_out << "\n";
    } else if (*evaluate_cmd) {
      const auto config = build_config(o);
      const auto dataset = read_dataset_csv(eval_features);
      const auto rep = cmd_evaluate(dataset, config);
      std::cout << format_auc_table(report_to_json(rep));
    } else if (*run_cmd) {
      const auto config = build_config(o);
      cmd_run(config, std::cout);
      std::cout << "report written to " << config.output.string() << "\n";
    } else if (*report) {
      cmd_report(report_dir, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "skillchair: [" << error_module(e.code()) << "] " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "skillchair: [io] " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "skillchair: internal error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
