#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "skillchair/error.hpp"
#include "skillchair/evaluator.hpp"
#include "skillchair/features.hpp"
#include "skillchair/gateway.hpp"
#include "skillchair/model.hpp"
#include "skillchair/replay.hpp"
#include "skillchair/simulator.hpp"

namespace skillchair {

/// Everything a pipeline command needs. Loaded from a JSON file; command
/// line flags are applied on top afterwards.
struct ExperimentConfig {
  std::optional<std::filesystem::path> population_spec;
  PopulationSpec population;
  /// Log source for extract/run: a directory of JSONL logs or a gateway store.
  std::optional<std::filesystem::path> logs_dir;
  std::optional<std::filesystem::path> store_dir;
  std::optional<std::string> gateway;
  FeatureOptions features;
  std::vector<ModelSpec> models = default_model_specs();
  EvaluationSettings evaluation = default_evaluation();
  std::filesystem::path output = "out";

  static std::vector<ModelSpec> default_model_specs();
  static EvaluationSettings default_evaluation();
};

/// Keys: population_spec, population, logs, store, gateway, features{threshold_g,
/// window_seconds, completeness}, models[...], evaluation{repeats, holdout,
/// seed, per_player, roc_repeat, null}, output. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig read_config(const std::filesystem::path& path);

/// Loads the population spec file if one is configured and overrides the
/// inline population; checks that referenced input paths exist.
void resolve_config(ExperimentConfig& config);

std::string_view error_module(ErrorCode code);
/// 2 for configuration problems, 3 for bad or missing data.
int exit_code_for(ErrorCode code);

std::vector<PlayerLog> cmd_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Serves until SIGINT or SIGTERM.
void cmd_serve(const GatewayOptions& options, std::ostream& log);

std::vector<ReplaySummary> cmd_replay(const std::filesystem::path& logs_dir, const ReplayOptions& options,
                                      std::ostream& log);

/// Loads logs from the configured store or logs directory.
std::vector<PlayerLog> load_logs(const ExperimentConfig& config);

Dataset cmd_extract(const ExperimentConfig& config, const std::filesystem::path& out_csv);

TrainedModel cmd_train(const Dataset& dataset, const ModelSpec& spec, std::uint64_t seed,
                       const std::filesystem::path& out_json);

EvalReport cmd_evaluate(const Dataset& dataset, const ExperimentConfig& config);

/// logs -> windows -> features -> evaluation -> report files and SVGs.
/// Prints the AUC table to `out`.
EvalReport cmd_run(const ExperimentConfig& config, std::ostream& out);

void cmd_report(const std::filesystem::path& report_dir, std::ostream& out);

}  // namespace skillchair
