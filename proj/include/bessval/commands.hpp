#pragma once

// Command implementations behind the CLI. Each writes its result files plus
// metadata.json into config.output_dir and returns the written file names.

#include "bessval/config.hpp"
#include "bessval/evaluate.hpp"

#include <string>
#include <vector>

namespace bessval {

/// 0 = warnings only, 1 = progress, 2 = debug. Messages go to stderr.
void set_verbosity(int level);
void log_message(int level, const std::string& text);

/// Days of `prices` inside the configured window that have at least
/// min_history_days earlier days.
std::vector<PriceDay> evaluation_days(const ExperimentConfig& config, const std::vector<PriceDay>& prices);

/// Forecast ensembles of every configured model for the evaluation days.
/// Built-in forecasters see only days strictly before the target day.
std::vector<ModelForecasts> build_forecasts(const ExperimentConfig& config, const std::vector<PriceDay>& prices,
                                            const std::vector<PriceDay>& eval_days);

std::vector<std::string> cmd_sim_qbts(const ExperimentConfig& config);
std::vector<std::string> cmd_sim_correlation(const ExperimentConfig& config);
std::vector<std::string> cmd_backtest(const ExperimentConfig& config);
std::vector<std::string> cmd_score(const ExperimentConfig& config);
std::vector<std::string> cmd_cross_score(const ExperimentConfig& config);

/// Dispatches on config.experiment.
std::vector<std::string> run_experiment(const ExperimentConfig& config);

}  // namespace bessval
