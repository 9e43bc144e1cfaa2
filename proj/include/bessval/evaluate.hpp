#pragma once

// Backtests, economic performance measures, decision-quality cross-scoring
// and constructions showing that decision-based scores are not strictly proper.

#include "bessval/core.hpp"
#include "bessval/optimize.hpp"
#include "bessval/scoring.hpp"

#include <map>
#include <string>
#include <vector>

namespace bessval {

/// Per-day ensembles of one forecasting model, keyed by ISO date.
struct ModelForecasts {
    std::string model;
    std::map<std::string, ScenarioEnsemble> days;
};

struct BacktestRecord {
    std::string date;
    std::string model;
    BidSchedule schedule;
    double predicted_objective = 0.0;
    double realized_return = 0.0;
    std::vector<double> predicted_returns;  // schedule's return on every forecast member
};

struct BacktestSettings {
    BatteryConfig battery;
    RiskSpec risk;
    OptimizerKind optimizer = OptimizerKind::Milp;
    MilpOptions milp;
    int jobs = 1;
};

struct BacktestResult {
    std::vector<std::string> models;
    std::vector<std::string> dates;
    std::vector<BacktestRecord> records;  // date-major, models in input order
    BacktestSettings settings;

    const BacktestRecord& at(const std::string& model, const std::string& date) const;
    std::vector<const BacktestRecord*> model_records(const std::string& model) const;
};

/// Optimizes every (day, model) pair and settles it against realized prices.
/// Throws InputError listing dates a model has no forecast for.
BacktestResult run_backtest(const std::vector<ModelForecasts>& forecasts, const std::vector<PriceDay>& prices,
                            const BacktestSettings& settings);

struct EconomicMeasures {
    std::string model;
    int days = 0;
    double total_profit = 0.0;
    double sharpe = 0.0;
    bool sharpe_defined = false;  // false when the return SD is zero or fewer than 2 days
    double var_exceedance = 0.0;  // share of days with realized return below the predicted VaR
    int no_bid_days = 0;
};

/// Per-model measures. Each day's VaR_alpha comes from the model's own
/// predicted return distribution for the schedule it chose.
std::vector<EconomicMeasures> economic_measures(const BacktestResult& result, double alpha_for_var);

struct CrossScoreMatrix {
    std::vector<std::string> models;
    std::string score;                          // "FZ" (joint VaR/CVaR) or "SE" (squared error)
    Eigen::MatrixXd mean_scores;                // (i, m): model i's forecast scored on model m's bids
    std::vector<std::vector<std::vector<double>>> daily;  // [i][m][day]
    Eigen::MatrixXd dm_stat;                    // NaN on the diagonal and for degenerate cells
    Eigen::MatrixXd dm_p;
    std::vector<std::vector<bool>> degenerate;
};

/// Scores every model's predicted return distribution on every model's bids.
/// CVaR risk uses the joint (VaR, CVaR) score at the risk's alpha;
/// ExpectedProfit uses the squared error of the predicted mean. Off-diagonal
/// cells are tested against the column's diagonal under
/// H0: S(i on m) - S(m on m) >= 0.
CrossScoreMatrix cross_score(const BacktestResult& result, const std::vector<ModelForecasts>& forecasts,
                             int hac_lags = 0, int jobs = 1);

/// Keeps the reference at its cheapest and dearest hours and pulls every other
/// hour towards equally spaced targets strictly between them, preserving the
/// rank order. amplitude 0 returns the reference, 1 places hours on the targets.
/// Requires the cheapest hour to come before the dearest one.
std::vector<double> same_rank_forecast(const std::vector<double>& reference, double amplitude);
/// Ensemble version: shifts every member by the distortion of the mean path.
ScenarioEnsemble same_rank_forecast(const ScenarioEnsemble& reference, double amplitude);

/// Two-hour Gaussian bid setup: buy at b, sell at s.
struct TwinSetup {
    double sigma_b = 1.0;
    double sigma_s = 1.0;
    double rho = 0.0;
    double efficiency = 1.0;
    double capacity = 1.0;
};

/// Difference between the forecast's and the truth's revenue variance for a
/// full-capacity buy/sell bid, with forecast parameters (sigma_b_hat,
/// sigma_s_hat, rho_hat).
double revenue_variance_difference(const TwinSetup& truth, double sigma_b_hat, double sigma_s_hat, double rho_hat);

/// The sigma_b_hat that makes the revenue variance match the truth (the
/// positive root closest to sigma_b). Throws InputError when none exists.
double covariance_twin(const TwinSetup& truth, double sigma_s_hat, double rho_hat);

}  // namespace bessval
