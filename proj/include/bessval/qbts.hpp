#pragma once

// Quantile-based trading strategies: the coupled limit-order strategy (QBTS),
// its unlimited-order variant TS-1, settlement, and acceptance-probability /
// expected-profit calculators for Gaussian prices.

#include "bessval/core.hpp"

#include <cstdint>
#include <vector>

namespace bessval {

struct QbtsBid {
    int buy_hour = 0;
    int sell_hour = 1;
    double buy_limit = 0.0;   // forecast (1 - alpha)-quantile at the buy hour
    double sell_limit = 0.0;  // forecast alpha-quantile at the sell hour
    double buy_volume = 0.0;  // kappa / eta
    double sell_volume = 0.0; // eta * kappa
    double alpha = 0.0;
};

struct StrategyOutcome {
    bool accepted = false;
    double cash = 0.0;
    double traded_mwh = 0.0;
};

/// Picks b < s maximizing eta * median_s - median_b / eta (ties to the lowest
/// hours) and attaches the alpha-dependent limit prices. With
/// `unordered_pair` the cheapest and dearest median hours are used in any order.
QbtsBid qbts_construct(const QuantileForecast& forecast, double alpha, const BatteryConfig& config,
                       bool unordered_pair = false);

/// Coupled execution: both legs clear iff p_b <= buy_limit and p_s >= sell_limit.
StrategyOutcome qbts_settle(const QbtsBid& bid, const PriceDay& day);

struct Ts1Decision {
    BidSchedule schedule;
    int buy_hour = -1;
    int sell_hour = -1;
    double value = 0.0;  // eta * Q_s^alpha - Q_b^{1-alpha} / eta at the chosen pair
    bool trades = false;
};

/// Unlimited-order variant: maximizes eta * Q_s^alpha - Q_b^{1-alpha} / eta over b < s.
/// With the no-trade filter the day is skipped when that value is <= 0.
Ts1Decision ts1_construct(const QuantileForecast& forecast, double alpha, const BatteryConfig& config,
                          bool no_trade_filter = true);

/// Per-hour Gaussian quantiles mu_h + dispersion * sd_h * z_level.
QuantileForecast gaussian_quantile_forecast(const GaussianPriceSpec& spec, const std::vector<double>& levels);
double gaussian_quantile(const GaussianPriceSpec& spec, int hour, double level);

enum class ProbabilityMethod { AnalyticIndependent, MonteCarlo };

struct McSettings {
    long draws = 1'000'000;
    std::uint64_t seed = 1;
};

struct AcceptanceEstimate {
    double value = 0.0;
    double std_error = 0.0;  // 0 for the analytic method
};

/// Probability that true prices satisfy P_b <= Q~_b^{1-alpha} and
/// P_s >= Q~_s^alpha, with Q~ taken from `forecast`.
AcceptanceEstimate qbts_acceptance_probability(const GaussianPriceSpec& truth, const GaussianPriceSpec& forecast,
                                               int b, int s, double alpha, ProbabilityMethod method,
                                               const McSettings& mc = {});

struct QbtsProfit {
    double ap = 0.0;
    double ap_se = 0.0;
    double ep = 0.0;          // expected cash given acceptance; NaN when AP = 0
    bool ep_defined = true;
    double expected_profit = 0.0;
    double profit_se = 0.0;
};

QbtsProfit qbts_expected_profit(const GaussianPriceSpec& truth, const GaussianPriceSpec& forecast, int b, int s,
                                double alpha, const BatteryConfig& config, ProbabilityMethod method,
                                const McSettings& mc = {});

/// Share of ensemble members that would execute both legs of `bid`.
double empirical_acceptance_probability(const ScenarioEnsemble& forecast, const QbtsBid& bid);

}  // namespace bessval
