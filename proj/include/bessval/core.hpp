#pragma once

// Domain types shared by every module: price days, scenario ensembles,
// battery configuration, bid schedules and risk specifications.

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bessval {

inline constexpr int kDefaultHours = 24;

/// Absolute tolerance (MWh) used by every feasibility check.
inline constexpr double kVolumeTolerance = 1e-9;

/// Invalid user input (bad file, bad parameter). Maps to CLI exit code 1.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Realized hourly prices of one delivery day (EUR/MWh).
class PriceDay {
public:
    PriceDay() = default;
    PriceDay(std::string date, std::vector<double> prices);

    const std::string& date() const { return date_; }
    const std::vector<double>& prices() const { return prices_; }
    int hours() const { return static_cast<int>(prices_.size()); }
    double operator[](int h) const { return prices_[static_cast<std::size_t>(h)]; }

private:
    std::string date_;
    std::vector<double> prices_;
};

/// M sampled price paths (rows = members, columns = hours).
class ScenarioEnsemble {
public:
    ScenarioEnsemble() = default;
    ScenarioEnsemble(std::string date, Eigen::MatrixXd paths);

    const std::string& date() const { return date_; }
    const Eigen::MatrixXd& paths() const { return paths_; }
    int members() const { return static_cast<int>(paths_.rows()); }
    int hours() const { return static_cast<int>(paths_.cols()); }

    /// Per-hour ensemble mean.
    Eigen::VectorXd mean_path() const;

private:
    std::string date_;
    Eigen::MatrixXd paths_;
};

/// Single-member ensemble equal to the given day (perfect foresight).
ScenarioEnsemble degenerate_ensemble(const PriceDay& day);

/// Per-hour quantile predictions; values(l, h) is the level-l quantile at hour h.
class QuantileForecast {
public:
    QuantileForecast() = default;
    QuantileForecast(std::vector<double> levels, Eigen::MatrixXd values);

    const std::vector<double>& levels() const { return levels_; }
    const Eigen::MatrixXd& values() const { return values_; }
    int hours() const { return static_cast<int>(values_.cols()); }

    /// Quantile at an arbitrary level, linear in probability between stored
    /// levels. Throws InputError outside [levels.front(), levels.back()].
    double quantile(int hour, double level) const;
    std::vector<double> quantile_path(double level) const;

private:
    std::vector<double> levels_;
    Eigen::MatrixXd values_;
};

/// Multivariate normal price model. Standard deviations are multiplied by
/// `dispersion`, so the effective covariance is dispersion^2 * sigma.
struct GaussianPriceSpec {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    double dispersion = 1.0;

    static GaussianPriceSpec independent(const Eigen::VectorXd& mu, double sd, double dispersion = 1.0);
    static GaussianPriceSpec bivariate(double mu_b, double mu_s, double sd, double rho, double dispersion = 1.0);

    Eigen::MatrixXd effective_covariance() const { return dispersion * dispersion * sigma; }
    double sd(int hour) const;
    void validate() const;
};

struct BatteryConfig {
    double capacity_mwh = 10.0;  // kappa
    double efficiency = 0.95;    // one-way eta
    double power_mw = 10.0;      // xi, duration = kappa / xi
    int cycles = 1;
    int max_buy_bids = 1;
    int max_sell_bids = 1;

    double duration_hours() const { return capacity_mwh / power_mw; }
    double max_buy_volume() const { return power_mw / efficiency; }
    double max_sell_volume() const { return power_mw * efficiency; }

    void validate() const;
};

/// Hourly market-side volumes. Limit prices are only used by the quantile
/// strategies; an empty vector means unlimited orders.
struct BidSchedule {
    std::vector<double> buy;
    std::vector<double> sell;
    std::vector<double> buy_limit;
    std::vector<double> sell_limit;

    static BidSchedule zero(int hours);

    int hours() const { return static_cast<int>(buy.size()); }
    int bid_count() const;
    bool is_zero() const;
};

enum class ConstraintFamily {
    Dimension,
    NegativeVolume,
    BuyPowerLimit,
    SellPowerLimit,
    SimultaneousBuySell,
    BuyBidCount,
    SellBidCount,
    ChargeLimits,
    TerminalBalance,
    CycleLimit,
};

const char* to_string(ConstraintFamily family);

struct Violation {
    ConstraintFamily family;
    int hour;  // -1 when the constraint is not hour-specific
    double excess;
};

struct ValidityReport {
    std::vector<Violation> violations;
    double terminal_balance = 0.0;

    bool ok() const { return violations.empty(); }
    bool violates(ConstraintFamily family) const;
    std::string describe() const;
};

/// Checks every storage constraint of a schedule. Throws InputError on a
/// dimension mismatch between the schedule's legs.
ValidityReport validate_bid_schedule(const BidSchedule& schedule, const BatteryConfig& config);

/// Storage-side balance after each hour.
std::vector<double> storage_trajectory(const BidSchedule& schedule, double efficiency);

/// Revenue of unlimited orders: sum_h (-buy_h / eta + sell_h * eta) * p_h.
double realized_return(const BidSchedule& schedule, std::span<const double> prices, double efficiency);
double realized_return(const BidSchedule& schedule, const PriceDay& day, double efficiency);

enum class RiskKind { ExpectedProfit, CVaR };

/// Objective of the battery program. CVaR_alpha is the mean of the worst
/// (1 - alpha) share of outcomes (lower tail).
struct RiskSpec {
    RiskKind kind = RiskKind::ExpectedProfit;
    double alpha = 0.0;

    static RiskSpec expected_profit() { return {}; }
    static RiskSpec cvar(double alpha);

    double tail_probability() const { return 1.0 - alpha; }
    std::string label() const;
    void validate() const;
};

RiskSpec parse_risk_spec(const std::string& text);

struct ScoreSeries {
    std::string model;
    std::string score;
    std::vector<double> values;
    bool lower_is_better = true;
};

}  // namespace bessval
