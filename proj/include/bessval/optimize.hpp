#pragma once

// Battery arbitrage optimizers over a scenario ensemble: single-pair
// enumeration, the full mixed-integer program, and a brute-force oracle.

#include "bessval/core.hpp"
#include "bessval/milp.hpp"

#include <span>
#include <string>
#include <vector>

namespace bessval {

struct RiskValue {
    double value = 0.0;  // mean for ExpectedProfit, CVaR for CVaR
    double var = 0.0;    // VaR threshold (CVaR only; equals value otherwise)
};

/// Empirical risk functional. CVaR_alpha averages the lowest t = (1 - alpha) n
/// outcomes, weighting the boundary order statistic by the fractional part
/// of t; VaR is the ceil(t)-th smallest outcome.
RiskValue risk_measure(std::span<const double> returns, const RiskSpec& risk);

/// Per-member return of a fixed schedule against every forecast path.
std::vector<double> predicted_objective_distribution(const ScenarioEnsemble& forecast,
                                                     const BidSchedule& schedule, double efficiency);

/// CVaR_alpha of a return sample via its linear-programming representation
/// max_z  z - sum_m max(z - R_m, 0) / ((1 - alpha) M).
double cvar_linear_program(std::span<const double> returns, double alpha);

struct PairValueTable {
    Eigen::MatrixXd values;  // values(b, s) for b < s; NaN elsewhere
    double no_action = 0.0;
};

struct DpResult {
    BidSchedule schedule;
    PairValueTable table;
    double objective = 0.0;
    int buy_hour = -1;
    int sell_hour = -1;
};

/// Enumerates every single charge/discharge pair b < s at full usable energy
/// min(kappa, xi) and returns the best one, or no action when none is
/// strictly positive. Requires one buy and one sell bid.
DpResult dp_optimize(const ScenarioEnsemble& forecast, const BatteryConfig& config, const RiskSpec& risk);

struct MilpSolution {
    BidSchedule schedule;
    double objective = 0.0;
    MilpStatus status = MilpStatus::Optimal;
    double gap = 0.0;
    long nodes = 0;
};

MilpProblem build_battery_milp(const ScenarioEnsemble& forecast, const BatteryConfig& config,
                               const RiskSpec& risk);

MilpSolution milp_optimize(const ScenarioEnsemble& forecast, const BatteryConfig& config,
                           const RiskSpec& risk, const MilpOptions& options = {});

/// Exhaustive search over schedules whose hourly volumes come from
/// `volume_grid` (market-side MWh, applied to either leg). Testing oracle.
MilpSolution brute_force_optimize(const ScenarioEnsemble& forecast, const BatteryConfig& config,
                                  const RiskSpec& risk, const std::vector<double>& volume_grid,
                                  long long budget = 10'000'000);

/// Writes the battery program in CPLEX LP text format for external solvers.
void write_lp_file(const MilpProblem& problem, const std::string& path);

enum class OptimizerKind { Dp, Milp };

OptimizerKind parse_optimizer(const std::string& text);
const char* to_string(OptimizerKind kind);

struct DayDecision {
    BidSchedule schedule;
    double predicted_objective = 0.0;
};

DayDecision optimize_day(const ScenarioEnsemble& forecast, const BatteryConfig& config, const RiskSpec& risk,
                         OptimizerKind kind, const MilpOptions& options = {});

}  // namespace bessval
