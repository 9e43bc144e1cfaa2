#pragma once

// Statistical forecast evaluation: point, univariate and multivariate scores,
// the joint (VaR, CVaR) score, calibration and Diebold-Mariano comparison.
// Rank-based scores live in ranks.hpp.

#include "bessval/core.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bessval {

struct PointScores {
    double mae = 0.0;   // against the per-hour ensemble median
    double rmse = 0.0;  // against the per-hour ensemble mean
};

PointScores point_scores(const ScenarioEnsemble& forecast, const PriceDay& day);

/// Energy-form CRPS of an ensemble for a scalar observation.
double crps(std::span<const double> members, double observed);
/// Hour-averaged CRPS of a day.
double crps(const ScenarioEnsemble& forecast, const PriceDay& day);
double energy_score(const ScenarioEnsemble& forecast, const PriceDay& day);
/// Variogram score of order p divided by H^(1/p), H = hours - 1.
double variogram_score(const ScenarioEnsemble& forecast, const PriceDay& day, double p);

struct DssResult {
    double value = 0.0;
    bool regularized = false;  // ridge added because M <= hours
};

DssResult dawid_sebastiani(const ScenarioEnsemble& forecast, const PriceDay& day);
/// Same score for an explicit mean and covariance.
double dawid_sebastiani(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const Eigen::VectorXd& y);

struct MpdMhd {
    double mpd = 0.0;
    double mhd = 0.0;
};

/// Peak/trough level and hour deviations of a point path.
MpdMhd mpd_mhd(std::span<const double> forecast_path, const PriceDay& day);

struct JointScore {
    double pinball = 0.0;
    double joint = 0.0;
};

/// Joint (VaR, CVaR) score with G1(v) = v and a logistic G2, for a lower
/// tail of probability `tail` (the CVaR level alpha maps to tail = 1 - alpha).
/// Requires e <= v.
JointScore pinball_and_joint_var_cvar(double v, double e, double y, double tail);

struct CalibrationRow {
    double level = 0.0;
    double observed_frequency = 0.0;
    double mc = 0.0;  // level - observed frequency
    long count = 0;
};

/// Pooled over days and hours: frequency of y < Q^level.
std::vector<CalibrationRow> marginal_calibration(const std::vector<QuantileForecast>& forecasts,
                                                 const std::vector<PriceDay>& days,
                                                 const std::vector<double>& levels);

/// Per-hour midpoint-rule quantiles of an ensemble at the given levels.
QuantileForecast ensemble_quantiles(const ScenarioEnsemble& forecast, const std::vector<double>& levels);

enum class DmAlternative {
    FirstBetter,   // H0: E[a - b] >= 0, rejected when a scores lower
    SecondBetter,  // H0: E[a - b] <= 0
};

struct DmResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool degenerate = false;  // zero-variance differential; no p-value
    double mean_difference = 0.0;
};

/// One-sided Diebold-Mariano test on d_t = a_t - b_t with a Newey-West
/// variance using `hac_lags` lags (0 = plain sample variance).
DmResult dm_test(std::span<const double> a, std::span<const double> b,
                 DmAlternative alternative = DmAlternative::FirstBetter, int hac_lags = 0);
DmResult dm_test(const ScoreSeries& a, const ScoreSeries& b,
                 DmAlternative alternative = DmAlternative::FirstBetter, int hac_lags = 0);

/// Every per-day score the toolkit reports, as (name, value) pairs in a
/// fixed order. `top_k` lists the k values for the top/bottom-k family.
/// DSS is NaN when the ensemble covariance is singular.
std::vector<std::pair<std::string, double>> day_scores(const ScenarioEnsemble& forecast, const PriceDay& day,
                                                       const std::vector<int>& top_k = {1, 2, 4, 8});

}  // namespace bessval
