#pragma once

// Synthetic price processes, Gaussian-copula scenario sampling with
// rank-reordering, and the benchmark forecasters.

#include "bessval/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bessval {

/// Draws `count` paths from N(mu, dispersion^2 * sigma). Positive
/// semidefinite covariances (including zero) are allowed.
ScenarioEnsemble sample_gaussian_prices(const GaussianPriceSpec& spec, int count, std::uint64_t seed,
                                        const std::string& date = "");

enum class CopulaKind { Independent, Empirical, Weekday };

CopulaKind parse_copula_kind(const std::string& text);
const char* to_string(CopulaKind kind);

struct CopulaModel {
    CopulaKind kind = CopulaKind::Independent;
    std::vector<Eigen::MatrixXd> correlations;  // one matrix, or seven indexed by weekday (0 = Monday)

    const Eigen::MatrixXd& correlation(int weekday) const;
    int dimension() const { return static_cast<int>(correlations.front().rows()); }
};

/// Gaussian-copula correlation of PIT values (rows = days, columns = hours).
/// Columns are rank-uniformized with average ranks, mapped through the normal
/// quantile function and correlated. Indefinite estimates are repaired by
/// eigenvalue clipping. `weekdays` (0..6 per row) is required for Weekday.
CopulaModel fit_copula(const Eigen::MatrixXd& pit, CopulaKind kind, const std::vector<int>& weekdays = {});

/// Projects a symmetric matrix with unit diagonal onto a valid correlation
/// matrix when its smallest eigenvalue is negative.
Eigen::MatrixXd repair_correlation(const Eigen::MatrixXd& corr);

enum class MarginalFamily { Empirical, Normal, StudentT };

/// Per-hour predictive marginal given by its quantile function.
class MarginalModel {
public:
    static MarginalModel empirical(std::vector<std::vector<double>> pools);
    static MarginalModel normal(std::vector<double> location, std::vector<double> scale);
    static MarginalModel student_t(std::vector<double> location, std::vector<double> scale, double dof);

    int hours() const { return hours_; }
    double quantile(int hour, double level) const;

private:
    MarginalFamily family_ = MarginalFamily::Empirical;
    int hours_ = 0;
    std::vector<std::vector<double>> pools_;  // sorted
    std::vector<double> location_, scale_;
    double dof_ = 0.0;
};

/// Samples `count` Gaussian-copula vectors and, per hour, assigns the
/// marginal quantiles at levels (i - 0.5) / count in the order of the
/// copula sample's ranks.
ScenarioEnsemble sample_with_reordering(const MarginalModel& marginals, const CopulaModel& copula, int count,
                                        std::uint64_t seed, int weekday = 0, const std::string& date = "");

/// Whole historical days resampled uniformly with replacement.
ScenarioEnsemble climatology_forecast(const std::vector<PriceDay>& history, int count, std::uint64_t seed,
                                      const std::string& date = "");

/// Same-weekday residual day-pairs p_d - p_{d-7} from `history` strictly
/// before `target_date`. Rows are residual days, columns are hours.
struct ResidualPool {
    std::vector<std::string> dates;
    Eigen::MatrixXd residuals;
};

ResidualPool weekly_residuals(const std::vector<PriceDay>& history, const std::string& target_date,
                              bool same_weekday_only);

/// Last week's same-weekday path plus whole-day residual trajectories drawn
/// from the same-weekday residual pool.
ScenarioEnsemble naive_bootstrap_forecast(const std::vector<PriceDay>& history, const std::string& target_date,
                                          int count, std::uint64_t seed);

/// Benchmark copula forecaster: lag-7 base plus same-weekday empirical
/// residual marginals, joined by a copula fitted to in-sample residuals.
ScenarioEnsemble copula_forecast(const std::vector<PriceDay>& history, const std::string& target_date,
                                 CopulaKind kind, int count, std::uint64_t seed);

}  // namespace bessval
