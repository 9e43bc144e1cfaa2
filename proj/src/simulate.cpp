#include "bessval/simulate.hpp"

#include "bessval/io.hpp"
#include "bessval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace bessval {

namespace {

/// Symmetric square root of a positive semidefinite matrix via its
/// eigen-decomposition; tiny negative eigenvalues from round-off are zeroed.
Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& cov, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
        throw InputError(std::string(what) + " is not positive semidefinite");
    }
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

Eigen::MatrixXd gaussian_scores(const Eigen::MatrixXd& pit) {
    const auto n = static_cast<std::size_t>(pit.rows());
    Eigen::MatrixXd z(pit.rows(), pit.cols());
    std::vector<double> col(n);
    for (Eigen::Index h = 0; h < pit.cols(); ++h) {
        for (std::size_t i = 0; i < n; ++i) col[i] = pit(static_cast<Eigen::Index>(i), h);
        const auto ranks = average_ranks(col);
        for (std::size_t i = 0; i < n; ++i) {
            z(static_cast<Eigen::Index>(i), h) = normal_quantile((ranks[i] - 0.5) / static_cast<double>(n));
        }
    }
    return z;
}

Eigen::MatrixXd correlation_of(const Eigen::MatrixXd& pit) {
    if (pit.rows() < 2) throw InputError("copula estimation needs at least 2 rows");
    for (Eigen::Index h = 0; h < pit.cols(); ++h) {
        if (pit.col(h).maxCoeff() == pit.col(h).minCoeff()) {
            throw InputError("copula estimation: column for hour " + std::to_string(h) +
                             " is constant, correlation undefined");
        }
    }
    const Eigen::MatrixXd z = gaussian_scores(pit);
    const Eigen::MatrixXd centered = z.rowwise() - z.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered;
    const Eigen::VectorXd inv_sd = cov.diagonal().cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd corr = inv_sd.asDiagonal() * cov * inv_sd.asDiagonal();
    corr = 0.5 * (corr + corr.transpose());
    corr.diagonal().setOnes();
    return repair_correlation(corr);
}

const PriceDay* find_day(const std::map<std::string, const PriceDay*>& index, const std::string& date) {
    const auto it = index.find(date);
    return it == index.end() ? nullptr : it->second;
}

}  // namespace

ScenarioEnsemble sample_gaussian_prices(const GaussianPriceSpec& spec, int count, std::uint64_t seed,
                                        const std::string& date) {
    if (count < 1) throw InputError("ensemble size must be at least 1");
    spec.validate();
    const Eigen::MatrixXd factor = psd_factor(spec.effective_covariance(), "Gaussian covariance");
    const auto k = spec.mu.size();
    Rng rng(seed);
    Eigen::MatrixXd paths(count, k);
    Eigen::VectorXd z(k);
    for (int m = 0; m < count; ++m) {
        for (Eigen::Index h = 0; h < k; ++h) z(h) = rng.normal();
        paths.row(m) = (spec.mu + factor * z).transpose();
    }
    return ScenarioEnsemble(date, std::move(paths));
}

CopulaKind parse_copula_kind(const std::string& text) {
    if (text == "independent" || text == "ind") return CopulaKind::Independent;
    if (text == "empirical" || text == "dep") return CopulaKind::Empirical;
    if (text == "weekday" || text == "dwd") return CopulaKind::Weekday;
    throw InputError("unknown copula kind '" + text + "' (use independent, empirical or weekday)");
}

const char* to_string(CopulaKind kind) {
    switch (kind) {
        case CopulaKind::Independent: return "independent";
        case CopulaKind::Empirical: return "empirical";
        case CopulaKind::Weekday: return "weekday";
    }
    return "unknown";
}

const Eigen::MatrixXd& CopulaModel::correlation(int weekday) const {
    if (kind != CopulaKind::Weekday) return correlations.front();
    if (weekday < 0 || weekday > 6) throw InputError("weekday must lie in 0..6");
    return correlations[static_cast<std::size_t>(weekday)];
}

Eigen::MatrixXd repair_correlation(const Eigen::MatrixXd& corr) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
    if (eig.eigenvalues().minCoeff() >= -1e-12) return corr;
    const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(1e-8);
    Eigen::MatrixXd fixed = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::VectorXd inv_sd = fixed.diagonal().cwiseSqrt().cwiseInverse();
    fixed = inv_sd.asDiagonal() * fixed * inv_sd.asDiagonal();
    fixed = 0.5 * (fixed + fixed.transpose());
    fixed.diagonal().setOnes();
    return fixed;
}

CopulaModel fit_copula(const Eigen::MatrixXd& pit, CopulaKind kind, const std::vector<int>& weekdays) {
    if (pit.cols() < 1) throw InputError("copula estimation needs at least one column");
    CopulaModel model;
    model.kind = kind;
    if (kind == CopulaKind::Independent) {
        model.correlations.push_back(Eigen::MatrixXd::Identity(pit.cols(), pit.cols()));
        return model;
    }
    if (pit.rows() < 2) throw InputError("copula estimation needs at least 2 rows");
    if (!(pit.array() > 0.0).all() || !(pit.array() < 1.0).all()) {
        throw InputError("PIT values must lie strictly inside (0, 1)");
    }
    if (kind == CopulaKind::Empirical) {
        model.correlations.push_back(correlation_of(pit));
        return model;
    }
    if (static_cast<Eigen::Index>(weekdays.size()) != pit.rows()) {
        throw InputError("weekday copula needs one weekday tag per row");
    }
    for (int wd = 0; wd < 7; ++wd) {
        std::vector<Eigen::Index> rows;
        for (std::size_t i = 0; i < weekdays.size(); ++i) {
            if (weekdays[i] == wd) rows.push_back(static_cast<Eigen::Index>(i));
        }
        if (rows.size() < 2) {
            throw InputError("weekday copula: weekday " + std::to_string(wd) + " has fewer than 2 rows");
        }
        Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), pit.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = pit.row(rows[i]);
        try {
            model.correlations.push_back(correlation_of(sub));
        } catch (const InputError& e) {
            throw InputError("weekday " + std::to_string(wd) + ": " + e.what());
        }
    }
    return model;
}

MarginalModel MarginalModel::empirical(std::vector<std::vector<double>> pools) {
    MarginalModel m;
    m.family_ = MarginalFamily::Empirical;
    m.hours_ = static_cast<int>(pools.size());
    for (auto& p : pools) {
        if (p.empty()) throw InputError("empirical marginal has an empty pool");
        std::sort(p.begin(), p.end());
    }
    m.pools_ = std::move(pools);
    return m;
}

MarginalModel MarginalModel::normal(std::vector<double> location, std::vector<double> scale) {
    if (location.size() != scale.size()) throw InputError("marginal location/scale length mismatch");
    for (double s : scale) {
        if (!(s >= 0.0)) throw InputError("marginal scale must be non-negative");
    }
    MarginalModel m;
    m.family_ = MarginalFamily::Normal;
    m.hours_ = static_cast<int>(location.size());
    m.location_ = std::move(location);
    m.scale_ = std::move(scale);
    return m;
}

MarginalModel MarginalModel::student_t(std::vector<double> location, std::vector<double> scale, double dof) {
    MarginalModel m = normal(std::move(location), std::move(scale));
    if (!(dof > 0.0)) throw InputError("Student-t degrees of freedom must be positive");
    m.family_ = MarginalFamily::StudentT;
    m.dof_ = dof;
    return m;
}

double MarginalModel::quantile(int hour, double level) const {
    if (hour < 0 || hour >= hours_) throw InputError("marginal hour out of range");
    const auto h = static_cast<std::size_t>(hour);
    switch (family_) {
        case MarginalFamily::Empirical: return midpoint_quantile(pools_[h], level);
        case MarginalFamily::Normal: return location_[h] + scale_[h] * normal_quantile(level);
        case MarginalFamily::StudentT: return location_[h] + scale_[h] * student_t_quantile(dof_, level);
    }
    return 0.0;
}

ScenarioEnsemble sample_with_reordering(const MarginalModel& marginals, const CopulaModel& copula, int count,
                                        std::uint64_t seed, int weekday, const std::string& date) {
    if (count < 2) throw InputError("rank-reordered sampling needs at least 2 members");
    const int hours = marginals.hours();
    if (copula.dimension() != hours) throw InputError("copula dimension does not match the marginals");
    const Eigen::MatrixXd factor = psd_factor(copula.correlation(weekday), "copula correlation");

    Rng rng(seed);
    Eigen::MatrixXd gauss(count, hours);
    Eigen::VectorXd z(hours);
    for (int m = 0; m < count; ++m) {
        for (int h = 0; h < hours; ++h) z(h) = rng.normal();
        gauss.row(m) = (factor * z).transpose();
    }
    Eigen::MatrixXd paths(count, hours);
    std::vector<double> col(static_cast<std::size_t>(count));
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int h = 0; h < hours; ++h) {
        for (int i = 0; i < count; ++i) {
            grid[static_cast<std::size_t>(i)] = marginals.quantile(h, (i + 0.5) / count);
            col[static_cast<std::size_t>(i)] = gauss(i, h);
        }
        const auto ranks = ordinal_ranks(col);
        for (int m = 0; m < count; ++m) {
            paths(m, h) = grid[static_cast<std::size_t>(ranks[static_cast<std::size_t>(m)] - 1)];
        }
    }
    return ScenarioEnsemble(date, std::move(paths));
}

ScenarioEnsemble climatology_forecast(const std::vector<PriceDay>& history, int count, std::uint64_t seed,
                                      const std::string& date) {
    if (history.empty()) throw InputError("climatology forecast needs a non-empty history");
    if (count < 1) throw InputError("ensemble size must be at least 1");
    const int hours = history.front().hours();
    Rng rng(seed);
    Eigen::MatrixXd paths(count, hours);
    for (int m = 0; m < count; ++m) {
        const PriceDay& d = history[rng.index(history.size())];
        if (d.hours() != hours) throw InputError("history days have differing hour counts");
        for (int h = 0; h < hours; ++h) paths(m, h) = d[h];
    }
    return ScenarioEnsemble(date, std::move(paths));
}

ResidualPool weekly_residuals(const std::vector<PriceDay>& history, const std::string& target_date,
                              bool same_weekday_only) {
    std::map<std::string, const PriceDay*> index;
    for (const auto& d : history) index[d.date()] = &d;
    const int target_wd = weekday_of(target_date);
    ResidualPool pool;
    std::vector<std::vector<double>> rows;
    for (const auto& [date, day] : index) {
        if (date >= target_date) break;
        if (same_weekday_only && weekday_of(date) != target_wd) continue;
        const PriceDay* lag = find_day(index, shift_date(date, -7));
        if (!lag) continue;
        if (lag->hours() != day->hours()) throw InputError("history days have differing hour counts");
        std::vector<double> r(static_cast<std::size_t>(day->hours()));
        for (int h = 0; h < day->hours(); ++h) r[static_cast<std::size_t>(h)] = (*day)[h] - (*lag)[h];
        pool.dates.push_back(date);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) {
        throw InputError("no residual days with a one-week lag before " + target_date);
    }
    pool.residuals.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t h = 0; h < rows[i].size(); ++h) {
            pool.residuals(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h)) = rows[i][h];
        }
    }
    return pool;
}

namespace {

const PriceDay& lag_day(const std::vector<PriceDay>& history, const std::string& target_date) {
    const std::string lag = shift_date(target_date, -7);
    for (const auto& d : history) {
        if (d.date() == lag) return d;
    }
    throw InputError("history lacks the one-week-lag day " + lag + " for " + target_date);
}

}  // namespace

ScenarioEnsemble naive_bootstrap_forecast(const std::vector<PriceDay>& history, const std::string& target_date,
                                          int count, std::uint64_t seed) {
    if (count < 1) throw InputError("ensemble size must be at least 1");
    const PriceDay& base = lag_day(history, target_date);
    const ResidualPool pool = weekly_residuals(history, target_date, true);
    const int hours = base.hours();
    Rng rng(seed);
    Eigen::MatrixXd paths(count, hours);
    for (int m = 0; m < count; ++m) {
        const auto r = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(pool.residuals.rows())));
        for (int h = 0; h < hours; ++h) paths(m, h) = base[h] + pool.residuals(r, h);
    }
    return ScenarioEnsemble(target_date, std::move(paths));
}

ScenarioEnsemble copula_forecast(const std::vector<PriceDay>& history, const std::string& target_date,
                                 CopulaKind kind, int count, std::uint64_t seed) {
    const PriceDay& base = lag_day(history, target_date);
    const ResidualPool same = weekly_residuals(history, target_date, true);
    const int hours = base.hours();
    std::vector<std::vector<double>> pools(static_cast<std::size_t>(hours));
    for (int h = 0; h < hours; ++h) {
        for (Eigen::Index i = 0; i < same.residuals.rows(); ++i) {
            pools[static_cast<std::size_t>(h)].push_back(base[h] + same.residuals(i, h));
        }
    }
    const MarginalModel marginals = MarginalModel::empirical(std::move(pools));

    CopulaModel copula;
    if (kind == CopulaKind::Independent) {
        copula.correlations.push_back(Eigen::MatrixXd::Identity(hours, hours));
    } else {
        const ResidualPool all = weekly_residuals(history, target_date, false);
        Eigen::MatrixXd pit(all.residuals.rows(), hours);
        std::vector<double> col(static_cast<std::size_t>(all.residuals.rows()));
        const double n = static_cast<double>(all.residuals.rows());
        for (int h = 0; h < hours; ++h) {
            for (Eigen::Index i = 0; i < all.residuals.rows(); ++i) col[static_cast<std::size_t>(i)] = all.residuals(i, h);
            const auto ranks = average_ranks(col);
            for (Eigen::Index i = 0; i < all.residuals.rows(); ++i) pit(i, h) = (ranks[static_cast<std::size_t>(i)] - 0.5) / n;
        }
        std::vector<int> weekdays;
        for (const auto& d : all.dates) weekdays.push_back(weekday_of(d));
        copula = fit_copula(pit, kind, weekdays);
    }
    return sample_with_reordering(marginals, copula, count, seed, weekday_of(target_date), target_date);
}

}  // namespace bessval
