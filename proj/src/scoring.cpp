#include "bessval/scoring.hpp"

#include "bessval/ranks.hpp"
#include "bessval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bessval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_shapes(const ScenarioEnsemble& forecast, const PriceDay& day) {
    if (forecast.hours() != day.hours()) {
        throw InputError("ensemble for " + forecast.date() + " has " + std::to_string(forecast.hours()) +
                         " hours but the price day has " + std::to_string(day.hours()));
    }
}

std::vector<double> column(const ScenarioEnsemble& f, int h) {
    const auto col = f.paths().col(h);
    return std::vector<double>(col.data(), col.data() + col.size());
}

}  // namespace

PointScores point_scores(const ScenarioEnsemble& forecast, const PriceDay& day) {
    check_shapes(forecast, day);
    const Eigen::VectorXd avg = forecast.mean_path();
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (int h = 0; h < day.hours(); ++h) {
        abs_sum += std::abs(median(column(forecast, h)) - day[h]);
        sq_sum += (avg(h) - day[h]) * (avg(h) - day[h]);
    }
    return {abs_sum / day.hours(), std::sqrt(sq_sum / day.hours())};
}

double crps(std::span<const double> members, double observed) {
    const std::size_t m = members.size();
    if (m < 1) throw InputError("CRPS needs at least 1 ensemble member");
    std::vector<double> s(members.begin(), members.end());
    std::sort(s.begin(), s.end());
    double abs_obs = 0.0;
    double spread = 0.0;  // sum over ordered pairs |x_i - x_j| = 2 sum_i (2i - m - 1) x_(i)
    for (std::size_t i = 0; i < m; ++i) {
        abs_obs += std::abs(observed - s[i]);
        spread += (2.0 * static_cast<double>(i + 1) - static_cast<double>(m) - 1.0) * s[i];
    }
    const double md = static_cast<double>(m);
    return abs_obs / md - 2.0 * spread / (2.0 * md * md);
}

double crps(const ScenarioEnsemble& forecast, const PriceDay& day) {
    check_shapes(forecast, day);
    double total = 0.0;
    for (int h = 0; h < day.hours(); ++h) total += crps(column(forecast, h), day[h]);
    return total / day.hours();
}

double energy_score(const ScenarioEnsemble& forecast, const PriceDay& day) {
    check_shapes(forecast, day);
    const int m = forecast.members();
    if (m < 1) throw InputError("energy score needs at least 1 ensemble member");
    const Eigen::MatrixXd& f = forecast.paths();
    Eigen::RowVectorXd y(day.hours());
    for (int h = 0; h < day.hours(); ++h) y(h) = day[h];
    double to_obs = 0.0;
    for (int i = 0; i < m; ++i) to_obs += (f.row(i) - y).norm();
    double between = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) between += (f.row(i) - f.row(j)).norm();
    }
    const double md = m;
    return to_obs / md - 2.0 * between / (2.0 * md * md);
}

double variogram_score(const ScenarioEnsemble& forecast, const PriceDay& day, double p) {
    check_shapes(forecast, day);
    if (!(p > 0.0)) throw InputError("variogram order p must be positive");
    const int k = day.hours();
    if (k < 2) return 0.0;
    const Eigen::MatrixXd& f = forecast.paths();
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            const double obs = std::pow(std::abs(day[i] - day[j]), p);
            const double pred = (f.col(i) - f.col(j)).array().abs().pow(p).mean();
            total += 2.0 * (obs - pred) * (obs - pred);
        }
    }
    return total / std::pow(static_cast<double>(k - 1), 1.0 / p);
}

double dawid_sebastiani(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, const Eigen::VectorXd& y) {
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw InputError("Dawid-Sebastiani score: covariance is singular");
    const Eigen::VectorXd r = y - mean;
    const Eigen::VectorXd w = llt.matrixL().solve(r);
    const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return w.squaredNorm() + logdet;
}

DssResult dawid_sebastiani(const ScenarioEnsemble& forecast, const PriceDay& day) {
    check_shapes(forecast, day);
    const int m = forecast.members();
    const int k = day.hours();
    if (m < 2) throw InputError("Dawid-Sebastiani score needs at least 2 ensemble members");
    const Eigen::VectorXd mu = forecast.mean_path();
    const Eigen::MatrixXd centered = forecast.paths().rowwise() - mu.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / (m - 1.0);
    DssResult out;
    if (m <= k) {
        const double ridge = 1e-8 * std::max(cov.trace(), 1e-300) / k;
        cov.diagonal().array() += ridge;
        out.regularized = true;
    }
    Eigen::VectorXd y(k);
    for (int h = 0; h < k; ++h) y(h) = day[h];
    out.value = dawid_sebastiani(mu, cov, y);
    return out;
}

MpdMhd mpd_mhd(std::span<const double> forecast_path, const PriceDay& day) {
    if (static_cast<int>(forecast_path.size()) != day.hours()) throw InputError("point path and price day differ in hours");
    auto extremes = [](auto&& get, int n) {
        int lo = 0;
        int hi = 0;
        for (int h = 1; h < n; ++h) {
            if (get(h) < get(lo)) lo = h;
            if (get(h) > get(hi)) hi = h;
        }
        return std::make_pair(lo, hi);
    };
    const int n = day.hours();
    const auto [flo, fhi] = extremes([&](int h) { return forecast_path[static_cast<std::size_t>(h)]; }, n);
    const auto [olo, ohi] = extremes([&](int h) { return day[h]; }, n);
    MpdMhd out;
    out.mhd = std::abs(fhi - ohi) + std::abs(flo - olo);
    out.mpd = std::abs(forecast_path[static_cast<std::size_t>(fhi)] - day[ohi]) -
              std::abs(forecast_path[static_cast<std::size_t>(flo)] - day[olo]);
    return out;
}

JointScore pinball_and_joint_var_cvar(double v, double e, double y, double tail) {
    if (!std::isfinite(v) || !std::isfinite(e) || !std::isfinite(y)) {
        throw InputError("joint VaR/CVaR score needs finite inputs");
    }
    if (!(tail > 0.0 && tail < 1.0)) throw InputError("joint VaR/CVaR score level must lie in (0, 1)");
    if (e > v + 1e-9 * (1.0 + std::abs(v))) throw InputError("joint VaR/CVaR score needs CVaR <= VaR");
    const double hit = y <= v ? 1.0 : 0.0;
    // Logistic G2 and its antiderivative log(1 + exp(e)), evaluated stably.
    const double g2 = e >= 0.0 ? 1.0 / (1.0 + std::exp(-e)) : std::exp(e) / (1.0 + std::exp(e));
    const double big_g2 = e > 0.0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
    JointScore out;
    out.pinball = (hit - tail) * (v - y);
    out.joint = out.pinball + g2 * hit * (v - y) / tail + g2 * (e - v) - big_g2;
    return out;
}

QuantileForecast ensemble_quantiles(const ScenarioEnsemble& forecast, const std::vector<double>& levels) {
    Eigen::MatrixXd values(static_cast<Eigen::Index>(levels.size()), forecast.hours());
    for (int h = 0; h < forecast.hours(); ++h) {
        std::vector<double> col = column(forecast, h);
        std::sort(col.begin(), col.end());
        for (std::size_t l = 0; l < levels.size(); ++l) {
            values(static_cast<Eigen::Index>(l), h) = midpoint_quantile(col, levels[l]);
        }
    }
    return QuantileForecast(levels, std::move(values));
}

std::vector<CalibrationRow> marginal_calibration(const std::vector<QuantileForecast>& forecasts,
                                                 const std::vector<PriceDay>& days,
                                                 const std::vector<double>& levels) {
    if (forecasts.size() != days.size()) throw InputError("calibration needs one forecast per day");
    std::vector<CalibrationRow> rows;
    for (double level : levels) {
        CalibrationRow row;
        row.level = level;
        long below = 0;
        for (std::size_t d = 0; d < days.size(); ++d) {
            if (forecasts[d].hours() != days[d].hours()) throw InputError("calibration: hour mismatch on " + days[d].date());
            for (int h = 0; h < days[d].hours(); ++h) {
                below += days[d][h] < forecasts[d].quantile(h, level);
                ++row.count;
            }
        }
        row.observed_frequency = row.count ? static_cast<double>(below) / row.count : 0.0;
        row.mc = level - row.observed_frequency;
        rows.push_back(row);
    }
    return rows;
}

DmResult dm_test(std::span<const double> a, std::span<const double> b, DmAlternative alternative, int hac_lags) {
    if (a.size() != b.size()) throw InputError("Diebold-Mariano test needs series of equal length");
    if (a.size() < 2) throw InputError("Diebold-Mariano test needs at least 2 observations");
    if (hac_lags < 0) throw InputError("HAC lag count must be non-negative");
    const std::size_t n = a.size();
    std::vector<double> d(n);
    double scale = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
        if (!std::isfinite(a[t]) || !std::isfinite(b[t])) throw InputError("Diebold-Mariano test needs finite scores");
        d[t] = a[t] - b[t];
        scale = std::max(scale, std::abs(d[t]));
    }
    const double dbar = mean(d);
    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t t = lag; t < n; ++t) s += (d[t] - dbar) * (d[t - lag] - dbar);
        return s / static_cast<double>(n);
    };
    double lrv = autocov(0);
    for (int l = 1; l <= hac_lags && static_cast<std::size_t>(l) < n; ++l) {
        lrv += 2.0 * (1.0 - l / (hac_lags + 1.0)) * autocov(static_cast<std::size_t>(l));
    }
    DmResult out;
    out.mean_difference = dbar;
    if (!(lrv > 1e-24 * scale * scale)) {
        out.degenerate = true;
        out.p_value = std::numeric_limits<double>::quiet_NaN();
        out.statistic = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.statistic = dbar / std::sqrt(lrv / static_cast<double>(n));
    out.p_value = alternative == DmAlternative::FirstBetter ? normal_cdf(out.statistic) : normal_cdf(-out.statistic);
    return out;
}

DmResult dm_test(const ScoreSeries& a, const ScoreSeries& b, DmAlternative alternative, int hac_lags) {
    return dm_test(a.values, b.values, alternative, hac_lags);
}

std::vector<std::pair<std::string, double>> day_scores(const ScenarioEnsemble& forecast, const PriceDay& day,
                                                       const std::vector<int>& top_k) {
    check_shapes(forecast, day);
    std::vector<std::pair<std::string, double>> out;
    const PointScores ps = point_scores(forecast, day);
    out.emplace_back("MAE", ps.mae);
    out.emplace_back("RMSE", ps.rmse);
    const Eigen::VectorXd avg = forecast.mean_path();
    const MpdMhd mm = mpd_mhd(std::span<const double>(avg.data(), static_cast<std::size_t>(avg.size())), day);
    out.emplace_back("MPD", mm.mpd);
    out.emplace_back("MHD", mm.mhd);
    out.emplace_back("CRPS", crps(forecast, day));
    out.emplace_back("ES", energy_score(forecast, day));
    out.emplace_back("VS0.5", variogram_score(forecast, day, 0.5));
    out.emplace_back("VS1", variogram_score(forecast, day, 1.0));
    // DSS needs a non-singular ensemble covariance; degenerate ensembles get NaN.
    double dss = kNaN;
    double regularized = 0.0;
    if (forecast.members() >= 2) {
        try {
            const DssResult r = dawid_sebastiani(forecast, day);
            dss = r.value;
            regularized = r.regularized ? 1.0 : 0.0;
        } catch (const InputError&) {
        }
    }
    out.emplace_back("DSS", dss);
    out.emplace_back("DSS_regularized", regularized);
    out.emplace_back("KS_kernel", kendall_score(forecast, day, KendallMode::Kernel));
    out.emplace_back("KS_as_written", kendall_score(forecast, day, KendallMode::AsWritten));
    const RankScores rs = rank_scores(make_rank_ensemble(forecast, day), top_k);
    out.emplace_back("Brier", rs.brier);
    out.emplace_back("RPS", rs.rps);
    for (const auto& t : rs.top_k) {
        const std::string k = std::to_string(t.k);
        out.emplace_back("Low-" + k, t.low);
        out.emplace_back("High-" + k, t.high);
        out.emplace_back("Low-High-" + k, t.low_high);
        out.emplace_back("BESS-" + k, t.bess);
    }
    return out;
}

}  // namespace bessval
