#include "bessval/evaluate.hpp"

#include "bessval/parallel.hpp"
#include "bessval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bessval {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

const BacktestRecord& BacktestResult::at(const std::string& model, const std::string& date) const {
    for (const auto& r : records) {
        if (r.model == model && r.date == date) return r;
    }
    throw InputError("backtest has no record for model " + model + " on " + date);
}

std::vector<const BacktestRecord*> BacktestResult::model_records(const std::string& model) const {
    std::vector<const BacktestRecord*> out;
    for (const auto& r : records) {
        if (r.model == model) out.push_back(&r);
    }
    return out;
}

BacktestResult run_backtest(const std::vector<ModelForecasts>& forecasts, const std::vector<PriceDay>& prices,
                            const BacktestSettings& settings) {
    settings.battery.validate();
    settings.risk.validate();
    if (forecasts.empty()) throw InputError("backtest needs at least one model");
    if (prices.empty()) throw InputError("backtest needs at least one price day");
    BacktestResult out;
    out.settings = settings;
    for (const auto& day : prices) out.dates.push_back(day.date());
    for (const auto& f : forecasts) {
        if (std::find(out.models.begin(), out.models.end(), f.model) != out.models.end()) {
            throw InputError("model " + f.model + " listed twice");
        }
        out.models.push_back(f.model);
        std::string missing;
        int missing_count = 0;
        for (const auto& day : prices) {
            if (!f.days.count(day.date())) {
                if (missing_count < 10) missing += (missing.empty() ? "" : ", ") + day.date();
                ++missing_count;
            }
        }
        if (missing_count > 0) {
            if (missing_count > 10) missing += ", ... (" + std::to_string(missing_count) + " in total)";
            throw InputError("model " + f.model + " has no forecast for: " + missing);
        }
    }

    const long n_models = static_cast<long>(forecasts.size());
    const long n = static_cast<long>(prices.size()) * n_models;
    out.records.resize(static_cast<std::size_t>(n));
    parallel_for(n, settings.jobs, [&](long idx) {
        const PriceDay& day = prices[static_cast<std::size_t>(idx / n_models)];
        const ModelForecasts& model = forecasts[static_cast<std::size_t>(idx % n_models)];
        const ScenarioEnsemble& ensemble = model.days.at(day.date());
        if (ensemble.hours() != day.hours()) {
            throw InputError("model " + model.model + " forecast for " + day.date() + " has " +
                             std::to_string(ensemble.hours()) + " hours, prices have " + std::to_string(day.hours()));
        }
        DayDecision decision = optimize_day(ensemble, settings.battery, settings.risk, settings.optimizer, settings.milp);
        BacktestRecord& rec = out.records[static_cast<std::size_t>(idx)];
        rec.date = day.date();
        rec.model = model.model;
        rec.predicted_objective = decision.predicted_objective;
        rec.realized_return = realized_return(decision.schedule, day, settings.battery.efficiency);
        rec.predicted_returns = predicted_objective_distribution(ensemble, decision.schedule, settings.battery.efficiency);
        rec.schedule = std::move(decision.schedule);
    });
    return out;
}

std::vector<EconomicMeasures> economic_measures(const BacktestResult& result, double alpha_for_var) {
    const RiskSpec var_spec = RiskSpec::cvar(alpha_for_var);
    std::vector<EconomicMeasures> out;
    for (const auto& model : result.models) {
        EconomicMeasures m;
        m.model = model;
        std::vector<double> returns;
        int exceed = 0;
        for (const BacktestRecord* r : result.model_records(model)) {
            returns.push_back(r->realized_return);
            m.total_profit += r->realized_return;
            if (r->schedule.is_zero()) ++m.no_bid_days;
            const double var = risk_measure(r->predicted_returns, var_spec).var;
            if (r->realized_return < var) ++exceed;
        }
        m.days = static_cast<int>(returns.size());
        m.var_exceedance = m.days ? static_cast<double>(exceed) / m.days : 0.0;
        if (m.days >= 2) {
            const double sd = sample_sd(returns);
            const double scale = std::max(1.0, std::abs(mean(returns)));
            if (sd > 1e-12 * scale) {
                m.sharpe = mean(returns) / sd;
                m.sharpe_defined = true;
            }
        }
        if (!m.sharpe_defined) m.sharpe = kNaN;
        out.push_back(m);
    }
    return out;
}

CrossScoreMatrix cross_score(const BacktestResult& result, const std::vector<ModelForecasts>& forecasts,
                             int hac_lags, int jobs) {
    const std::size_t k = result.models.size();
    if (forecasts.size() != k) throw InputError("cross-scoring needs the forecasts of every backtested model");
    for (std::size_t i = 0; i < k; ++i) {
        if (forecasts[i].model != result.models[i]) {
            throw InputError("forecast model " + forecasts[i].model + " does not match backtest model " +
                             result.models[i]);
        }
    }
    const RiskSpec& risk = result.settings.risk;
    const bool tail = risk.kind == RiskKind::CVaR;
    const double eta = result.settings.battery.efficiency;
    const std::size_t days = result.dates.size();

    // Records are date-major with models in order.
    auto record = [&](std::size_t m, std::size_t d) -> const BacktestRecord& {
        return result.records[d * k + m];
    };

    CrossScoreMatrix out;
    out.models = result.models;
    out.score = tail ? "FZ" : "SE";
    out.mean_scores = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    out.daily.assign(k, std::vector<std::vector<double>>(k, std::vector<double>(days)));
    parallel_for(static_cast<long>(k * k), jobs, [&](long cell) {
        const std::size_t i = static_cast<std::size_t>(cell) / k;
        const std::size_t m = static_cast<std::size_t>(cell) % k;
        auto& series = out.daily[i][m];
        for (std::size_t d = 0; d < days; ++d) {
            const BacktestRecord& bid = record(m, d);
            const ScenarioEnsemble& f = forecasts[i].days.at(bid.date);
            const std::vector<double> dist = predicted_objective_distribution(f, bid.schedule, eta);
            const double y = bid.realized_return;
            if (tail) {
                const RiskValue rv = risk_measure(dist, risk);
                series[d] = pinball_and_joint_var_cvar(rv.var, rv.value, y, risk.tail_probability()).joint;
            } else {
                const double err = mean(dist) - y;
                series[d] = err * err;
            }
        }
        out.mean_scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = mean(series);
    });

    out.dm_stat = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), kNaN);
    out.dm_p = out.dm_stat;
    out.degenerate.assign(k, std::vector<bool>(k, false));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t m = 0; m < k; ++m) {
            if (i == m || days < 2) continue;
            const DmResult dm = dm_test(out.daily[i][m], out.daily[m][m], DmAlternative::FirstBetter, hac_lags);
            out.degenerate[i][m] = dm.degenerate;
            if (!dm.degenerate) {
                out.dm_stat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = dm.statistic;
                out.dm_p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = dm.p_value;
            }
        }
    }
    return out;
}

std::vector<double> same_rank_forecast(const std::vector<double>& reference, double amplitude) {
    const int n = static_cast<int>(reference.size());
    if (n < 2) throw InputError("same-rank forecast needs at least 2 hours");
    if (!(amplitude >= 0.0 && amplitude <= 1.0)) throw InputError("distortion amplitude must lie in [0, 1]");
    const auto lo_it = std::min_element(reference.begin(), reference.end());
    const auto hi_it = std::max_element(reference.begin(), reference.end());
    const int b = static_cast<int>(lo_it - reference.begin());
    const int s = static_cast<int>(hi_it - reference.begin());
    if (*lo_it == *hi_it) throw InputError("same-rank forecast needs a non-constant reference");
    if (b > s) throw InputError("same-rank forecast needs the cheapest hour before the dearest hour");

    std::vector<int> interior;
    for (int h = 0; h < n; ++h) {
        if (h != b && h != s) interior.push_back(h);
    }
    std::stable_sort(interior.begin(), interior.end(), [&](int x, int y) {
        return reference[static_cast<std::size_t>(x)] < reference[static_cast<std::size_t>(y)];
    });
    std::vector<double> out = reference;
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double slots = static_cast<double>(interior.size()) + 1.0;
    for (std::size_t r = 0; r < interior.size(); ++r) {
        const auto h = static_cast<std::size_t>(interior[r]);
        const double target = lo + (hi - lo) * (static_cast<double>(r) + 1.0) / slots;
        out[h] = reference[h] + amplitude * (target - reference[h]);
    }
    return out;
}

ScenarioEnsemble same_rank_forecast(const ScenarioEnsemble& reference, double amplitude) {
    const Eigen::VectorXd avg = reference.mean_path();
    const std::vector<double> path(avg.data(), avg.data() + avg.size());
    const std::vector<double> distorted = same_rank_forecast(path, amplitude);
    Eigen::MatrixXd paths = reference.paths();
    for (int h = 0; h < reference.hours(); ++h) {
        const double shift = distorted[static_cast<std::size_t>(h)] - path[static_cast<std::size_t>(h)];
        if (shift != 0.0) paths.col(h).array() += shift;
    }
    return ScenarioEnsemble(reference.date(), std::move(paths));
}

namespace {

void check_twin(const TwinSetup& t) {
    if (!(t.sigma_b > 0.0 && t.sigma_s > 0.0)) throw InputError("twin setup needs positive standard deviations");
    if (!(t.rho >= -1.0 && t.rho <= 1.0)) throw InputError("twin setup correlation must lie in [-1, 1]");
    if (!(t.efficiency > 0.0 && t.efficiency <= 1.0)) throw InputError("efficiency must lie in (0, 1]");
    if (!(t.capacity > 0.0)) throw InputError("capacity must be positive");
}

double revenue_variance(double sb, double ss, double rho, double eta, double kappa) {
    return kappa * kappa * (sb * sb / (eta * eta) + eta * eta * ss * ss - 2.0 * rho * sb * ss);
}

}  // namespace

double revenue_variance_difference(const TwinSetup& truth, double sigma_b_hat, double sigma_s_hat, double rho_hat) {
    return revenue_variance(sigma_b_hat, sigma_s_hat, rho_hat, truth.efficiency, truth.capacity) -
           revenue_variance(truth.sigma_b, truth.sigma_s, truth.rho, truth.efficiency, truth.capacity);
}

double covariance_twin(const TwinSetup& truth, double sigma_s_hat, double rho_hat) {
    check_twin(truth);
    if (!(sigma_s_hat > 0.0)) throw InputError("forecast sell-hour SD must be positive");
    if (!(rho_hat >= -1.0 && rho_hat <= 1.0)) throw InputError("forecast correlation must lie in [-1, 1]");
    const double eta2 = truth.efficiency * truth.efficiency;
    // x^2 / eta^2 - 2 rho_hat sigma_s_hat x - c = 0
    const double c = truth.sigma_b * truth.sigma_b / eta2 +
                     eta2 * (truth.sigma_s * truth.sigma_s - sigma_s_hat * sigma_s_hat) -
                     2.0 * truth.rho * truth.sigma_b * truth.sigma_s;
    const double half_b = rho_hat * sigma_s_hat;
    const double disc = half_b * half_b + c / eta2;
    if (disc < 0.0) throw InputError("no forecast SD matches the revenue variance for these parameters");
    const double root = std::sqrt(disc);
    double best = kNaN;
    for (double x : {eta2 * (half_b + root), eta2 * (half_b - root)}) {
        if (!(x > 0.0)) continue;
        if (std::isnan(best) || std::abs(x - truth.sigma_b) < std::abs(best - truth.sigma_b)) best = x;
    }
    if (std::isnan(best)) throw InputError("no positive forecast SD matches the revenue variance for these parameters");
    return best;
}

}  // namespace bessval
