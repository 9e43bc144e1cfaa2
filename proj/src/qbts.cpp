#include "bessval/qbts.hpp"

#include "bessval/stats.hpp"

#include <cmath>
#include <limits>

namespace bessval {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw InputError("QBTS alpha must lie in (0, 0.5)");
}

/// P(X <= q) for X ~ N(mu, sd^2), including the point mass sd = 0.
double below(double q, double mu, double sd) {
    if (sd == 0.0) return mu <= q ? 1.0 : 0.0;
    return normal_cdf((q - mu) / sd);
}

/// E[X | X <= q] for X ~ N(mu, sd^2).
double lower_tail_mean(double q, double mu, double sd) {
    if (sd == 0.0) return mu;
    const double z = (q - mu) / sd;
    return mu - sd * normal_pdf(z) / normal_cdf(z);
}

/// E[X | X >= q] for X ~ N(mu, sd^2).
double upper_tail_mean(double q, double mu, double sd) {
    if (sd == 0.0) return mu;
    const double z = (q - mu) / sd;
    return mu + sd * normal_pdf(z) / normal_cdf(-z);
}

struct PairSampler {
    double mu_b, mu_s, l00, l10, l11;

    PairSampler(const GaussianPriceSpec& spec, int b, int s) {
        const Eigen::MatrixXd cov = spec.effective_covariance();
        mu_b = spec.mu(b);
        mu_s = spec.mu(s);
        const double vb = cov(b, b);
        const double vs = cov(s, s);
        const double c = cov(b, s);
        l00 = std::sqrt(std::max(0.0, vb));
        l10 = l00 > 0.0 ? c / l00 : 0.0;
        l11 = std::sqrt(std::max(0.0, vs - l10 * l10));
    }
};

void check_pair(const GaussianPriceSpec& spec, int b, int s) {
    spec.validate();
    const int k = static_cast<int>(spec.mu.size());
    if (b < 0 || s < 0 || b >= k || s >= k || b == s) throw InputError("invalid QBTS hour pair");
}

}  // namespace

QbtsBid qbts_construct(const QuantileForecast& forecast, double alpha, const BatteryConfig& config,
                       bool unordered_pair) {
    check_alpha(alpha);
    config.validate();
    const int hours = forecast.hours();
    if (hours < 2) throw InputError("QBTS needs at least 2 hours");
    const double eta = config.efficiency;
    const std::vector<double> med = forecast.quantile_path(0.5);
    QbtsBid bid;
    if (unordered_pair) {
        int lo = 0;
        int hi = 0;
        for (int h = 1; h < hours; ++h) {
            if (med[static_cast<std::size_t>(h)] < med[static_cast<std::size_t>(lo)]) lo = h;
            if (med[static_cast<std::size_t>(h)] > med[static_cast<std::size_t>(hi)]) hi = h;
        }
        if (lo == hi) hi = lo == 0 ? 1 : 0;
        bid.buy_hour = lo;
        bid.sell_hour = hi;
    } else {
        double best = -std::numeric_limits<double>::infinity();
        for (int b = 0; b < hours; ++b) {
            for (int s = b + 1; s < hours; ++s) {
                const double v = eta * med[static_cast<std::size_t>(s)] - med[static_cast<std::size_t>(b)] / eta;
                if (v > best) {
                    best = v;
                    bid.buy_hour = b;
                    bid.sell_hour = s;
                }
            }
        }
    }
    bid.buy_limit = forecast.quantile(bid.buy_hour, 1.0 - alpha);
    bid.sell_limit = forecast.quantile(bid.sell_hour, alpha);
    bid.buy_volume = config.capacity_mwh / eta;
    bid.sell_volume = config.capacity_mwh * eta;
    bid.alpha = alpha;
    return bid;
}

StrategyOutcome qbts_settle(const QbtsBid& bid, const PriceDay& day) {
    if (bid.buy_hour < 0 || bid.sell_hour < 0 || bid.buy_hour >= day.hours() || bid.sell_hour >= day.hours()) {
        throw InputError("QBTS bid hours outside the price day");
    }
    StrategyOutcome out;
    const double pb = day[bid.buy_hour];
    const double ps = day[bid.sell_hour];
    if (pb <= bid.buy_limit && ps >= bid.sell_limit) {
        out.accepted = true;
        out.cash = -bid.buy_volume * pb + bid.sell_volume * ps;
        out.traded_mwh = bid.buy_volume + bid.sell_volume;
    }
    return out;
}

Ts1Decision ts1_construct(const QuantileForecast& forecast, double alpha, const BatteryConfig& config,
                          bool no_trade_filter) {
    check_alpha(alpha);
    config.validate();
    const int hours = forecast.hours();
    if (hours < 2) throw InputError("TS-1 needs at least 2 hours");
    const double eta = config.efficiency;
    const std::vector<double> upper = forecast.quantile_path(1.0 - alpha);
    const std::vector<double> lower = forecast.quantile_path(alpha);
    Ts1Decision out;
    double best = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < hours; ++b) {
        for (int s = b + 1; s < hours; ++s) {
            const double v = eta * lower[static_cast<std::size_t>(s)] - upper[static_cast<std::size_t>(b)] / eta;
            if (v > best) {
                best = v;
                out.buy_hour = b;
                out.sell_hour = s;
            }
        }
    }
    out.value = best;
    out.schedule = BidSchedule::zero(hours);
    out.trades = !no_trade_filter || best > 0.0;
    if (out.trades) {
        out.schedule.buy[static_cast<std::size_t>(out.buy_hour)] = config.capacity_mwh / eta;
        out.schedule.sell[static_cast<std::size_t>(out.sell_hour)] = config.capacity_mwh * eta;
    }
    return out;
}

double gaussian_quantile(const GaussianPriceSpec& spec, int hour, double level) {
    return spec.mu(hour) + spec.sd(hour) * normal_quantile(level);
}

QuantileForecast gaussian_quantile_forecast(const GaussianPriceSpec& spec, const std::vector<double>& levels) {
    spec.validate();
    Eigen::MatrixXd values(static_cast<Eigen::Index>(levels.size()), spec.mu.size());
    for (std::size_t l = 0; l < levels.size(); ++l) {
        for (Eigen::Index h = 0; h < spec.mu.size(); ++h) {
            values(static_cast<Eigen::Index>(l), h) = gaussian_quantile(spec, static_cast<int>(h), levels[l]);
        }
    }
    return QuantileForecast(levels, std::move(values));
}

AcceptanceEstimate qbts_acceptance_probability(const GaussianPriceSpec& truth, const GaussianPriceSpec& forecast,
                                               int b, int s, double alpha, ProbabilityMethod method,
                                               const McSettings& mc) {
    const QbtsProfit p = qbts_expected_profit(truth, forecast, b, s, alpha, BatteryConfig{1.0, 1.0, 1.0, 1, 1, 1},
                                              method, mc);
    return {p.ap, p.ap_se};
}

QbtsProfit qbts_expected_profit(const GaussianPriceSpec& truth, const GaussianPriceSpec& forecast, int b, int s,
                                double alpha, const BatteryConfig& config, ProbabilityMethod method,
                                const McSettings& mc) {
    check_alpha(alpha);
    check_pair(truth, b, s);
    check_pair(forecast, b, s);
    config.validate();
    const double eta = config.efficiency;
    const double kappa = config.capacity_mwh;
    const double qb = gaussian_quantile(forecast, b, 1.0 - alpha);
    const double qs = gaussian_quantile(forecast, s, alpha);
    QbtsProfit out;

    if (method == ProbabilityMethod::AnalyticIndependent) {
        if (truth.sigma(b, s) != 0.0) {
            throw InputError("the analytic acceptance probability requires uncorrelated buy and sell prices");
        }
        const double sb = truth.sd(b);
        const double ss = truth.sd(s);
        const double pb = below(qb, truth.mu(b), sb);
        const double ps = ss == 0.0 ? (truth.mu(s) >= qs ? 1.0 : 0.0) : normal_cdf((truth.mu(s) - qs) / ss);
        out.ap = pb * ps;
        if (out.ap > 0.0) {
            out.ep = -kappa / eta * lower_tail_mean(qb, truth.mu(b), sb) +
                     eta * kappa * upper_tail_mean(qs, truth.mu(s), ss);
            out.expected_profit = out.ap * out.ep;
        } else {
            out.ep_defined = false;
            out.ep = std::numeric_limits<double>::quiet_NaN();
        }
        return out;
    }

    if (mc.draws < 2) throw InputError("Monte Carlo needs at least 2 draws");
    const PairSampler sampler(truth, b, s);
    Rng rng(mc.seed);
    long accepted = 0;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (long i = 0; i < mc.draws; ++i) {
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        const double pb = sampler.mu_b + sampler.l00 * z1;
        const double ps = sampler.mu_s + sampler.l10 * z1 + sampler.l11 * z2;
        if (pb <= qb && ps >= qs) {
            const double cash = -kappa / eta * pb + eta * kappa * ps;
            ++accepted;
            sum += cash;
            sum_sq += cash * cash;
        }
    }
    const double n = static_cast<double>(mc.draws);
    out.ap = static_cast<double>(accepted) / n;
    out.ap_se = std::sqrt(out.ap * (1.0 - out.ap) / n);
    out.expected_profit = sum / n;
    const double var = std::max(0.0, (sum_sq - n * out.expected_profit * out.expected_profit) / (n - 1.0));
    out.profit_se = std::sqrt(var / n);
    if (accepted > 0) {
        out.ep = sum / static_cast<double>(accepted);
    } else {
        out.ep_defined = false;
        out.ep = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

double empirical_acceptance_probability(const ScenarioEnsemble& forecast, const QbtsBid& bid) {
    if (bid.buy_hour >= forecast.hours() || bid.sell_hour >= forecast.hours()) {
        throw InputError("QBTS bid hours outside the ensemble");
    }
    long hits = 0;
    for (int m = 0; m < forecast.members(); ++m) {
        if (forecast.paths()(m, bid.buy_hour) <= bid.buy_limit && forecast.paths()(m, bid.sell_hour) >= bid.sell_limit) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / forecast.members();
}

}  // namespace bessval
