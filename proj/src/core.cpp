#include "bessval/core.hpp"

#include <cmath>
#include <sstream>

namespace bessval {

namespace {

void require_finite(std::span<const double> values, const std::string& what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw InputError(what + ": non-finite value at index " + std::to_string(i));
        }
    }
}

}  // namespace

PriceDay::PriceDay(std::string date, std::vector<double> prices)
    : date_(std::move(date)), prices_(std::move(prices)) {
    if (prices_.empty()) throw InputError("price day " + date_ + " has no hours");
    require_finite(prices_, "price day " + date_);
}

ScenarioEnsemble::ScenarioEnsemble(std::string date, Eigen::MatrixXd paths)
    : date_(std::move(date)), paths_(std::move(paths)) {
    if (paths_.rows() < 1 || paths_.cols() < 1) {
        throw InputError("ensemble " + date_ + " is empty");
    }
    if (!paths_.allFinite()) throw InputError("ensemble " + date_ + " contains non-finite values");
}

Eigen::VectorXd ScenarioEnsemble::mean_path() const {
    return paths_.colwise().mean().transpose();
}

ScenarioEnsemble degenerate_ensemble(const PriceDay& day) {
    Eigen::MatrixXd paths(1, day.hours());
    for (int h = 0; h < day.hours(); ++h) paths(0, h) = day[h];
    return ScenarioEnsemble(day.date(), std::move(paths));
}

void BatteryConfig::validate() const {
    if (!(capacity_mwh > 0.0) || !std::isfinite(capacity_mwh)) {
        throw InputError("battery capacity must be positive");
    }
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
        throw InputError("battery efficiency must lie in (0, 1]");
    }
    if (!(power_mw > 0.0) || !std::isfinite(power_mw)) {
        throw InputError("battery power must be positive");
    }
    if (cycles < 1) throw InputError("battery cycle count must be at least 1");
    if (max_buy_bids < 1 || max_sell_bids < 1) {
        throw InputError("bid-count limits must be at least 1");
    }
}

BidSchedule BidSchedule::zero(int hours) {
    BidSchedule s;
    s.buy.assign(static_cast<std::size_t>(hours), 0.0);
    s.sell.assign(static_cast<std::size_t>(hours), 0.0);
    return s;
}

int BidSchedule::bid_count() const {
    int n = 0;
    for (std::size_t h = 0; h < buy.size(); ++h) {
        if (buy[h] > kVolumeTolerance) ++n;
        if (sell[h] > kVolumeTolerance) ++n;
    }
    return n;
}

bool BidSchedule::is_zero() const { return bid_count() == 0; }

const char* to_string(ConstraintFamily family) {
    switch (family) {
        case ConstraintFamily::Dimension: return "dimension";
        case ConstraintFamily::NegativeVolume: return "negative volume";
        case ConstraintFamily::BuyPowerLimit: return "buy power limit";
        case ConstraintFamily::SellPowerLimit: return "sell power limit";
        case ConstraintFamily::SimultaneousBuySell: return "simultaneous buy and sell";
        case ConstraintFamily::BuyBidCount: return "buy bid count";
        case ConstraintFamily::SellBidCount: return "sell bid count";
        case ConstraintFamily::ChargeLimits: return "charge limits";
        case ConstraintFamily::TerminalBalance: return "terminal balance";
        case ConstraintFamily::CycleLimit: return "cycle limit";
    }
    return "unknown";
}

bool ValidityReport::violates(ConstraintFamily family) const {
    for (const auto& v : violations) {
        if (v.family == family) return true;
    }
    return false;
}

std::string ValidityReport::describe() const {
    if (ok()) return "pass";
    std::ostringstream out;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i) out << "; ";
        out << to_string(violations[i].family);
        if (violations[i].hour >= 0) out << " at hour " << violations[i].hour;
        out << " (excess " << violations[i].excess << ")";
    }
    return out.str();
}

std::vector<double> storage_trajectory(const BidSchedule& schedule, double efficiency) {
    std::vector<double> level(schedule.buy.size());
    double balance = 0.0;
    for (std::size_t h = 0; h < schedule.buy.size(); ++h) {
        balance += efficiency * schedule.buy[h] - schedule.sell[h] / efficiency;
        level[h] = balance;
    }
    return level;
}

ValidityReport validate_bid_schedule(const BidSchedule& schedule, const BatteryConfig& config) {
    const std::size_t hours = schedule.buy.size();
    if (schedule.sell.size() != hours || hours == 0) {
        throw InputError("bid schedule buy/sell legs have mismatched or zero length");
    }
    if ((!schedule.buy_limit.empty() && schedule.buy_limit.size() != hours) ||
        (!schedule.sell_limit.empty() && schedule.sell_limit.size() != hours)) {
        throw InputError("bid schedule limit prices do not match the number of hours");
    }

    const double tol = kVolumeTolerance;
    const double eta = config.efficiency;
    ValidityReport report;
    auto flag = [&](ConstraintFamily f, int hour, double excess) {
        report.violations.push_back({f, hour, excess});
    };

    int buys = 0;
    int sells = 0;
    double charged = 0.0;
    double balance = 0.0;
    for (std::size_t i = 0; i < hours; ++i) {
        const int h = static_cast<int>(i);
        const double b = schedule.buy[i];
        const double s = schedule.sell[i];
        if (b < -tol) flag(ConstraintFamily::NegativeVolume, h, -b);
        if (s < -tol) flag(ConstraintFamily::NegativeVolume, h, -s);
        if (b > config.max_buy_volume() + tol) {
            flag(ConstraintFamily::BuyPowerLimit, h, b - config.max_buy_volume());
        }
        if (s > config.max_sell_volume() + tol) {
            flag(ConstraintFamily::SellPowerLimit, h, s - config.max_sell_volume());
        }
        if (b > tol && s > tol) flag(ConstraintFamily::SimultaneousBuySell, h, std::min(b, s));
        if (b > tol) ++buys;
        if (s > tol) ++sells;

        charged += eta * b;
        balance += eta * b - s / eta;
        if (balance < -tol) flag(ConstraintFamily::ChargeLimits, h, -balance);
        if (balance > config.capacity_mwh + tol) {
            flag(ConstraintFamily::ChargeLimits, h, balance - config.capacity_mwh);
        }
    }
    report.terminal_balance = balance;
    if (std::abs(balance) > tol) {
        flag(ConstraintFamily::TerminalBalance, static_cast<int>(hours) - 1, std::abs(balance));
    }
    const double cycle_cap = config.cycles * config.capacity_mwh;
    if (charged > cycle_cap + tol) flag(ConstraintFamily::CycleLimit, -1, charged - cycle_cap);
    if (buys > config.max_buy_bids) flag(ConstraintFamily::BuyBidCount, -1, buys - config.max_buy_bids);
    if (sells > config.max_sell_bids) {
        flag(ConstraintFamily::SellBidCount, -1, sells - config.max_sell_bids);
    }
    return report;
}

double realized_return(const BidSchedule& schedule, std::span<const double> prices, double efficiency) {
    if (schedule.buy.size() != prices.size() || schedule.sell.size() != prices.size()) {
        throw InputError("schedule has " + std::to_string(schedule.buy.size()) +
                         " hours but the price vector has " + std::to_string(prices.size()));
    }
    double total = 0.0;
    for (std::size_t h = 0; h < prices.size(); ++h) {
        total += (-schedule.buy[h] / efficiency + schedule.sell[h] * efficiency) * prices[h];
    }
    return total;
}

double realized_return(const BidSchedule& schedule, const PriceDay& day, double efficiency) {
    return realized_return(schedule, std::span<const double>(day.prices()), efficiency);
}

RiskSpec RiskSpec::cvar(double alpha) {
    RiskSpec r;
    r.kind = RiskKind::CVaR;
    r.alpha = alpha;
    r.validate();
    return r;
}

void RiskSpec::validate() const {
    if (kind == RiskKind::CVaR && !(alpha > 0.0 && alpha < 1.0)) {
        throw InputError("CVaR level alpha must lie in (0, 1)");
    }
}

std::string RiskSpec::label() const {
    if (kind == RiskKind::ExpectedProfit) return "EP";
    std::ostringstream out;
    out << "CVaR" << alpha;
    return out.str();
}

RiskSpec parse_risk_spec(const std::string& text) {
    if (text == "EP" || text == "ep" || text == "expected-profit") return RiskSpec::expected_profit();
    std::string rest;
    for (const char* prefix : {"CVaR", "cvar", "cvar-"}) {
        const std::string p(prefix);
        if (text.rfind(p, 0) == 0) rest = text.substr(p.size());
    }
    if (!rest.empty() && rest.front() == '-') rest.erase(0, 1);
    if (rest.empty()) throw InputError("unknown risk spec '" + text + "' (use EP or CVaR<alpha>)");
    std::size_t used = 0;
    double alpha = 0.0;
    try {
        alpha = std::stod(rest, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != rest.size()) throw InputError("cannot parse CVaR level in '" + text + "'");
    return RiskSpec::cvar(alpha);
}

}  // namespace bessval

namespace bessval {

QuantileForecast::QuantileForecast(std::vector<double> levels, Eigen::MatrixXd values)
    : levels_(std::move(levels)), values_(std::move(values)) {
    if (levels_.empty()) throw InputError("quantile forecast has no levels");
    if (static_cast<Eigen::Index>(levels_.size()) != values_.rows()) {
        throw InputError("quantile forecast: level count does not match value rows");
    }
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (!(levels_[i] > 0.0 && levels_[i] < 1.0)) {
            throw InputError("quantile levels must lie in (0, 1)");
        }
        if (i > 0 && !(levels_[i] > levels_[i - 1])) {
            throw InputError("quantile levels must be strictly increasing");
        }
    }
    if (!values_.allFinite()) throw InputError("quantile forecast contains non-finite values");
    for (Eigen::Index h = 0; h < values_.cols(); ++h) {
        for (Eigen::Index l = 1; l < values_.rows(); ++l) {
            if (values_(l, h) < values_(l - 1, h)) {
                throw InputError("quantile crossing at hour " + std::to_string(h));
            }
        }
    }
}

double QuantileForecast::quantile(int hour, double level) const {
    if (hour < 0 || hour >= hours()) throw InputError("quantile hour out of range");
    const double lo = levels_.front();
    const double hi = levels_.back();
    const double eps = 1e-12;
    if (level < lo - eps || level > hi + eps) {
        std::ostringstream msg;
        msg << "quantile level " << level << " outside forecast support [" << lo << ", " << hi << "]";
        throw InputError(msg.str());
    }
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (std::abs(levels_[i] - level) <= eps) return values_(static_cast<Eigen::Index>(i), hour);
    }
    std::size_t j = 1;
    while (levels_[j] < level) ++j;
    const double w = (level - levels_[j - 1]) / (levels_[j] - levels_[j - 1]);
    const auto r0 = static_cast<Eigen::Index>(j - 1);
    return (1.0 - w) * values_(r0, hour) + w * values_(r0 + 1, hour);
}

std::vector<double> QuantileForecast::quantile_path(double level) const {
    std::vector<double> out(static_cast<std::size_t>(hours()));
    for (int h = 0; h < hours(); ++h) out[static_cast<std::size_t>(h)] = quantile(h, level);
    return out;
}

GaussianPriceSpec GaussianPriceSpec::independent(const Eigen::VectorXd& mu, double sd, double dispersion) {
    GaussianPriceSpec spec;
    spec.mu = mu;
    spec.sigma = Eigen::MatrixXd::Identity(mu.size(), mu.size()) * sd * sd;
    spec.dispersion = dispersion;
    return spec;
}

GaussianPriceSpec GaussianPriceSpec::bivariate(double mu_b, double mu_s, double sd, double rho,
                                               double dispersion) {
    GaussianPriceSpec spec;
    spec.mu = Eigen::Vector2d(mu_b, mu_s);
    spec.sigma.resize(2, 2);
    spec.sigma << sd * sd, rho * sd * sd, rho * sd * sd, sd * sd;
    spec.dispersion = dispersion;
    return spec;
}

double GaussianPriceSpec::sd(int hour) const {
    return dispersion * std::sqrt(std::max(0.0, sigma(hour, hour)));
}

void GaussianPriceSpec::validate() const {
    if (mu.size() < 1) throw InputError("Gaussian spec has empty mean");
    if (sigma.rows() != mu.size() || sigma.cols() != mu.size()) {
        throw InputError("Gaussian spec covariance does not match the mean dimension");
    }
    if (!mu.allFinite() || !sigma.allFinite()) throw InputError("Gaussian spec has non-finite entries");
    if (!(dispersion > 0.0)) throw InputError("dispersion must be positive");
    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw InputError("Gaussian spec covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(effective_covariance(), Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-9 * scale * dispersion * dispersion) {
        throw InputError("Gaussian spec covariance is not positive semidefinite");
    }
}

}  // namespace bessval
