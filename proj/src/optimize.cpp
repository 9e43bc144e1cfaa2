#include "bessval/optimize.hpp"

#include "bessval/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace bessval {

namespace {

constexpr double kIntegerSnap = 1e-9;

/// Tail size (1 - alpha) n, snapped to an integer when it is one up to round-off.
double tail_count(double alpha, std::size_t n) {
    const double t = (1.0 - alpha) * static_cast<double>(n);
    const double r = std::round(t);
    return std::abs(t - r) <= kIntegerSnap * std::max(1.0, t) ? r : t;
}

struct MilpLayout {
    int hours = 0;
    int buy = 0;
    int sell = 0;
    int zb = 0;
    int zs = 0;
};

MilpLayout layout_for(int hours) {
    return {hours, 0, hours, 2 * hours, 3 * hours};
}

BidSchedule extract_schedule(const std::vector<double>& x, const MilpLayout& lay, const BatteryConfig& config) {
    BidSchedule s = BidSchedule::zero(lay.hours);
    for (int h = 0; h < lay.hours; ++h) {
        const auto k = static_cast<std::size_t>(h);
        double b = x[static_cast<std::size_t>(lay.buy + h)];
        double v = x[static_cast<std::size_t>(lay.sell + h)];
        b = b <= kVolumeTolerance ? 0.0 : std::min(b, config.max_buy_volume());
        v = v <= kVolumeTolerance ? 0.0 : std::min(v, config.max_sell_volume());
        s.buy[k] = b;
        s.sell[k] = v;
    }
    // Absorb solver round-off in the terminal balance with the last trade.
    double balance = 0.0;
    for (int h = 0; h < lay.hours; ++h) {
        const auto k = static_cast<std::size_t>(h);
        balance += config.efficiency * s.buy[k] - s.sell[k] / config.efficiency;
    }
    for (int h = lay.hours - 1; h >= 0 && balance != 0.0; --h) {
        const auto k = static_cast<std::size_t>(h);
        if (s.sell[k] > 0.0) {
            s.sell[k] = std::max(0.0, s.sell[k] + balance * config.efficiency);
            break;
        }
        if (s.buy[k] > 0.0) {
            s.buy[k] = std::max(0.0, s.buy[k] - balance / config.efficiency);
            break;
        }
    }
    return s;
}

}  // namespace

RiskValue risk_measure(std::span<const double> returns, const RiskSpec& risk) {
    if (returns.empty()) throw InputError("risk measure of an empty return sample");
    if (risk.kind == RiskKind::ExpectedProfit) {
        const double m = mean(returns);
        return {m, m};
    }
    risk.validate();
    std::vector<double> x(returns.begin(), returns.end());
    const double t = tail_count(risk.alpha, x.size());
    const auto whole = static_cast<std::size_t>(std::floor(t));
    const auto var_index = static_cast<std::size_t>(std::ceil(t)) - 1;
    // Partition so x[var_index] is the ceil(t)-th smallest and everything before it is no larger.
    std::nth_element(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(var_index), x.end());
    std::sort(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(var_index));
    double sum = 0.0;
    for (std::size_t i = 0; i < whole; ++i) sum += x[i];
    const double frac = t - static_cast<double>(whole);
    if (frac > 0.0) sum += frac * x[whole];
    return {sum / t, x[var_index]};
}

std::vector<double> predicted_objective_distribution(const ScenarioEnsemble& forecast,
                                                     const BidSchedule& schedule, double efficiency) {
    if (schedule.hours() != forecast.hours()) {
        throw InputError("schedule has " + std::to_string(schedule.hours()) + " hours but the ensemble has " +
                         std::to_string(forecast.hours()));
    }
    const Eigen::MatrixXd& paths = forecast.paths();
    Eigen::VectorXd weight(forecast.hours());
    for (int h = 0; h < forecast.hours(); ++h) {
        const auto k = static_cast<std::size_t>(h);
        weight(h) = -schedule.buy[k] / efficiency + schedule.sell[k] * efficiency;
    }
    const Eigen::VectorXd r = paths * weight;
    return std::vector<double>(r.data(), r.data() + r.size());
}

double cvar_linear_program(std::span<const double> returns, double alpha) {
    if (returns.empty()) throw InputError("CVaR of an empty return sample");
    RiskSpec::cvar(alpha);
    const auto m = returns.size();
    double span = 1.0;
    for (double r : returns) span = std::max(span, std::abs(r));
    LinearProgram lp;
    const int zeta = lp.add_col(1.0, -2.0 * span, 2.0 * span);
    const double w = 1.0 / ((1.0 - alpha) * static_cast<double>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const int u = lp.add_col(-w, 0.0, kInf);
        lp.add_row({{u, 1.0}, {zeta, -1.0}}, -returns[i], kInf);
    }
    DualSimplex solver(lp);
    if (solver.solve() != LpStatus::Optimal) throw std::runtime_error("CVaR linear program did not solve");
    return solver.objective();
}

DpResult dp_optimize(const ScenarioEnsemble& forecast, const BatteryConfig& config, const RiskSpec& risk) {
    config.validate();
    risk.validate();
    if (config.max_buy_bids != 1 || config.max_sell_bids != 1) {
        throw InputError("pair enumeration covers one buy and one sell bid only; use the MILP optimizer "
                         "for multiple bids");
    }
    const int hours = forecast.hours();
    const int members = forecast.members();
    const double eta = config.efficiency;
    const double energy = std::min(config.capacity_mwh, config.power_mw);
    const double buy_volume = energy / eta;
    const double sell_volume = energy * eta;

    DpResult out;
    out.table.values = Eigen::MatrixXd::Constant(hours, hours, std::numeric_limits<double>::quiet_NaN());
    out.schedule = BidSchedule::zero(hours);
    const Eigen::MatrixXd& f = forecast.paths();
    std::vector<double> returns(static_cast<std::size_t>(members));
    double best = 0.0;
    for (int b = 0; b < hours; ++b) {
        for (int s = b + 1; s < hours; ++s) {
            for (int m = 0; m < members; ++m) {
                returns[static_cast<std::size_t>(m)] = -buy_volume / eta * f(m, b) + sell_volume * eta * f(m, s);
            }
            const double v = risk_measure(returns, risk).value;
            out.table.values(b, s) = v;
            if (v > best) {
                best = v;
                out.buy_hour = b;
                out.sell_hour = s;
            }
        }
    }
    out.objective = best;
    if (out.buy_hour >= 0) {
        out.schedule.buy[static_cast<std::size_t>(out.buy_hour)] = buy_volume;
        out.schedule.sell[static_cast<std::size_t>(out.sell_hour)] = sell_volume;
    }
    return out;
}

MilpProblem build_battery_milp(const ScenarioEnsemble& forecast, const BatteryConfig& config,
                               const RiskSpec& risk) {
    config.validate();
    risk.validate();
    const int hours = forecast.hours();
    const int members = forecast.members();
    const double eta = config.efficiency;
    const double max_buy = config.max_buy_volume();
    const double max_sell = config.max_sell_volume();
    const MilpLayout lay = layout_for(hours);
    const Eigen::MatrixXd& f = forecast.paths();

    MilpProblem prob;
    LinearProgram& lp = prob.lp;
    const bool cvar = risk.kind == RiskKind::CVaR;
    const Eigen::VectorXd avg = forecast.mean_path();
    for (int h = 0; h < hours; ++h) lp.add_col(cvar ? 0.0 : -avg(h) / eta, 0.0, max_buy);
    for (int h = 0; h < hours; ++h) lp.add_col(cvar ? 0.0 : avg(h) * eta, 0.0, max_sell);
    for (int h = 0; h < hours; ++h) prob.integer_cols.push_back(lp.add_col(0.0, 0.0, 1.0));
    for (int h = 0; h < hours; ++h) prob.integer_cols.push_back(lp.add_col(0.0, 0.0, 1.0));

    for (int h = 0; h < hours; ++h) {
        lp.add_row({{lay.buy + h, 1.0}, {lay.zb + h, -max_buy}}, -kInf, 0.0);
        lp.add_row({{lay.sell + h, 1.0}, {lay.zs + h, -max_sell}}, -kInf, 0.0);
        lp.add_row({{lay.zb + h, 1.0}, {lay.zs + h, 1.0}}, -kInf, 1.0);
    }
    if (config.max_buy_bids < hours) {
        std::vector<std::pair<int, double>> row;
        for (int h = 0; h < hours; ++h) row.emplace_back(lay.zb + h, 1.0);
        lp.add_row(std::move(row), -kInf, config.max_buy_bids);
    }
    if (config.max_sell_bids < hours) {
        std::vector<std::pair<int, double>> row;
        for (int h = 0; h < hours; ++h) row.emplace_back(lay.zs + h, 1.0);
        lp.add_row(std::move(row), -kInf, config.max_sell_bids);
    }
    std::vector<std::pair<int, double>> prefix;
    for (int h = 0; h < hours; ++h) {
        prefix.emplace_back(lay.buy + h, eta);
        prefix.emplace_back(lay.sell + h, -1.0 / eta);
        const bool last = h == hours - 1;
        lp.add_row(prefix, 0.0, last ? 0.0 : config.capacity_mwh);
    }
    const double cycle_cap = config.cycles * config.capacity_mwh;
    if (cycle_cap < hours * config.power_mw) {
        std::vector<std::pair<int, double>> row;
        for (int h = 0; h < hours; ++h) row.emplace_back(lay.buy + h, eta);
        lp.add_row(std::move(row), -kInf, cycle_cap);
    }

    if (cvar) {
        double bound = 1.0;
        for (int h = 0; h < hours; ++h) {
            const double peak = f.col(h).cwiseAbs().maxCoeff();
            bound += peak * (max_buy / eta + max_sell * eta);
        }
        const int zeta = lp.add_col(1.0, -bound, bound);
        const double w = 1.0 / (risk.tail_probability() * members);
        for (int m = 0; m < members; ++m) {
            const int u = lp.add_col(-w, 0.0, kInf);
            std::vector<std::pair<int, double>> row{{u, 1.0}, {zeta, -1.0}};
            for (int h = 0; h < hours; ++h) {
                if (f(m, h) == 0.0) continue;
                row.emplace_back(lay.buy + h, -f(m, h) / eta);
                row.emplace_back(lay.sell + h, f(m, h) * eta);
            }
            lp.add_row(std::move(row), 0.0, kInf);
        }
    }

    // All-zero volumes with zeta = u = 0 is the no-action point.
    prob.incumbent = std::vector<double>(static_cast<std::size_t>(lp.cols()), 0.0);

    const int n_buy = config.max_buy_bids;
    const int n_sell = config.max_sell_bids;
    prob.repair = [lay, n_buy, n_sell](const std::vector<double>& x) -> std::optional<std::vector<double>> {
        std::vector<double> y = x;
        int buys = 0;
        int sells = 0;
        for (int h = 0; h < lay.hours; ++h) {
            const bool b = x[static_cast<std::size_t>(lay.buy + h)] > kVolumeTolerance;
            const bool s = x[static_cast<std::size_t>(lay.sell + h)] > kVolumeTolerance;
            if (b && s) return std::nullopt;
            buys += b;
            sells += s;
            y[static_cast<std::size_t>(lay.zb + h)] = b ? 1.0 : 0.0;
            y[static_cast<std::size_t>(lay.zs + h)] = s ? 1.0 : 0.0;
        }
        if (buys > n_buy || sells > n_sell) return std::nullopt;
        return y;
    };
    return prob;
}

MilpSolution milp_optimize(const ScenarioEnsemble& forecast, const BatteryConfig& config,
                           const RiskSpec& risk, const MilpOptions& options) {
    const MilpProblem prob = build_battery_milp(forecast, config, risk);
    const MilpResult res = solve_milp(prob, options);
    MilpSolution out;
    out.status = res.status;
    out.gap = res.gap;
    out.nodes = res.nodes;
    if (res.status == MilpStatus::Infeasible) {
        out.schedule = BidSchedule::zero(forecast.hours());
        return out;
    }
    out.schedule = extract_schedule(res.x, layout_for(forecast.hours()), config);
    const auto dist = predicted_objective_distribution(forecast, out.schedule, config.efficiency);
    out.objective = risk_measure(dist, risk).value;
    if (out.objective < 0.0 || out.schedule.is_zero()) {
        out.schedule = BidSchedule::zero(forecast.hours());
        out.objective = 0.0;
    }
    return out;
}

MilpSolution brute_force_optimize(const ScenarioEnsemble& forecast, const BatteryConfig& config,
                                  const RiskSpec& risk, const std::vector<double>& volume_grid,
                                  long long budget) {
    config.validate();
    std::vector<double> levels;
    for (double v : volume_grid) {
        if (v < 0.0) throw InputError("volume grid entries must be non-negative");
        if (v > 0.0) levels.push_back(v);
    }
    const int hours = forecast.hours();
    const long long choices = 1 + 2 * static_cast<long long>(levels.size());
    long long total = 1;
    for (int h = 0; h < hours; ++h) {
        if (total > budget / choices) throw InputError("brute-force enumeration exceeds its budget");
        total *= choices;
    }

    MilpSolution best;
    best.schedule = BidSchedule::zero(hours);
    best.objective = 0.0;
    BidSchedule cand = BidSchedule::zero(hours);
    for (long long n = 0; n < total; ++n) {
        long long rest = n;
        for (int h = 0; h < hours; ++h) {
            const auto k = static_cast<std::size_t>(h);
            const auto d = static_cast<std::size_t>(rest % choices);
            rest /= choices;
            cand.buy[k] = 0.0;
            cand.sell[k] = 0.0;
            if (d == 0) continue;
            if (d <= levels.size()) {
                cand.buy[k] = levels[d - 1];
            } else {
                cand.sell[k] = levels[d - 1 - levels.size()];
            }
        }
        if (!validate_bid_schedule(cand, config).ok()) continue;
        const auto dist = predicted_objective_distribution(forecast, cand, config.efficiency);
        const double v = risk_measure(dist, risk).value;
        if (v > best.objective + 1e-12 * (1.0 + std::abs(best.objective))) {
            best.objective = v;
            best.schedule = cand;
        }
    }
    best.status = MilpStatus::Optimal;
    return best;
}

void write_lp_file(const MilpProblem& problem, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out.precision(17);
    const LinearProgram& lp = problem.lp;
    auto term = [&](double coef, int col) {
        out << (coef < 0 ? " - " : " + ") << std::abs(coef) << " x" << col;
    };
    out << "\\ battery arbitrage program\nMaximize\n obj:";
    for (int j = 0; j < lp.cols(); ++j) {
        if (lp.objective[static_cast<std::size_t>(j)] != 0.0) term(lp.objective[static_cast<std::size_t>(j)], j);
    }
    out << "\nSubject To\n";
    for (int i = 0; i < lp.num_rows(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        auto body = [&]() {
            for (const auto& [j, v] : lp.rows[k]) term(v, j);
        };
        const double lo = lp.row_lo[k];
        const double hi = lp.row_hi[k];
        if (lo == hi) {
            out << " r" << i << ":";
            body();
            out << " = " << lo << "\n";
            continue;
        }
        if (std::isfinite(lo)) {
            out << " r" << i << "_lo:";
            body();
            out << " >= " << lo << "\n";
        }
        if (std::isfinite(hi)) {
            out << " r" << i << "_hi:";
            body();
            out << " <= " << hi << "\n";
        }
    }
    out << "Bounds\n";
    for (int j = 0; j < lp.cols(); ++j) {
        const double lo = lp.col_lo[static_cast<std::size_t>(j)];
        const double hi = lp.col_hi[static_cast<std::size_t>(j)];
        out << " ";
        if (std::isfinite(lo)) out << lo; else out << "-inf";
        out << " <= x" << j << " <= ";
        if (std::isfinite(hi)) out << hi; else out << "+inf";
        out << "\n";
    }
    if (!problem.integer_cols.empty()) {
        out << "General\n";
        for (int j : problem.integer_cols) out << " x" << j << "\n";
    }
    out << "End\n";
}

OptimizerKind parse_optimizer(const std::string& text) {
    if (text == "dp") return OptimizerKind::Dp;
    if (text == "milp") return OptimizerKind::Milp;
    throw InputError("unknown optimizer '" + text + "' (use dp or milp)");
}

const char* to_string(OptimizerKind kind) { return kind == OptimizerKind::Dp ? "dp" : "milp"; }

DayDecision optimize_day(const ScenarioEnsemble& forecast, const BatteryConfig& config, const RiskSpec& risk,
                         OptimizerKind kind, const MilpOptions& options) {
    if (kind == OptimizerKind::Dp) {
        DpResult r = dp_optimize(forecast, config, risk);
        return {std::move(r.schedule), r.objective};
    }
    MilpSolution s = milp_optimize(forecast, config, risk, options);
    return {std::move(s.schedule), s.objective};
}

}  // namespace bessval
