// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include "bessval/config.hpp"
#include "bessval/evaluate.hpp"
#include "bessval/io.hpp"
#include "bessval/optimize.hpp"
#include "bessval/qbts.hpp"
#include "bessval/ranks.hpp"
#include "bessval/scoring.hpp"
#include "bessval/simulate.hpp"
#include "bessval/stats.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifndef BESSVAL_CLI_PATH
#error "BESSVAL_CLI_PATH must point at the command-line tool"
#endif

using namespace bessval;
using bessval::testing::ar1_covariance;
using bessval::testing::random_day_spec;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, double a = 0, double b = 0, double c = 0, double d = 0) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
    return buf;
}

double diff_se(double a, double b) { return std::sqrt(a * a + b * b); }

// ---------------------------------------------------------------- C1
Outcome qbts_acceptance_identity() {
    const auto truth = GaussianPriceSpec::bivariate(50.0, 100.0, 10.0, 0.0);
    Outcome out{true, ""};
    int i = 0;
    for (double alpha : {0.1, 0.2, 0.3, 0.4}) {
        const auto est = qbts_acceptance_probability(truth, truth, 0, 1, alpha, ProbabilityMethod::MonteCarlo,
                                                     {1'000'000, derive_seed(101, static_cast<std::uint64_t>(i++))});
        const double target = (1.0 - alpha) * (1.0 - alpha);
        const double z = (est.value - target) / est.std_error;
        out.pass = out.pass && std::abs(z) <= 3.0;
        out.detail += fmt("a=%.1f AP=%.5f z=%+.2f ", alpha, est.value, z);
    }
    return out;
}

// ---------------------------------------------------------------- C2
Outcome qbts_gaming() {
    const BatteryConfig unit{1.0, 1.0, 1.0, 1, 1, 1};
    const McSettings base{1'000'000, 0};
    std::uint64_t stream = 200;
    auto profit = [&](const QbtsPanel& p, double b, double alpha) {
        const auto truth = GaussianPriceSpec::bivariate(p.mu_b, p.mu_s, p.sigma, 0.0);
        const auto fc = GaussianPriceSpec::bivariate(p.mu_b, p.mu_s, p.sigma, 0.0, b);
        McSettings mc = base;
        mc.seed = derive_seed(7, stream++);
        return qbts_expected_profit(truth, fc, 0, 1, alpha, unit, ProbabilityMethod::MonteCarlo, mc);
    };
    // Wide spread, low volatility: some overdispersed forecast earns more.
    const QbtsPanel wide{50.0, 100.0, 10.0};
    double best_z = -1e300;
    double best_b = 0;
    double best_a = 0;
    for (double alpha : {0.1, 0.2, 0.3, 0.4}) {
        const QbtsProfit perfect = profit(wide, 1.0, alpha);
        for (double b : {1.5, 2.0, 3.0}) {
            const QbtsProfit p = profit(wide, b, alpha);
            const double z = (p.expected_profit - perfect.expected_profit) / diff_se(p.profit_se, perfect.profit_se);
            if (z > best_z) {
                best_z = z;
                best_b = b;
                best_a = alpha;
            }
        }
    }
    // Narrow spread, high volatility, small alpha: overdispersion loses.
    const QbtsPanel narrow{90.0, 100.0, 20.0};
    double worst_z = 1e300;
    for (double alpha : {0.05, 0.1}) {
        const QbtsProfit perfect = profit(narrow, 1.0, alpha);
        for (double b : {1.5, 2.0}) {
            const QbtsProfit p = profit(narrow, b, alpha);
            const double z = (perfect.expected_profit - p.expected_profit) / diff_se(p.profit_se, perfect.profit_se);
            worst_z = std::min(worst_z, z);
        }
    }
    return {best_z > 3.0 && worst_z > 3.0,
            fmt("(50,100,10) best gain z=%.1f at b=%.2f a=%.2f; (90,100,20) smallest loss z=%.1f", best_z, best_b,
                best_a, worst_z)};
}

// ---------------------------------------------------------------- C3
Outcome correlation_effect() {
    std::vector<AcceptanceEstimate> ap;
    std::uint64_t i = 0;
    for (double rho : {0.0, 0.4, 0.8}) {
        const auto truth = GaussianPriceSpec::bivariate(90.0, 100.0, 20.0, rho);
        ap.push_back(qbts_acceptance_probability(truth, truth, 0, 1, 0.2, ProbabilityMethod::MonteCarlo,
                                                 {1'000'000, derive_seed(303, i++)}));
    }
    const double z1 = (ap[0].value - ap[1].value) / diff_se(ap[0].std_error, ap[1].std_error);
    const double z2 = (ap[1].value - ap[2].value) / diff_se(ap[1].std_error, ap[2].std_error);
    return {z1 > 3.0 && z2 > 3.0,
            fmt("AP rho=0: %.4f, 0.4: %.4f, 0.8: %.4f; gap z = %.1f", ap[0].value, ap[1].value, ap[2].value, z1) +
                fmt(", %.1f", z2)};
}

// ---------------------------------------------------------------- C4 / C5
std::vector<ScenarioEnsemble> optimizer_instances() {
    std::vector<ScenarioEnsemble> out;
    Rng rng(404);
    for (int i = 0; i < 100; ++i) {
        GaussianPriceSpec spec = random_day_spec(rng, 24, 12.0, 0.7);
        out.push_back(sample_gaussian_prices(spec, 100, derive_seed(404, static_cast<std::uint64_t>(i))));
    }
    return out;
}

Outcome dp_milp_equivalence(const std::vector<ScenarioEnsemble>& instances) {
    const BatteryConfig cfg{10.0, 0.95, 10.0, 1, 1, 1};
    double worst = 0.0;
    int bad = 0;
    for (const auto& f : instances) {
        const DpResult dp = dp_optimize(f, cfg, RiskSpec::expected_profit());
        const MilpSolution milp = milp_optimize(f, cfg, RiskSpec::expected_profit());
        const double excess = std::abs(milp.objective - dp.objective) / (1.0 + std::abs(dp.objective));
        worst = std::max(worst, excess);
        if (excess > 1e-6 || !validate_bid_schedule(milp.schedule, cfg).ok()) ++bad;
    }
    return {bad == 0, fmt("%.0f/100 instances off; max |MILP-DP|/(1+|DP|) = %.2e", bad, worst)};
}

Outcome milp24_dominance(const std::vector<ScenarioEnsemble>& instances) {
    const BatteryConfig one{10.0, 0.95, 10.0, 1, 1, 1};
    const BatteryConfig many{10.0, 0.95, 10.0, 1, 24, 24};
    int violations = 0;
    int strict_cvar = 0;
    double worst_shortfall = 0.0;
    for (const RiskSpec& risk : {RiskSpec::expected_profit(), RiskSpec::cvar(0.9)}) {
        for (const auto& f : instances) {
            const DpResult dp = dp_optimize(f, one, risk);
            const MilpSolution milp = milp_optimize(f, many, risk);
            const double shortfall = dp.objective - milp.objective;
            worst_shortfall = std::max(worst_shortfall, shortfall);
            if (shortfall > 1e-9 || !validate_bid_schedule(milp.schedule, many).ok()) ++violations;
            if (risk.kind == RiskKind::CVaR && milp.objective > dp.objective + 1e-6 * (1.0 + std::abs(dp.objective))) {
                ++strict_cvar;
            }
        }
    }
    return {violations == 0 && strict_cvar >= 1,
            fmt("%.0f dominance violations (worst DP-MILP %.2e); %.0f/100 CVaR0.9 instances strictly improved",
                violations, worst_shortfall, strict_cvar)};
}

// ---------------------------------------------------------------- C6
Outcome cvar_linearization() {
    Rng rng(606);
    double worst = 0.0;
    const int sizes[] = {10, 20, 40, 50, 100};
    const double alphas[] = {0.5, 0.8, 0.9, 0.95};
    const BatteryConfig cfg;
    for (int i = 0; i < 200; ++i) {
        int m = 0;
        double alpha = 0.0;
        long tail = 0;
        do {  // only integer tail counts
            m = sizes[rng.index(5)];
            alpha = alphas[rng.index(4)];
            tail = std::lround((1.0 - alpha) * m);
        } while (tail < 1 || std::abs((1.0 - alpha) * m - static_cast<double>(tail)) > 1e-9);
        GaussianPriceSpec spec = random_day_spec(rng, 24);
        const ScenarioEnsemble f = sample_gaussian_prices(spec, m, rng.engine()());
        // Random feasible schedule: one to three charge/discharge pairs.
        BidSchedule s = BidSchedule::zero(24);
        const int pairs = 1 + static_cast<int>(rng.index(3));
        for (int p = 0; p < pairs; ++p) {
            const int b = 8 * p + static_cast<int>(rng.index(4));
            const int e = b + 1 + static_cast<int>(rng.index(3));
            const double energy = cfg.capacity_mwh * rng.uniform() / pairs;
            s.buy[static_cast<std::size_t>(b)] += energy / cfg.efficiency;
            s.sell[static_cast<std::size_t>(e)] += energy * cfg.efficiency;
        }
        std::vector<double> r = predicted_objective_distribution(f, s, cfg.efficiency);
        const double lp = cvar_linear_program(r, alpha);
        std::sort(r.begin(), r.end());
        double tail_sum = 0.0;
        for (long j = 0; j < tail; ++j) tail_sum += r[static_cast<std::size_t>(j)];
        const double oracle = tail_sum / static_cast<double>(tail);
        worst = std::max(worst, std::abs(lp - oracle));
    }
    return {worst <= 1e-6, fmt("max |LP CVaR - sorted tail mean| = %.2e over 200 cases", worst)};
}

// ---------------------------------------------------------------- C7
Outcome brute_force_agreement() {
    Rng rng(707);
    double worst = 0.0;
    int cvar_above = 0;
    for (int i = 0; i < 50; ++i) {
        BatteryConfig cfg{1.0, 1.0, 1.0, 1 + static_cast<int>(rng.index(2)), 0, 0};
        cfg.max_buy_bids = 1 + static_cast<int>(rng.index(4));
        cfg.max_sell_bids = 1 + static_cast<int>(rng.index(4));
        const int m = 1 + static_cast<int>(rng.index(3));
        Eigen::MatrixXd paths(m, 4);
        for (int r = 0; r < m; ++r) {
            for (int h = 0; h < 4; ++h) paths(r, h) = std::round(100.0 * rng.uniform() - 20.0);
        }
        const ScenarioEnsemble f("2024-01-01", paths);
        const std::vector<double> grid{0.0, 1.0};
        const RiskSpec ep = RiskSpec::expected_profit();
        const double exact = brute_force_optimize(f, cfg, ep, grid).objective;
        const double milp = milp_optimize(f, cfg, ep).objective;
        worst = std::max(worst, std::abs(exact - milp));
        // CVaR optima need not lie on the grid; enumeration can only be lower.
        const RiskSpec cv = RiskSpec::cvar(0.5);
        if (brute_force_optimize(f, cfg, cv, grid).objective > milp_optimize(f, cfg, cv).objective + 1e-6) ++cvar_above;
    }
    return {worst <= 1e-6 && cvar_above == 0,
            fmt("EP max |MILP - enumeration| = %.2e; CVaR enumeration above MILP on %.0f instances", worst,
                cvar_above)};
}

// ---------------------------------------------------------------- C8
Outcome non_strict_propriety() {
    Rng rng(808);
    const BatteryConfig one_hour{1.0, 0.95, 1.0, 1, 1, 1};
    int objective_mismatch = 0;
    int pair_mismatch = 0;
    int days = 0;
    std::vector<double> crps_ref, crps_dist;
    while (days < 100) {
        GaussianPriceSpec spec = random_day_spec(rng, 24);
        const ScenarioEnsemble ref = sample_gaussian_prices(spec, 200, rng.engine()());
        const Eigen::VectorXd m = ref.mean_path();
        Eigen::Index lo, hi;
        m.minCoeff(&lo);
        m.maxCoeff(&hi);
        if (lo > hi) continue;  // the construction needs the trough before the peak
        const ScenarioEnsemble dist = same_rank_forecast(ref, 1.0);
        const DpResult a = dp_optimize(ref, one_hour, RiskSpec::expected_profit());
        const DpResult b = dp_optimize(dist, one_hour, RiskSpec::expected_profit());
        if (a.objective != b.objective) ++objective_mismatch;
        if (a.buy_hour != b.buy_hour || a.sell_hour != b.sell_hour) ++pair_mismatch;
        const ScenarioEnsemble y = sample_gaussian_prices(spec, 1, rng.engine()());
        const PriceDay day("2024-01-01", std::vector<double>(y.paths().data(), y.paths().data() + 24));
        crps_ref.push_back(crps(ref, day));
        crps_dist.push_back(crps(dist, day));
        ++days;
    }
    std::vector<double> diff(crps_ref.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = crps_dist[i] - crps_ref[i];
    const double d_mean = mean(diff);

    double worst_residual = 0.0;
    int twins = 0;
    while (twins < 100) {
        TwinSetup t;
        t.sigma_b = 5.0 + 20.0 * rng.uniform();
        t.sigma_s = 5.0 + 20.0 * rng.uniform();
        t.rho = -0.9 + 1.8 * rng.uniform();
        t.efficiency = 0.8 + 0.2 * rng.uniform();
        t.capacity = 1.0 + 9.0 * rng.uniform();
        const double ss_hat = t.sigma_s * (0.5 + rng.uniform());
        const double rho_hat = -0.9 + 1.8 * rng.uniform();
        double sb_hat;
        try {
            sb_hat = covariance_twin(t, ss_hat, rho_hat);
        } catch (const InputError&) {
            continue;  // infeasible parameter region; draw again
        }
        worst_residual = std::max(worst_residual, std::abs(revenue_variance_difference(t, sb_hat, ss_hat, rho_hat)));
        ++twins;
    }
    const bool pass = objective_mismatch == 0 && pair_mismatch == 0 && d_mean > 0.0 && worst_residual < 1e-9;
    return {pass, fmt("objective mismatches %.0f, pair mismatches %.0f, mean CRPS increase %.3f; twin max |delta| = "
                      "%.2e",
                      objective_mismatch, pair_mismatch, d_mean, worst_residual)};
}

// ---------------------------------------------------------------- C9
Outcome scoring_propriety() {
    const int hours = 24;
    const int members = 30;
    const int days = 10'000;
    Rng rng(909);
    GaussianPriceSpec truth;
    truth.mu = bessval::testing::random_profile(rng, hours);
    truth.sigma = ar1_covariance(hours, 10.0, 0.8);
    GaussianPriceSpec shifted = truth;
    shifted.mu.array() += 5.0;
    GaussianPriceSpec inflated = truth;
    inflated.dispersion = 1.5;

    // diffs[score][alternative][day] = S(alternative) - S(true)
    std::vector<std::vector<std::vector<double>>> diffs(3, std::vector<std::vector<double>>(2));
    double brier_min = 1e300, brier_max = -1e300;
    for (int d = 0; d < days; ++d) {
        const std::uint64_t s = derive_seed(909, static_cast<std::uint64_t>(d));
        const ScenarioEnsemble yv = sample_gaussian_prices(truth, 1, derive_seed(s, 0));
        const PriceDay day("2024-01-01", std::vector<double>(yv.paths().data(), yv.paths().data() + hours));
        const ScenarioEnsemble f0 = sample_gaussian_prices(truth, members, derive_seed(s, 1));
        const ScenarioEnsemble f1 = sample_gaussian_prices(shifted, members, derive_seed(s, 2));
        const ScenarioEnsemble f2 = sample_gaussian_prices(inflated, members, derive_seed(s, 3));
        const double c0 = crps(f0, day), e0 = energy_score(f0, day), k0 = kendall_score(f0, day, KendallMode::Kernel);
        int a = 0;
        for (const ScenarioEnsemble* f : {&f1, &f2}) {
            diffs[0][static_cast<std::size_t>(a)].push_back(crps(*f, day) - c0);
            diffs[1][static_cast<std::size_t>(a)].push_back(energy_score(*f, day) - e0);
            diffs[2][static_cast<std::size_t>(a)].push_back(kendall_score(*f, day, KendallMode::Kernel) - k0);
            ++a;
        }
        for (const ScenarioEnsemble* f : {&f0, &f1, &f2}) {
            const double b = rank_scores(make_rank_ensemble(*f, day), {}).brier;
            brier_min = std::min(brier_min, b);
            brier_max = std::max(brier_max, b);
        }
    }
    bool pass = true;
    std::string detail;
    const char* names[] = {"CRPS", "ES", "KS"};
    const char* alts[] = {"+5", "x1.5"};
    for (int sc = 0; sc < 3; ++sc) {
        for (int a = 0; a < 2; ++a) {
            const auto& v = diffs[static_cast<std::size_t>(sc)][static_cast<std::size_t>(a)];
            const double z = mean(v) / (sample_sd(v) / std::sqrt(static_cast<double>(v.size())));
            const bool ok = z > 3.0;
            pass = pass && ok;
            detail += std::string(names[sc]) + alts[a] + fmt(" z=%.1f ", z) + (ok ? "" : "(fail) ");
        }
    }

    // One-hour days: the energy score reduces to the CRPS.
    double es_crps_gap = 0.0;
    for (int d = 0; d < 200; ++d) {
        Eigen::MatrixXd p(members, 1);
        for (int i = 0; i < members; ++i) p(i, 0) = 50.0 + 10.0 * rng.normal();
        const ScenarioEnsemble f("2024-01-01", p);
        const PriceDay day("2024-01-01", {50.0 + 10.0 * rng.normal()});
        const double c = crps(f, day);
        es_crps_gap = std::max(es_crps_gap, std::abs(energy_score(f, day) - c) / (1.0 + c));
    }
    const bool es_ok = es_crps_gap <= 1e-12;

    // Member paths with the observed ranks score zero on every rank score.
    double perfect_max = 0.0;
    for (int d = 0; d < 200; ++d) {
        const ScenarioEnsemble yv = sample_gaussian_prices(truth, 1, derive_seed(919, static_cast<std::uint64_t>(d)));
        std::vector<double> y(yv.paths().data(), yv.paths().data() + hours);
        const PriceDay day("2024-01-01", y);
        Eigen::MatrixXd p(5, hours);
        for (int i = 0; i < 5; ++i) {
            for (int h = 0; h < hours; ++h) p(i, h) = (i + 1.0) * y[static_cast<std::size_t>(h)] + 3.0 * i;
        }
        const RankScores rs = rank_scores(make_rank_ensemble(ScenarioEnsemble("2024-01-01", p), day), {1, 2, 4, 8});
        perfect_max = std::max({perfect_max, rs.brier, rs.rps});
        for (const auto& t : rs.top_k) perfect_max = std::max(perfect_max, t.bess);
    }
    const bool brier_ok = brier_min >= 0.0 && brier_max <= 2.0;
    pass = pass && es_ok && brier_ok && perfect_max == 0.0;
    detail += fmt("| max |ES-CRPS|/(1+CRPS) on 1-hour days %.1e; Brier range [%.3f, %.3f]; perfect-rank max %.1e",
                  es_crps_gap, brier_min, brier_max, perfect_max);
    return {pass, detail};
}

// ---------------------------------------------------------------- C10
Outcome var_exceedance() {
    const int days = 2000;
    const int hours = 24;
    const int members = 1000;
    Rng rng(1010);
    std::vector<PriceDay> prices;
    ModelForecasts truth{"truth", {}};
    const auto dates = bessval::testing::date_range("2020-01-01", days);
    for (int d = 0; d < days; ++d) {
        GaussianPriceSpec spec = random_day_spec(rng, hours, 10.0, 0.7);
        const std::uint64_t s = derive_seed(1010, static_cast<std::uint64_t>(d));
        truth.days.emplace(dates[static_cast<std::size_t>(d)], sample_gaussian_prices(spec, members, derive_seed(s, 0),
                                                                                      dates[static_cast<std::size_t>(d)]));
        const ScenarioEnsemble y = sample_gaussian_prices(spec, 1, derive_seed(s, 1));
        prices.emplace_back(dates[static_cast<std::size_t>(d)],
                            std::vector<double>(y.paths().data(), y.paths().data() + hours));
    }
    bool pass = true;
    std::string detail;
    for (double alpha : {0.5, 0.75, 0.9}) {
        BacktestSettings s;
        s.battery = BatteryConfig{10.0, 0.95, 10.0, 1, 1, 1};
        s.risk = RiskSpec::cvar(alpha);
        s.optimizer = OptimizerKind::Dp;
        const BacktestResult r = run_backtest({truth}, prices, s);
        const EconomicMeasures m = economic_measures(r, alpha).front();
        const double p = 1.0 - alpha;
        const double z = (m.var_exceedance - p) / std::sqrt(p * (1.0 - p) / m.days);
        pass = pass && std::abs(z) <= 3.0;
        detail += fmt("a=%.2f exceedance=%.4f z=%+.2f no-bid=%.0f ", alpha, m.var_exceedance, z, m.no_bid_days);
    }
    return {pass, detail};
}

// ---------------------------------------------------------------- C11
Outcome cross_score_size_power() {
    const int reps = 200;
    const int days = 100;
    const int hours = 12;
    const int members = 200;
    int size_rejections = 0;
    int power_rejections = 0;
    for (int rep = 0; rep < reps; ++rep) {
        Rng rng(derive_seed(1111, static_cast<std::uint64_t>(rep)));
        ModelForecasts truth{"truth", {}};
        ModelForecasts wide{"wide", {}};
        std::vector<PriceDay> prices;
        const auto dates = bessval::testing::date_range("2021-01-01", days);
        for (int d = 0; d < days; ++d) {
            const std::string& date = dates[static_cast<std::size_t>(d)];
            GaussianPriceSpec spec = random_day_spec(rng, hours, 10.0, 0.7);
            GaussianPriceSpec spec2 = spec;
            spec2.dispersion = 2.0;
            truth.days.emplace(date, sample_gaussian_prices(spec, members, rng.engine()(), date));
            wide.days.emplace(date, sample_gaussian_prices(spec2, members, rng.engine()(), date));
            const ScenarioEnsemble y = sample_gaussian_prices(spec, 1, rng.engine()());
            prices.emplace_back(date, std::vector<double>(y.paths().data(), y.paths().data() + hours));
        }
        BacktestSettings s;
        s.battery = BatteryConfig{10.0, 0.95, 10.0, 1, 1, 1};
        s.risk = RiskSpec::cvar(0.9);
        s.optimizer = OptimizerKind::Dp;
        const std::vector<ModelForecasts> models{truth, wide};
        const BacktestResult r = run_backtest(models, prices, s);
        const CrossScoreMatrix cs = cross_score(r, models);
        // Column "truth": does the wide model beat the truth on its own bids?
        if (!cs.degenerate[1][0] && cs.dm_p(1, 0) < 0.05) ++size_rejections;
        // Column "wide": does the truth beat the wide model on the wide model's bids?
        if (!cs.degenerate[0][1] && cs.dm_p(0, 1) < 0.05) ++power_rejections;
    }
    const double size = static_cast<double>(size_rejections) / reps;
    const double power = static_cast<double>(power_rejections) / reps;
    return {size < 0.10 && power > 0.50, fmt("false rejections %.3f (< 0.10), power %.3f (> 0.50) over %.0f replications",
                                              size, power, reps)};
}

// ---------------------------------------------------------------- C12
std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome cli_determinism() {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "bessval_acceptance_determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    write_price_csv((root / "prices.csv").string(), bessval::testing::synthetic_history(70, 12));

    const std::string models =
        R"("models": ["perfect-foresight", "climatology", "naive-bs", "copula-ind", "copula-dep", "copula-dwd"])";
    const std::string data = R"("prices": "prices.csv", "start_date": "2024-03-01", "ensemble_size": 40, )";
    const std::vector<std::pair<std::string, std::string>> configs{
        {"sim-qbts", R"({"experiment": "sim-qbts", "seed": 5, "mc_draws": 20000})"},
        {"sim-correlation", R"({"experiment": "sim-correlation", "seed": 5, "mc_draws": 20000})"},
        {"backtest", R"({"experiment": "backtest", "seed": 5, )" + data +
                         R"("risks": ["EP", "CVaR0.9"], "optimizer": "milp", )" + models + "}"},
        {"score", R"({"experiment": "score", "seed": 5, )" + data + models + "}"},
        {"cross-score", R"({"experiment": "cross-score", "seed": 5, )" + data +
                            R"("risks": ["CVaR0.9"], "optimizer": "dp", )" + models + "}"},
    };
    int mismatched = 0;
    int failed = 0;
    long compared = 0;
    std::string bad;
    for (const auto& [name, json] : configs) {
        const fs::path cfg = root / (name + ".json");
        std::ofstream(cfg) << json;
        const fs::path out = root / name;
        const std::string cmd = std::string(BESSVAL_CLI_PATH) + " " + name + " --config " + cfg.string() +
                                " --jobs 2 --out " + out.string();
        std::vector<std::pair<fs::path, std::string>> first;
        for (int run = 0; run < 2; ++run) {
            if (std::system(cmd.c_str()) != 0) {
                ++failed;
                bad += name + " ";
            }
            if (run == 0) {
                for (const auto& entry : fs::directory_iterator(out)) first.emplace_back(entry.path(), read_file(entry.path()));
                fs::remove_all(out);
            }
        }
        for (const auto& [path, bytes] : first) {
            ++compared;
            if (!fs::exists(path) || read_file(path) != bytes) {
                ++mismatched;
                bad += path.filename().string() + " ";
            }
        }
    }
    return {failed == 0 && mismatched == 0 && compared > 0,
            fmt("%.0f files compared across 5 commands, %.0f differ, %.0f runs failed", compared, mismatched, failed) +
                (bad.empty() ? "" : " [" + bad + "]")};
}

struct Criterion {
    const char* id;
    const char* name;
    double budget_seconds;  // 0 = no runtime bound
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<ScenarioEnsemble> instances;
    const std::vector<Criterion> criteria{
        {"C1", "QBTS acceptance probability identity", 10, qbts_acceptance_identity},
        {"C2", "QBTS gaming by overdispersion", 60, qbts_gaming},
        {"C3", "acceptance probability falls with correlation", 30, correlation_effect},
        {"C4", "DP and single-bid MILP agree", 300,
         [&] {
             if (instances.empty()) instances = optimizer_instances();
             return dp_milp_equivalence(instances);
         }},
        {"C5", "24-bid MILP dominates DP", 0,
         [&] {
             if (instances.empty()) instances = optimizer_instances();
             return milp24_dominance(instances);
         }},
        {"C6", "CVaR linearization matches sorted tail mean", 0, cvar_linearization},
        {"C7", "MILP matches exhaustive enumeration", 0, brute_force_agreement},
        {"C8", "decision-equivalent forecasts with worse scores", 0, non_strict_propriety},
        {"C9", "scoring-rule propriety suite", 120, scoring_propriety},
        {"C10", "VaR exceedance calibration", 0, var_exceedance},
        {"C11", "cross-score DM size and power", 600, cross_score_size_power},
        {"C12", "CLI byte-identical reruns", 0, cli_determinism},
    };
    std::vector<std::string> only(argv + 1, argv + argc);
    int failures = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt(" [%.1fs", secs);
        if (c.budget_seconds > 0) {
            timing += fmt(" of %.0fs", c.budget_seconds);
            if (secs > c.budget_seconds) {
                o.pass = false;
                timing += " exceeded";
            }
        }
        timing += "]";
        if (!o.pass) ++failures;
        std::cout << (o.pass ? "PASS " : "FAIL ") << c.id << " " << c.name << ": " << o.detail << timing << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
