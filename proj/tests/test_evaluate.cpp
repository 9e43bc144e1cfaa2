#include "bessval/evaluate.hpp"
#include "bessval/ranks.hpp"
#include "bessval/simulate.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace bessval;

namespace {

BatteryConfig unit_battery() { return BatteryConfig{1.0, 1.0, 1.0, 1, 1, 1}; }

double best_spread(const PriceDay& d) {
    double best = 0.0;
    for (int b = 0; b < d.hours(); ++b) {
        for (int s = b + 1; s < d.hours(); ++s) best = std::max(best, d[s] - d[b]);
    }
    return best;
}

ModelForecasts perfect(const std::string& name, const std::vector<PriceDay>& days) {
    ModelForecasts f{name, {}};
    for (const auto& d : days) f.days.emplace(d.date(), degenerate_ensemble(d));
    return f;
}

ModelForecasts gaussian(const std::string& name, const std::vector<PriceDay>& days, std::uint64_t seed, double sd) {
    ModelForecasts f{name, {}};
    Rng rng(seed);
    for (const auto& d : days) {
        GaussianPriceSpec spec;
        spec.mu = Eigen::Map<const Eigen::VectorXd>(d.prices().data(), d.hours());
        spec.sigma = testing::ar1_covariance(d.hours(), sd, 0.6);
        f.days.emplace(d.date(), sample_gaussian_prices(spec, 40, rng.engine()(), d.date()));
    }
    return f;
}

}  // namespace

TEST_CASE("perfect foresight realizes exactly its predicted objective") {
    const auto days = testing::synthetic_history(10, 3, 8);
    BacktestSettings s;
    s.battery = unit_battery();
    for (OptimizerKind opt : {OptimizerKind::Milp, OptimizerKind::Dp}) {
        s.optimizer = opt;
        const BacktestResult r = run_backtest({perfect("pf", days)}, days, s);
        REQUIRE(r.records.size() == days.size());
        for (std::size_t i = 0; i < days.size(); ++i) {
            const BacktestRecord& rec = r.at("pf", days[i].date());
            CHECK(rec.realized_return == doctest::Approx(rec.predicted_objective).epsilon(1e-9));
            CHECK(rec.realized_return == doctest::Approx(best_spread(days[i])).epsilon(1e-9));
            CHECK(validate_bid_schedule(rec.schedule, s.battery).ok());
        }
    }
}

TEST_CASE("zero prices give zero returns") {
    std::vector<PriceDay> days;
    for (const auto& d : testing::date_range("2024-03-01", 4)) days.emplace_back(d, std::vector<double>(6, 0.0));
    BacktestSettings s;
    s.battery = unit_battery();
    const BacktestResult r = run_backtest({gaussian("g", days, 1, 5.0)}, days, s);
    for (const auto& rec : r.records) CHECK(rec.realized_return == 0.0);
}

TEST_CASE("identical models produce identical backtests") {
    const auto days = testing::synthetic_history(6, 4, 8);
    BacktestSettings s;
    s.battery = unit_battery();
    s.risk = RiskSpec::cvar(0.8);
    ModelForecasts a = gaussian("a", days, 9, 8.0);
    ModelForecasts b = a;
    b.model = "b";
    s.jobs = 2;
    const BacktestResult r = run_backtest({a, b}, days, s);
    for (const auto& d : r.dates) {
        CHECK(r.at("a", d).realized_return == r.at("b", d).realized_return);
        CHECK(r.at("a", d).schedule.buy == r.at("b", d).schedule.buy);
    }
    s.jobs = 1;
    const BacktestResult serial = run_backtest({a, b}, days, s);
    for (std::size_t i = 0; i < r.records.size(); ++i) {
        CHECK(serial.records[i].realized_return == r.records[i].realized_return);
    }
}

TEST_CASE("missing forecast dates are reported") {
    const auto days = testing::synthetic_history(5, 4, 6);
    ModelForecasts f = perfect("pf", days);
    f.days.erase(days[2].date());
    BacktestSettings s;
    s.battery = unit_battery();
    CHECK_THROWS_WITH_AS(run_backtest({f}, days, s), doctest::Contains(days[2].date().c_str()), InputError);
}

TEST_CASE("economic measures aggregate daily records") {
    const auto days = testing::synthetic_history(12, 5, 8);
    BacktestSettings s;
    s.battery = unit_battery();
    const BacktestResult r = run_backtest({perfect("pf", days)}, days, s);
    const auto m = economic_measures(r, 0.9);
    REQUIRE(m.size() == 1);
    double total = 0.0;
    std::vector<double> ret;
    for (const auto& d : days) {
        total += best_spread(d);
        ret.push_back(best_spread(d));
    }
    CHECK(m[0].days == 12);
    CHECK(m[0].total_profit == doctest::Approx(total));
    CHECK(m[0].sharpe_defined);
    CHECK(m[0].sharpe == doctest::Approx(mean(ret) / sample_sd(ret)));
    CHECK(m[0].var_exceedance == 0.0);  // realized equals the single predicted outcome
    CHECK(m[0].no_bid_days == 0);
}

TEST_CASE("flat days give no bids and an undefined Sharpe ratio") {
    std::vector<PriceDay> days;
    for (const auto& d : testing::date_range("2024-03-01", 3)) days.emplace_back(d, std::vector<double>(5, 40.0));
    BacktestSettings s;
    s.battery = unit_battery();
    const auto m = economic_measures(run_backtest({perfect("pf", days)}, days, s), 0.9);
    CHECK(m[0].no_bid_days == 3);
    CHECK_FALSE(m[0].sharpe_defined);
    CHECK(std::isnan(m[0].sharpe));
}

TEST_CASE("cross-scoring identical models gives a constant, degenerate matrix") {
    const auto days = testing::synthetic_history(8, 6, 6);
    BacktestSettings s;
    s.battery = unit_battery();
    s.risk = RiskSpec::cvar(0.8);
    ModelForecasts a = gaussian("a", days, 11, 6.0);
    ModelForecasts b = a;
    b.model = "b";
    const BacktestResult r = run_backtest({a, b}, days, s);
    const CrossScoreMatrix c = cross_score(r, {a, b});
    CHECK(c.score == "FZ");
    CHECK(c.mean_scores.maxCoeff() - c.mean_scores.minCoeff() == doctest::Approx(0.0));
    CHECK(c.degenerate[0][1]);
    CHECK(c.degenerate[1][0]);
    CHECK(std::isnan(c.dm_p(0, 1)));
    CHECK(std::isnan(c.dm_stat(0, 0)));
}

TEST_CASE("cross-score matrix shape and score kind") {
    const auto days = testing::synthetic_history(6, 7, 6);
    std::vector<ModelForecasts> fs;
    for (int i = 0; i < 7; ++i) fs.push_back(gaussian("m" + std::to_string(i), days, 100 + i, 2.0 + i));
    BacktestSettings s;
    s.battery = unit_battery();
    s.jobs = 2;
    const BacktestResult r = run_backtest(fs, days, s);
    const CrossScoreMatrix c = cross_score(r, fs, 0, 2);
    CHECK(c.score == "SE");
    CHECK(c.mean_scores.rows() == 7);
    CHECK(c.mean_scores.cols() == 7);
    int off = 0;
    for (int i = 0; i < 7; ++i) {
        for (int m = 0; m < 7; ++m) {
            if (i == m) continue;
            ++off;
            CHECK(c.daily[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)].size() == days.size());
            if (!c.degenerate[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)]) {
                CHECK(c.dm_p(i, m) >= 0.0);
                CHECK(c.dm_p(i, m) <= 1.0);
            }
        }
    }
    CHECK(off == 42);
    CHECK_THROWS_AS(cross_score(r, {fs[0]}), InputError);
}

TEST_CASE("same-rank forecast preserves ranks and the extreme hours") {
    Rng rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> ref(12);
        for (auto& v : ref) v = 50.0 + 20.0 * rng.normal();
        const auto lo = std::min_element(ref.begin(), ref.end());
        const auto hi = std::max_element(ref.begin(), ref.end());
        if (lo > hi) std::iter_swap(lo, hi);
        CHECK(same_rank_forecast(ref, 0.0) == ref);
        const double a = rng.uniform();
        const auto out = same_rank_forecast(ref, a);
        CHECK(ordinal_ranks(out) == ordinal_ranks(ref));
        CHECK(*std::min_element(out.begin(), out.end()) == *std::min_element(ref.begin(), ref.end()));
        CHECK(*std::max_element(out.begin(), out.end()) == *std::max_element(ref.begin(), ref.end()));
    }
    CHECK_THROWS_AS(same_rank_forecast(std::vector<double>{3.0, 1.0}, 0.5), InputError);
}

TEST_CASE("same-rank ensemble keeps every member's rank score") {
    const PriceDay day("2024-01-01", {20, 35, 50, 30, 90, 60});
    Eigen::MatrixXd p(3, 6);
    p << 21, 34, 52, 30, 88, 61, 19, 36, 49, 31, 91, 59, 20, 35, 50, 30, 90, 60;
    const ScenarioEnsemble e("2024-01-01", p);
    const ScenarioEnsemble d = same_rank_forecast(e, 1.0);
    const auto a = rank_scores(make_rank_ensemble(e, day));
    const auto b = rank_scores(make_rank_ensemble(d, day), {1, 2});
    CHECK(a.brier == doctest::Approx(b.brier));
    CHECK(a.rps == doctest::Approx(b.rps));
}

TEST_CASE("revenue variance matches Monte Carlo settlement") {
    const TwinSetup t{4.0, 7.0, 0.3, 0.9, 2.0};
    GaussianPriceSpec spec;
    spec.mu = Eigen::Vector2d(40.0, 60.0);
    spec.sigma.resize(2, 2);
    spec.sigma << 16.0, 0.3 * 28.0, 0.3 * 28.0, 49.0;
    const ScenarioEnsemble e = sample_gaussian_prices(spec, 400000, 17);
    BidSchedule sched = BidSchedule::zero(2);
    sched.buy[0] = t.capacity;
    sched.sell[1] = t.capacity;
    std::vector<double> rev;
    for (int i = 0; i < e.members(); ++i) {
        const Eigen::RowVectorXd row = e.paths().row(i);
        rev.push_back(realized_return(sched, std::span<const double>(row.data(), 2), t.efficiency));
    }
    const double eta = t.efficiency;
    const double closed = t.capacity * t.capacity *
                          (16.0 / (eta * eta) + eta * eta * 49.0 - 2.0 * t.rho * t.sigma_b * t.sigma_s);
    CHECK(sample_variance(rev) == doctest::Approx(closed).epsilon(0.01));
    CHECK(revenue_variance_difference(t, 2.0, 7.0, 0.3) ==
          doctest::Approx(t.capacity * t.capacity * ((4.0 - 16.0) / (eta * eta) - 2.0 * 0.3 * (2.0 - 4.0) * 7.0)));
}

TEST_CASE("covariance twin equalizes the revenue variance") {
    const TwinSetup t{5.0, 5.0, 0.4, 0.9, 1.0};
    CHECK(covariance_twin(t, t.sigma_s, t.rho) == doctest::Approx(t.sigma_b));
    Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
        const double s_hat = 5.0 * (0.8 + 0.4 * rng.uniform());
        const double r_hat = -0.5 + rng.uniform();
        const double b_hat = covariance_twin(t, s_hat, r_hat);
        CHECK(std::abs(revenue_variance_difference(t, b_hat, s_hat, r_hat)) < 1e-9);
    }
    const double moved = covariance_twin(t, 1.01 * t.sigma_s, t.rho);
    CHECK(std::abs(moved - t.sigma_b) > 1e-3);
}
