#include "bessval/commands.hpp"

#include "bessval/io.hpp"
#include "bessval/parallel.hpp"
#include "bessval/qbts.hpp"
#include "bessval/simulate.hpp"
#include "bessval/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>

namespace bessval {

namespace {

std::atomic<int> g_verbosity{0};
std::mutex g_log_mutex;

int jobs_of(const ExperimentConfig& c) { return c.jobs > 0 ? c.jobs : default_jobs(); }

std::uint64_t text_hash(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

CsvWriter& num(CsvWriter& w, double v) { return std::isfinite(v) ? w.cell(v) : w.cell("NA"); }

std::string out_path(const ExperimentConfig& c, const std::string& name) {
    return (std::filesystem::path(c.output_dir) / name).string();
}

void prepare_output(const ExperimentConfig& c) {
    std::error_code ec;
    std::filesystem::create_directories(c.output_dir, ec);
    if (ec) throw InputError("cannot create output directory " + c.output_dir + ": " + ec.message());
}

void write_metadata(const ExperimentConfig& c, std::vector<std::string>& files, nlohmann::json extra = {}) {
    nlohmann::json meta;
    meta["command"] = c.experiment;
    meta["config"] = nlohmann::json::parse(serialize_config(c));
    meta["config_hash"] = config_hash(c);
    meta["outputs"] = files;
    if (!extra.is_null()) meta["details"] = std::move(extra);
    write_text_file(out_path(c, "metadata.json"), meta.dump(2) + "\n");
    files.push_back("metadata.json");
}

std::vector<double> dispersion_grid(const ExperimentConfig& c) {
    std::vector<double> grid = c.dispersions;
    grid.push_back(1.0);  // the perfect forecast is always reported
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

struct SweepRow {
    QbtsPanel panel;
    double rho = 0.0;
    double dispersion = 1.0;
    double alpha = 0.0;
    QbtsProfit profit;
};

// Cells sharing (panel, alpha) reuse one seed, so dispersions and
// correlations are compared on common random numbers.
std::vector<std::string> run_sweep(const ExperimentConfig& c, const std::vector<double>& rhos,
                                   const std::string& file) {
    prepare_output(c);
    const std::vector<double> disp = dispersion_grid(c);
    std::vector<SweepRow> rows;
    std::vector<std::uint64_t> seeds;
    for (std::size_t p = 0; p < c.panels.size(); ++p) {
        for (double rho : rhos) {
            for (std::size_t a = 0; a < c.alphas.size(); ++a) {
                for (double b : disp) {
                    SweepRow r;
                    r.panel = c.panels[p];
                    r.rho = rho;
                    r.dispersion = b;
                    r.alpha = c.alphas[a];
                    rows.push_back(r);
                    seeds.push_back(derive_seed(c.seed, p, a));
                }
            }
        }
    }
    const ProbabilityMethod method =
        c.probability_method == "analytic" ? ProbabilityMethod::AnalyticIndependent : ProbabilityMethod::MonteCarlo;
    log_message(1, "evaluating " + std::to_string(rows.size()) + " grid cells");
    parallel_for(static_cast<long>(rows.size()), jobs_of(c), [&](long i) {
        SweepRow& r = rows[static_cast<std::size_t>(i)];
        const GaussianPriceSpec truth = GaussianPriceSpec::bivariate(r.panel.mu_b, r.panel.mu_s, r.panel.sigma, r.rho);
        const GaussianPriceSpec forecast =
            GaussianPriceSpec::bivariate(r.panel.mu_b, r.panel.mu_s, r.panel.sigma, r.rho, r.dispersion);
        const McSettings mc{c.mc_draws, seeds[static_cast<std::size_t>(i)]};
        r.profit = qbts_expected_profit(truth, forecast, 0, 1, r.alpha, c.battery, method, mc);
    });
    CsvWriter w(out_path(c, file), {"mu_b", "mu_s", "sigma", "rho", "dispersion", "alpha", "ap", "ap_se", "ep",
                                    "expected_profit", "profit_se"});
    for (const auto& r : rows) {
        w.cell(r.panel.mu_b).cell(r.panel.mu_s).cell(r.panel.sigma).cell(r.rho).cell(r.dispersion).cell(r.alpha);
        w.cell(r.profit.ap).cell(r.profit.ap_se);
        num(w, r.profit.ep_defined ? r.profit.ep : std::nan(""));
        w.cell(r.profit.expected_profit).cell(r.profit.profit_se);
        w.end_row();
    }
    w.close();
    std::vector<std::string> files{file};
    write_metadata(c, files);
    return files;
}

std::vector<PriceDay> load_prices(const ExperimentConfig& c) {
    const std::string path = resolve_path(c, c.prices);
    log_message(1, "reading prices from " + path);
    return load_price_csv(path, c.hours);
}

std::string file_label(const RiskSpec& r) { return r.label(); }

void write_backtest_files(const ExperimentConfig& c, const BacktestResult& result, const std::string& label,
                          std::vector<std::string>& files) {
    const std::string results = "results_" + label + ".csv";
    CsvWriter w(out_path(c, results), {"date", "model", "predicted_objective", "realized_return", "n_bids"});
    for (const auto& r : result.records) {
        w.cell(r.date).cell(r.model).cell(r.predicted_objective).cell(r.realized_return).cell(r.schedule.bid_count());
        w.end_row();
    }
    w.close();
    files.push_back(results);

    const std::string schedules = "schedules_" + label + ".csv";
    CsvWriter s(out_path(c, schedules), {"date", "model", "hour", "buy", "sell"});
    for (const auto& r : result.records) {
        for (int h = 0; h < r.schedule.hours(); ++h) {
            const auto i = static_cast<std::size_t>(h);
            if (r.schedule.buy[i] == 0.0 && r.schedule.sell[i] == 0.0) continue;
            s.cell(r.date).cell(r.model).cell(h).cell(r.schedule.buy[i]).cell(r.schedule.sell[i]);
            s.end_row();
        }
    }
    s.close();
    files.push_back(schedules);

    const std::string measures = "measures_" + label + ".csv";
    CsvWriter m(out_path(c, measures),
                {"model", "days", "total_profit", "sharpe", "var_alpha", "var_exceedance", "no_bid_days"});
    for (const auto& e : economic_measures(result, c.var_alpha)) {
        m.cell(e.model).cell(e.days).cell(e.total_profit);
        num(m, e.sharpe_defined ? e.sharpe : std::nan(""));
        m.cell(c.var_alpha).cell(e.var_exceedance).cell(e.no_bid_days);
        m.end_row();
    }
    m.close();
    files.push_back(measures);
}

BacktestSettings settings_of(const ExperimentConfig& c, const RiskSpec& risk) {
    BacktestSettings s;
    s.battery = c.battery;
    s.risk = risk;
    s.optimizer = parse_optimizer(c.optimizer);
    s.milp = c.milp;
    s.jobs = jobs_of(c);
    return s;
}

}  // namespace

void set_verbosity(int level) { g_verbosity = level; }

void log_message(int level, const std::string& text) {
    if (level > g_verbosity) return;
    std::lock_guard<std::mutex> lock(g_log_mutex);
    std::cerr << "bessval: " << text << '\n';
}

std::vector<PriceDay> evaluation_days(const ExperimentConfig& config, const std::vector<PriceDay>& prices) {
    std::vector<PriceDay> out;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        const std::string& d = prices[i].date();
        if (!config.start_date.empty() && d < config.start_date) continue;
        if (!config.end_date.empty() && d > config.end_date) continue;
        if (static_cast<int>(i) < config.min_history_days) continue;
        out.push_back(prices[i]);
    }
    if (out.empty()) throw InputError("no evaluation days: check start_date, end_date and min_history_days");
    return out;
}

std::vector<ModelForecasts> build_forecasts(const ExperimentConfig& config, const std::vector<PriceDay>& prices,
                                            const std::vector<PriceDay>& eval_days) {
    std::vector<ModelForecasts> out;
    std::vector<std::size_t> builtin;
    for (const auto& spec : config.models) {
        ModelForecasts f;
        f.model = spec.name;
        if (spec.source == "file") {
            const std::string path = resolve_path(config, spec.path);
            log_message(1, "reading ensembles of " + spec.name + " from " + path);
            auto all = load_ensemble_csv(path);
            for (const auto& day : eval_days) {
                auto it = all.find(day.date());
                if (it != all.end()) f.days.emplace(day.date(), std::move(it->second));
            }
        } else {
            builtin.push_back(out.size());
        }
        out.push_back(std::move(f));
    }

    std::map<std::string, std::size_t> index_of;
    for (std::size_t i = 0; i < prices.size(); ++i) index_of[prices[i].date()] = i;

    const long n_days = static_cast<long>(eval_days.size());
    const long cells = static_cast<long>(builtin.size()) * n_days;
    std::vector<ScenarioEnsemble> made(static_cast<std::size_t>(cells));
    if (cells > 0) log_message(1, "generating " + std::to_string(cells) + " built-in forecasts");
    parallel_for(cells, jobs_of(config), [&](long cell) {
        const ModelSpec& spec = config.models[builtin[static_cast<std::size_t>(cell / n_days)]];
        const PriceDay& day = eval_days[static_cast<std::size_t>(cell % n_days)];
        const std::size_t pos = index_of.at(day.date());
        std::size_t first = 0;
        if (config.history_window_days > 0) {
            const std::string earliest = shift_date(day.date(), -config.history_window_days);
            while (first < pos && prices[first].date() < earliest) ++first;
        }
        const std::vector<PriceDay> history(prices.begin() + static_cast<long>(first),
                                            prices.begin() + static_cast<long>(pos));
        const std::uint64_t seed = derive_seed(config.seed, text_hash(spec.name), text_hash(day.date()));
        const int m = config.ensemble_size;
        ScenarioEnsemble e;
        if (spec.source == "perfect-foresight") {
            e = degenerate_ensemble(day);
        } else if (spec.source == "climatology") {
            if (history.empty()) throw InputError("climatology forecast for " + day.date() + " has no history");
            e = climatology_forecast(history, m, seed, day.date());
        } else if (spec.source == "naive-bs") {
            e = naive_bootstrap_forecast(history, day.date(), m, seed);
        } else {
            const CopulaKind kind = parse_copula_kind(spec.source.substr(std::string("copula-").size()));
            e = copula_forecast(history, day.date(), kind, m, seed);
        }
        made[static_cast<std::size_t>(cell)] = std::move(e);
    });
    for (std::size_t b = 0; b < builtin.size(); ++b) {
        for (long d = 0; d < n_days; ++d) {
            auto& slot = made[b * static_cast<std::size_t>(n_days) + static_cast<std::size_t>(d)];
            out[builtin[b]].days.emplace(eval_days[static_cast<std::size_t>(d)].date(), std::move(slot));
        }
    }
    return out;
}

std::vector<std::string> cmd_sim_qbts(const ExperimentConfig& config) {
    return run_sweep(config, {0.0}, "qbts_sweep.csv");
}

std::vector<std::string> cmd_sim_correlation(const ExperimentConfig& config) {
    return run_sweep(config, config.correlations, "correlation_sweep.csv");
}

std::vector<std::string> cmd_backtest(const ExperimentConfig& config) {
    prepare_output(config);
    const auto prices = load_prices(config);
    const auto days = evaluation_days(config, prices);
    const auto forecasts = build_forecasts(config, prices, days);
    std::vector<std::string> files;
    for (const auto& risk : config.risks) {
        log_message(1, "backtesting " + std::to_string(days.size()) + " days under " + risk.label());
        const BacktestResult result = run_backtest(forecasts, days, settings_of(config, risk));
        write_backtest_files(config, result, file_label(risk), files);
    }
    write_metadata(config, files);
    return files;
}

std::vector<std::string> cmd_score(const ExperimentConfig& config) {
    prepare_output(config);
    const auto prices = load_prices(config);
    const auto days = evaluation_days(config, prices);
    const auto forecasts = build_forecasts(config, prices, days);
    for (const auto& f : forecasts) {
        for (const auto& day : days) {
            if (!f.days.count(day.date())) throw InputError("model " + f.model + " has no forecast for " + day.date());
        }
    }

    const std::size_t n_models = forecasts.size();
    const std::size_t n_days = days.size();
    std::vector<std::vector<std::pair<std::string, double>>> table(n_models * n_days);
    log_message(1, "scoring " + std::to_string(table.size()) + " forecast days");
    parallel_for(static_cast<long>(table.size()), jobs_of(config), [&](long i) {
        const std::size_t m = static_cast<std::size_t>(i) / n_days;
        const PriceDay& day = days[static_cast<std::size_t>(i) % n_days];
        table[static_cast<std::size_t>(i)] = day_scores(forecasts[m].days.at(day.date()), day, config.top_k);
    });

    std::vector<std::string> files;
    std::vector<std::string> names;
    for (const auto& kv : table.front()) names.push_back(kv.first);
    // series[m][score] over days
    std::vector<std::vector<std::vector<double>>> series(
        n_models, std::vector<std::vector<double>>(names.size(), std::vector<double>(n_days)));
    CsvWriter daily(out_path(config, "daily_scores.csv"), {"date", "model", "score", "value"});
    for (std::size_t m = 0; m < n_models; ++m) {
        for (std::size_t d = 0; d < n_days; ++d) {
            const auto& row = table[m * n_days + d];
            for (std::size_t s = 0; s < names.size(); ++s) {
                series[m][s][d] = row[s].second;
                daily.cell(days[d].date()).cell(forecasts[m].model).cell(names[s]);
                num(daily, row[s].second);
                daily.end_row();
            }
        }
    }
    daily.close();

    bool any_regularized = false;
    CsvWriter summary(out_path(config, "scores.csv"), {"model", "score", "value"});
    for (std::size_t m = 0; m < n_models; ++m) {
        for (std::size_t s = 0; s < names.size(); ++s) {
            const double v = mean(series[m][s]);
            if (names[s] == "DSS_regularized" && v > 0.0) any_regularized = true;
            summary.cell(forecasts[m].model).cell(names[s]);
            num(summary, v);
            summary.end_row();
        }
    }
    summary.close();
    files.insert(files.end(), {"daily_scores.csv", "scores.csv"});

    CsvWriter dm(out_path(config, "dm_tests.csv"),
                 {"score", "model_a", "model_b", "mean_difference", "dm_stat", "dm_p"});
    for (std::size_t s = 0; s < names.size(); ++s) {
        if (names[s] == "DSS_regularized") continue;
        for (std::size_t a = 0; a < n_models; ++a) {
            for (std::size_t b = 0; b < n_models; ++b) {
                if (a == b || n_days < 2) continue;
                const auto& x = series[a][s];
                const auto& y = series[b][s];
                const bool finite = std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }) &&
                                    std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); });
                if (!finite) continue;
                const DmResult r = dm_test(x, y, DmAlternative::FirstBetter, config.hac_lags);
                dm.cell(names[s]).cell(forecasts[a].model).cell(forecasts[b].model).cell(r.mean_difference);
                num(dm, r.degenerate ? std::nan("") : r.statistic);
                num(dm, r.degenerate ? std::nan("") : r.p_value);
                dm.end_row();
            }
        }
    }
    dm.close();
    files.push_back("dm_tests.csv");

    CsvWriter cal(out_path(config, "calibration.csv"), {"model", "level", "observed_frequency", "mc", "count"});
    for (std::size_t m = 0; m < n_models; ++m) {
        std::vector<QuantileForecast> q;
        for (const auto& day : days) q.push_back(ensemble_quantiles(forecasts[m].days.at(day.date()), config.calibration_levels));
        for (const auto& row : marginal_calibration(q, days, config.calibration_levels)) {
            cal.cell(forecasts[m].model).cell(row.level).cell(row.observed_frequency).cell(row.mc).cell(row.count);
            cal.end_row();
        }
    }
    cal.close();
    files.push_back("calibration.csv");

    write_metadata(config, files, {{"dss_regularized", any_regularized}});
    return files;
}

std::vector<std::string> cmd_cross_score(const ExperimentConfig& config) {
    prepare_output(config);
    const auto prices = load_prices(config);
    const auto days = evaluation_days(config, prices);
    const auto forecasts = build_forecasts(config, prices, days);
    std::vector<std::string> files;
    nlohmann::json kinds = nlohmann::json::object();
    for (const auto& risk : config.risks) {
        const std::string label = file_label(risk);
        log_message(1, "cross-scoring " + std::to_string(forecasts.size()) + " models under " + label);
        const BacktestResult result = run_backtest(forecasts, days, settings_of(config, risk));
        write_backtest_files(config, result, label, files);
        const CrossScoreMatrix matrix = cross_score(result, forecasts, config.hac_lags, jobs_of(config));
        kinds[label] = matrix.score;
        const std::string name = "cross_score_" + label + ".csv";
        CsvWriter w(out_path(config, name), {"row_model", "col_model", "score", "dm_stat", "dm_p"});
        for (std::size_t i = 0; i < matrix.models.size(); ++i) {
            for (std::size_t m = 0; m < matrix.models.size(); ++m) {
                const auto ii = static_cast<Eigen::Index>(i);
                const auto mm = static_cast<Eigen::Index>(m);
                w.cell(matrix.models[i]).cell(matrix.models[m]).cell(matrix.mean_scores(ii, mm));
                num(w, matrix.dm_stat(ii, mm));
                num(w, matrix.dm_p(ii, mm));
                w.end_row();
            }
        }
        w.close();
        files.push_back(name);
    }
    write_metadata(config, files, {{"cross_score_kind", kinds}});
    return files;
}

std::vector<std::string> run_experiment(const ExperimentConfig& config) {
    if (config.experiment == "sim-qbts") return cmd_sim_qbts(config);
    if (config.experiment == "sim-correlation") return cmd_sim_correlation(config);
    if (config.experiment == "backtest") return cmd_backtest(config);
    if (config.experiment == "score") return cmd_score(config);
    if (config.experiment == "cross-score") return cmd_cross_score(config);
    throw InputError("unknown experiment " + config.experiment);
}

}  // namespace bessval
