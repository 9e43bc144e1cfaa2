#include "bessval/config.hpp"

#include "bessval/optimize.hpp"
#include "bessval/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace bessval {

using nlohmann::json;

namespace {

const std::set<std::string> kExperiments{"sim-qbts", "sim-correlation", "backtest", "score", "cross-score"};
const std::set<std::string> kSources{"climatology", "naive-bs",   "perfect-foresight", "copula-ind",
                                     "copula-dep",  "copula-dwd", "file"};

// Reads typed fields from a JSON object and rejects keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw InputError(where_ + " must be a JSON object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    template <class T>
    void get(const std::string& key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const json::exception&) {
            throw InputError(where_ + "." + key + " has the wrong type");
        }
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw InputError("unknown config key " + where_ + "." + it.key());
        }
    }

private:
    const json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

json risk_to_json(const RiskSpec& r) {
    if (r.kind == RiskKind::ExpectedProfit) return json{{"kind", "EP"}};
    return json{{"kind", "CVaR"}, {"alpha", r.alpha}};
}

RiskSpec risk_from_json(const json& j) {
    if (j.is_string()) return parse_risk_spec(j.get<std::string>());
    ObjectReader r(j, "risk");
    std::string kind;
    double alpha = 0.0;
    r.get("kind", kind);
    r.get("alpha", alpha);
    r.finish();
    if (kind == "EP") return RiskSpec::expected_profit();
    if (kind == "CVaR") return RiskSpec::cvar(alpha);
    throw InputError("risk kind must be EP or CVaR, got '" + kind + "'");
}

ModelSpec model_from_json(const json& j) {
    ModelSpec m;
    if (j.is_string()) {
        m.name = j.get<std::string>();
        m.source = m.name;
        return m;
    }
    ObjectReader r(j, "models[]");
    r.get("name", m.name);
    r.get("source", m.source);
    r.get("path", m.path);
    r.finish();
    if (m.source.empty()) m.source = m.path.empty() ? m.name : "file";
    return m;
}

json to_json(const ExperimentConfig& c) {
    json models = json::array();
    for (const auto& m : c.models) {
        json o{{"name", m.name}, {"source", m.source}};
        if (!m.path.empty()) o["path"] = m.path;
        models.push_back(o);
    }
    json risks = json::array();
    for (const auto& r : c.risks) risks.push_back(risk_to_json(r));
    json panels = json::array();
    for (const auto& p : c.panels) panels.push_back(json{{"mu_b", p.mu_b}, {"mu_s", p.mu_s}, {"sigma", p.sigma}});
    return json{
        {"experiment", c.experiment},
        {"seed", c.seed},
        {"jobs", c.jobs},
        {"output_dir", c.output_dir},
        {"battery",
         {{"capacity_mwh", c.battery.capacity_mwh},
          {"efficiency", c.battery.efficiency},
          {"power_mw", c.battery.power_mw},
          {"cycles", c.battery.cycles},
          {"max_buy_bids", c.battery.max_buy_bids},
          {"max_sell_bids", c.battery.max_sell_bids}}},
        {"risks", risks},
        {"optimizer", c.optimizer},
        {"milp", {{"mip_gap", c.milp.mip_gap}, {"max_nodes", c.milp.max_nodes}}},
        {"prices", c.prices},
        {"hours", c.hours},
        {"start_date", c.start_date},
        {"end_date", c.end_date},
        {"min_history_days", c.min_history_days},
        {"history_window_days", c.history_window_days},
        {"ensemble_size", c.ensemble_size},
        {"models", models},
        {"var_alpha", c.var_alpha},
        {"hac_lags", c.hac_lags},
        {"top_k", c.top_k},
        {"calibration_levels", c.calibration_levels},
        {"panels", panels},
        {"alphas", c.alphas},
        {"dispersions", c.dispersions},
        {"correlations", c.correlations},
        {"probability_method", c.probability_method},
        {"mc_draws", c.mc_draws},
    };
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return serialize_config(*this) == serialize_config(o);
}

ExperimentConfig parse_config(const std::string& json_text, const std::string& config_dir,
                              std::optional<std::uint64_t> seed_override) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig c;
    c.config_dir = config_dir;
    ObjectReader r(j, "config");
    r.get("experiment", c.experiment);
    if (!kExperiments.count(c.experiment)) {
        throw InputError("config.experiment must be one of sim-qbts, sim-correlation, backtest, score, cross-score");
    }
    if (!r.has("seed") && !seed_override) throw InputError("config.seed is required (or pass --seed)");
    r.get("seed", c.seed);
    if (seed_override) c.seed = *seed_override;
    r.get("jobs", c.jobs);
    r.get("output_dir", c.output_dir);

    const bool simulation = c.experiment == "sim-qbts" || c.experiment == "sim-correlation";
    if (simulation) {
        // Simulation studies default to a 1 MWh, lossless, 1-hour battery.
        c.battery.capacity_mwh = 1.0;
        c.battery.efficiency = 1.0;
        c.battery.power_mw = 1.0;
    }
    if (r.has("battery")) {
        ObjectReader b(r.raw("battery"), "config.battery");
        b.get("capacity_mwh", c.battery.capacity_mwh);
        b.get("efficiency", c.battery.efficiency);
        b.get("power_mw", c.battery.power_mw);
        b.get("cycles", c.battery.cycles);
        b.get("max_buy_bids", c.battery.max_buy_bids);
        b.get("max_sell_bids", c.battery.max_sell_bids);
        b.finish();
    }
    if (r.has("risks")) {
        const json& risks = r.raw("risks");
        if (!risks.is_array() || risks.empty()) throw InputError("config.risks must be a non-empty array");
        c.risks.clear();
        for (const auto& x : risks) c.risks.push_back(risk_from_json(x));
    }
    r.get("optimizer", c.optimizer);
    if (r.has("milp")) {
        ObjectReader m(r.raw("milp"), "config.milp");
        m.get("mip_gap", c.milp.mip_gap);
        m.get("max_nodes", c.milp.max_nodes);
        m.finish();
    }
    r.get("prices", c.prices);
    r.get("hours", c.hours);
    r.get("start_date", c.start_date);
    r.get("end_date", c.end_date);
    r.get("min_history_days", c.min_history_days);
    r.get("history_window_days", c.history_window_days);
    r.get("ensemble_size", c.ensemble_size);
    if (r.has("models")) {
        const json& models = r.raw("models");
        if (!models.is_array()) throw InputError("config.models must be an array");
        for (const auto& x : models) c.models.push_back(model_from_json(x));
    }
    r.get("var_alpha", c.var_alpha);
    r.get("hac_lags", c.hac_lags);
    r.get("top_k", c.top_k);
    r.get("calibration_levels", c.calibration_levels);
    if (r.has("panels")) {
        const json& panels = r.raw("panels");
        if (!panels.is_array()) throw InputError("config.panels must be an array");
        c.panels.clear();
        for (const auto& x : panels) {
            ObjectReader p(x, "config.panels[]");
            QbtsPanel panel;
            p.get("mu_b", panel.mu_b);
            p.get("mu_s", panel.mu_s);
            p.get("sigma", panel.sigma);
            p.finish();
            c.panels.push_back(panel);
        }
    }
    r.get("alphas", c.alphas);
    r.get("dispersions", c.dispersions);
    r.get("correlations", c.correlations);
    r.get("probability_method", c.probability_method);
    r.get("mc_draws", c.mc_draws);
    r.finish();
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string dir = std::filesystem::path(path).parent_path().string();
    if (dir.empty()) dir = ".";
    try {
        return parse_config(buf.str(), dir, seed_override);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

std::string serialize_config(const ExperimentConfig& config) {
    return to_json(config).dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : serialize_config(config)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string resolve_path(const ExperimentConfig& config, const std::string& path) {
    const std::filesystem::path p(path);
    if (p.is_absolute() || config.config_dir.empty()) return path;
    return (std::filesystem::path(config.config_dir) / p).lexically_normal().string();
}

void validate_config(const ExperimentConfig& c) {
    if (c.jobs < 0) throw InputError("config.jobs must be >= 0");
    if (c.output_dir.empty()) throw InputError("config.output_dir must not be empty");
    c.battery.validate();
    if (c.risks.empty()) throw InputError("config.risks must not be empty");
    for (const auto& r : c.risks) r.validate();
    parse_optimizer(c.optimizer);
    if (!(c.milp.mip_gap >= 0.0)) throw InputError("config.milp.mip_gap must be >= 0");
    if (c.milp.max_nodes < 1) throw InputError("config.milp.max_nodes must be >= 1");

    const bool simulation = c.experiment == "sim-qbts" || c.experiment == "sim-correlation";
    if (simulation) {
        if (c.panels.empty() || c.alphas.empty() || c.dispersions.empty()) {
            throw InputError("simulation grids (panels, alphas, dispersions) must not be empty");
        }
        for (const auto& p : c.panels) {
            if (!(p.sigma > 0.0)) {
                throw InputError("panel sigma must be positive: with sigma = 0 every quantile equals the mean, "
                                 "so limit prices and acceptance are undefined");
            }
        }
        for (double a : c.alphas) {
            if (!(a > 0.0 && a < 0.5)) throw InputError("alphas must lie in (0, 0.5)");
        }
        for (double b : c.dispersions) {
            if (!(b > 0.0)) throw InputError("dispersions must be positive");
        }
        if (c.experiment == "sim-correlation") {
            if (c.correlations.empty()) throw InputError("config.correlations must not be empty");
            for (double rho : c.correlations) {
                if (!(rho > -1.0 && rho < 1.0)) throw InputError("correlations must lie in (-1, 1)");
            }
        }
        if (c.probability_method != "mc" && c.probability_method != "analytic") {
            throw InputError("config.probability_method must be mc or analytic");
        }
        if (c.probability_method == "analytic" && c.experiment == "sim-correlation") {
            throw InputError("the analytic acceptance probability needs independent prices; use mc");
        }
        if (c.mc_draws < 100) throw InputError("config.mc_draws must be at least 100");
        return;
    }

    if (c.prices.empty()) throw InputError("config.prices is required for " + c.experiment);
    if (!std::filesystem::exists(resolve_path(c, c.prices))) {
        throw InputError("price file not found: " + resolve_path(c, c.prices));
    }
    if (c.hours < 2) throw InputError("config.hours must be at least 2");
    if (!c.start_date.empty()) check_iso_date(c.start_date);
    if (!c.end_date.empty()) check_iso_date(c.end_date);
    if (c.min_history_days < 0 || c.history_window_days < 0) throw InputError("history lengths must be >= 0");
    if (c.ensemble_size < 2) throw InputError("config.ensemble_size must be at least 2");
    if (c.models.empty()) throw InputError("config.models must list at least one model");
    std::set<std::string> names;
    for (const auto& m : c.models) {
        if (m.name.empty()) throw InputError("every model needs a name");
        if (!names.insert(m.name).second) throw InputError("model " + m.name + " listed twice");
        if (!kSources.count(m.source)) {
            throw InputError("model " + m.name + " has unknown source '" + m.source +
                             "' (expected a built-in forecaster or 'file')");
        }
        if (m.source == "file") {
            if (m.path.empty()) throw InputError("model " + m.name + " needs a path");
            if (!std::filesystem::exists(resolve_path(c, m.path))) {
                throw InputError("ensemble file for model " + m.name + " not found: " + resolve_path(c, m.path));
            }
        }
    }
    if (!(c.var_alpha > 0.0 && c.var_alpha < 1.0)) throw InputError("config.var_alpha must lie in (0, 1)");
    if (c.hac_lags < 0) throw InputError("config.hac_lags must be >= 0");
    for (int k : c.top_k) {
        if (k < 1) throw InputError("config.top_k entries must be >= 1");
    }
    for (double l : c.calibration_levels) {
        if (!(l > 0.0 && l < 1.0)) throw InputError("config.calibration_levels must lie in (0, 1)");
    }
}

}  // namespace bessval
