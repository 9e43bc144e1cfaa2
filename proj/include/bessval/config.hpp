#pragma once

// Experiment configuration: a JSON document describing one command run.
// Every field has a default; `seed` is mandatory.

#include "bessval/core.hpp"
#include "bessval/milp.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bessval {

/// A forecasting model: a built-in forecaster or an ensemble CSV file.
struct ModelSpec {
    std::string name;
    std::string source;  // climatology, naive-bs, perfect-foresight, copula-ind, copula-dep, copula-dwd, file
    std::string path;    // ensemble CSV when source == "file"

    bool operator==(const ModelSpec&) const = default;
};

struct QbtsPanel {
    double mu_b = 50.0;
    double mu_s = 100.0;
    double sigma = 10.0;

    bool operator==(const QbtsPanel&) const = default;
};

struct ExperimentConfig {
    std::string experiment;  // sim-qbts, sim-correlation, backtest, score, cross-score
    std::uint64_t seed = 0;
    int jobs = 0;            // 0 = available parallelism
    std::string output_dir = "out";

    BatteryConfig battery;
    std::vector<RiskSpec> risks{RiskSpec::expected_profit()};
    std::string optimizer = "milp";
    MilpOptions milp;

    std::string prices;      // date,hour,price CSV
    int hours = kDefaultHours;
    std::string start_date;  // first evaluated day (empty = first day with enough history)
    std::string end_date;    // last evaluated day (empty = last day in the file)
    int min_history_days = 28;
    int history_window_days = 0;  // 0 = all earlier days
    int ensemble_size = 500;
    std::vector<ModelSpec> models;

    double var_alpha = 0.9;
    int hac_lags = 0;
    std::vector<int> top_k{1, 2, 4, 8};
    std::vector<double> calibration_levels{0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95};

    std::vector<QbtsPanel> panels{{50.0, 100.0, 10.0}, {90.0, 100.0, 10.0}, {90.0, 100.0, 20.0}};
    std::vector<double> alphas{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45};
    std::vector<double> dispersions{0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0};
    std::vector<double> correlations{0.0, 0.4, 0.8};
    std::string probability_method = "mc";  // mc or analytic
    long mc_draws = 200'000;

    std::string config_dir;  // directory relative paths resolve against; not serialized

    /// Equality of the serialized form (config_dir excluded).
    bool operator==(const ExperimentConfig& o) const;
};

/// Parses a JSON config. Unknown keys, wrong types and invalid values throw
/// InputError. `seed_override` replaces (or supplies) the seed.
ExperimentConfig parse_config(const std::string& json_text, const std::string& config_dir = ".",
                              std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override = std::nullopt);

/// Canonical JSON with every field spelled out (sorted keys, two-space indent).
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a hash of the canonical serialization, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Checks ranges and that every referenced input file exists.
void validate_config(const ExperimentConfig& config);

/// Resolves a config-relative path.
std::string resolve_path(const ExperimentConfig& config, const std::string& path);

}  // namespace bessval
