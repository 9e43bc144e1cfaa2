#include "bessval/commands.hpp"
#include "bessval/config.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <optional>

namespace {

struct Options {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> jobs;
    int verbosity = 0;
    bool summary = false;
    bool print_config = false;
};

int run(const std::string& command, const Options& opt) {
    bessval::set_verbosity(opt.verbosity);
    bessval::ExperimentConfig config = bessval::load_config(opt.config_path, opt.seed);
    if (config.experiment != command) {
        throw bessval::InputError(opt.config_path + " describes a '" + config.experiment +
                                  "' experiment, not '" + command + "'");
    }
    if (opt.out) config.output_dir = *opt.out;
    if (opt.jobs) {
        if (*opt.jobs < 0) throw bessval::InputError("--jobs must be >= 0");
        config.jobs = *opt.jobs;
    }
    if (opt.print_config) {
        std::cout << bessval::serialize_config(config);
        return 0;
    }
    const auto files = bessval::run_experiment(config);
    bessval::log_message(1, "wrote " + std::to_string(files.size()) + " files to " + config.output_dir);
    if (opt.summary) {
        nlohmann::json s{{"command", command}, {"output_dir", config.output_dir}, {"files", files},
                         {"config_hash", bessval::config_hash(config)}};
        std::cout << s.dump() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Battery arbitrage forecast evaluation toolkit"};
    app.require_subcommand(1);
    Options opt;
    const char* commands[][2] = {
        {"sim-qbts", "Quantile trading strategy profits over dispersion and alpha grids"},
        {"sim-correlation", "Quantile trading strategy acceptance under correlated prices"},
        {"backtest", "Optimize and settle battery bids for every model and day"},
        {"score", "Statistical scores, calibration and Diebold-Mariano tests"},
        {"cross-score", "Decision-quality cross-scoring of every model on every model's bids"},
    };
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c[0], c[1]);
        sub->add_option("--config", opt.config_path, "JSON experiment configuration")->required();
        sub->add_option("--seed", opt.seed, "Root seed (overrides the config)");
        sub->add_option("--out", opt.out, "Output directory (overrides the config)");
        sub->add_option("--jobs", opt.jobs, "Worker threads, 0 = available parallelism");
        sub->add_flag("-v,--verbose", opt.verbosity, "More logging on stderr (repeatable)");
        sub->add_flag("--summary", opt.summary, "Print a JSON summary of written files on stdout");
        sub->add_flag("--print-config", opt.print_config, "Print the resolved configuration and exit");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    const std::string command = app.get_subcommands().front()->get_name();
    try {
        return run(command, opt);
    } catch (const bessval::InputError& e) {
        std::cerr << "bessval: error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "bessval: failure: " << e.what() << '\n';
        return 2;
    }
}
