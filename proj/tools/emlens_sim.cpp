// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
//
// CLI experiment runner. Exit codes: 0 success, 2 configuration error,
// 3 numerical failure.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "emlens/emlens.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Uplink massive MIMO experiments with an EM-lens focused array"};

    std::string experiment, config_path, out_path;
    int trials = -1;
    int threads = -1;
    std::uint64_t seed = 0;
    bool seed_set = false, theory_only = false;

    app.add_option("--experiment", experiment,
                   "Experiment id: fig5 | fig6 | fig7-sumrate-vs-K | fig8-smallmimo | "
                   "fig9-selection | custom");
    app.add_option("--config", config_path, "Key = value config file");
    app.add_option("--trials", trials, "Monte-Carlo trials per sweep point");
    app.add_option("--seed", seed, "Master seed")->each([&](const std::string&) { seed_set = true; });
    app.add_option("--out", out_path, "Output CSV path");
    app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
    app.add_flag("--theory-only", theory_only, "Emit only covariance-based theory rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        emlens::ExperimentConfig config;
        if (!config_path.empty()) {
            config = emlens::parse_config_file(config_path);
            if (!experiment.empty()) {
                config.experiment = experiment;  // canonicalized by run_experiment
            }
        } else if (!experiment.empty()) {
            config = emlens::default_config(experiment);
        } else {
            std::cerr << "error: need --experiment and/or --config\n";
            return 2;
        }
        if (trials >= 0) config.trials = trials;
        if (seed_set) config.seed = seed;
        if (!out_path.empty()) config.out = out_path;
        if (threads >= 0) config.threads = threads;
        if (theory_only) config.theory_only = true;
        if (const char* env = std::getenv("EMLENS_THREADS"))
            config.threads = std::atoi(env);

        const auto rows = emlens::run_experiment(config);
        if (config.out.empty())
            std::cout << emlens::to_csv(rows);
        else
            std::cerr << rows.size() << " rows -> " << config.out << "\n";
        return 0;
    } catch (const emlens::invalid_input& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const emlens::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
}
