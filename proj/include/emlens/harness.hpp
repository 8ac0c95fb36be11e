// SPDX-License-Identifier: Apache-2.0
//
// emlens: uplink massive MIMO simulation with an EM-lens focused antenna array
//
// Experiment runner: config file ingestion, deterministic seeded Monte-Carlo
// campaigns, and CSV emission for the five standard uplink experiments.
#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "emlens/selection.hpp"

namespace emlens {

/// K nominal angles equally spaced over [-coverage, +coverage]; a single
/// user sits at broadside.
inline Vec nominal_aoa_grid(int users, double coverage) {
    if (users < 1) throw invalid_input("nominal_aoa_grid: need at least one user");
    Vec grid(users);
    if (users == 1) {
        grid(0) = 0.0;
        return grid;
    }
    for (int k = 0; k < users; ++k)
        grid(k) = -coverage + 2.0 * coverage * k / (users - 1);
    return grid;
}

/// Peak location sweeping linearly from element half_width to element
/// M-1-half_width (0-based) as the AoA runs over the coverage sector.
inline std::function<double(double)> peak_map_linear(const ArrayGeometry& geom, int half_width) {
    if (2 * half_width >= geom.elements)
        throw invalid_input("peak_map_linear: focus window wider than the array");
    const double lo = geom.position(half_width);
    const double hi = geom.position(geom.elements - 1 - half_width);
    const double coverage = geom.coverage;
    return [lo, hi, coverage](double theta) {
        return lo + (theta + coverage) / (2.0 * coverage) * (hi - lo);
    };
}

struct ExperimentConfig {
    std::string experiment;
    int elements = 50;
    int users = 1;
    double spacing = 1.0;                  // d / lambda
    double coverage = kPi / 3.0;           // Theta
    double sigma_phi = deg_to_rad(10.0);
    double gain = 1.0;                     // beta
    int lens_half_width = 2;               // Delta
    double lens_spread_d2 = 0.5;           // V in units of d^2
    std::vector<double> sweep;
    int trials = 2000;
    std::uint64_t seed = 1;
    std::string out;
    double rho_d_db = 0.0;
    double rho_tr_db = 10.0;               // fixed training SNR where it is not the sweep axis
    double aoa_deg = 0.0;                  // fig5 user angle
    int groups = 10;                       // fig8 partition size
    int threads = 0;                       // 0 = hardware concurrency
    bool theory_only = false;

    double lens_spread() const { return lens_spread_d2 * spacing * spacing; }
    ArrayGeometry geometry() const { return {elements, spacing, coverage}; }
    LensProfile lens() const {
        return {lens_half_width, lens_spread(), peak_map_linear(geometry(), lens_half_width)};
    }
};

namespace detail {

inline bool is_known_experiment(const std::string& id) {
    return id == "fig5" || id == "fig6" || id == "fig7-sumrate-vs-K" || id == "fig8-smallmimo" ||
           id == "fig9-selection" || id == "custom";
}

inline std::string canonical_experiment(std::string id) {
    if (id == "fig7") id = "fig7-sumrate-vs-K";
    if (id == "fig8") id = "fig8-smallmimo";
    if (id == "fig9") id = "fig9-selection";
    if (!is_known_experiment(id)) throw invalid_input("unknown experiment id: " + id);
    return id;
}

inline void apply_experiment_defaults(ExperimentConfig& config) {
    const std::vector<double> rho_tr_grid{-10, -5, 0, 5, 10, 15, 20};
    if (config.experiment == "fig5") {
        config.users = 1;
        if (config.sweep.empty()) config.sweep = rho_tr_grid;
    } else if (config.experiment == "fig6" || config.experiment == "custom") {
        if (config.experiment == "fig6") config.users = 20;
        if (config.sweep.empty()) config.sweep = rho_tr_grid;
    } else if (config.experiment == "fig7-sumrate-vs-K") {
        if (config.sweep.empty()) config.sweep = {1, 5, 10, 20, 30, 40, 50};
    } else if (config.experiment == "fig8-smallmimo") {
        config.users = 20;
        if (config.sweep.empty()) config.sweep = rho_tr_grid;
    } else if (config.experiment == "fig9-selection") {
        config.users = 10;
        if (config.sweep.empty()) config.sweep = {5, 10, 15, 20, 25, 30, 40, 50};
    }
}

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<double> parse_number_list(const std::string& text) {
    std::string normalized = text;
    std::replace(normalized.begin(), normalized.end(), ',', ' ');
    std::istringstream in(normalized);
    std::vector<double> values;
    double v;
    while (in >> v) values.push_back(v);
    if (!in.eof()) throw invalid_input("config: malformed number list: " + text);
    return values;
}

inline bool parse_bool(const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw invalid_input("config: malformed boolean: " + text);
}

}  // namespace detail

/// Baseline configuration for a named experiment: 50-element array, pi/3
/// sector, 10-degree spread, unit gain, 2000 trials.
inline ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig config;
    config.experiment = detail::canonical_experiment(experiment);
    detail::apply_experiment_defaults(config);
    return config;
}

/// Parses a flat key = value config file. Unknown keys are rejected so typos
/// do not silently fall back to defaults.
inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_input("config: cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw invalid_input("config: expected key = value: " + line);
        kv[detail::trim(line.substr(0, eq))] = detail::trim(line.substr(eq + 1));
    }

    ExperimentConfig config;
    auto it = kv.find("experiment");
    if (it == kv.end()) throw invalid_input("config: missing experiment id");
    config.experiment = detail::canonical_experiment(it->second);
    detail::apply_experiment_defaults(config);

    for (const auto& [key, value] : kv) {
        if (key == "experiment") continue;
        if (key == "elements") config.elements = std::stoi(value);
        else if (key == "users") config.users = std::stoi(value);
        else if (key == "spacing") config.spacing = std::stod(value);
        else if (key == "coverage_deg") config.coverage = deg_to_rad(std::stod(value));
        else if (key == "sigma_phi_deg") config.sigma_phi = deg_to_rad(std::stod(value));
        else if (key == "gain") config.gain = std::stod(value);
        else if (key == "lens_half_width") config.lens_half_width = std::stoi(value);
        else if (key == "lens_spread_d2") config.lens_spread_d2 = std::stod(value);
        else if (key == "sweep") config.sweep = detail::parse_number_list(value);
        else if (key == "trials") config.trials = std::stoi(value);
        else if (key == "seed") config.seed = std::stoull(value);
        else if (key == "out") config.out = value;
        else if (key == "rho_d_db") config.rho_d_db = std::stod(value);
        else if (key == "rho_tr_db") config.rho_tr_db = std::stod(value);
        else if (key == "aoa_deg") config.aoa_deg = std::stod(value);
        else if (key == "groups") config.groups = std::stoi(value);
        else if (key == "threads") config.threads = std::stoi(value);
        else if (key == "theory_only") config.theory_only = detail::parse_bool(value);
        else throw invalid_input("config: unknown key: " + key);
    }
    if (config.sweep.empty()) throw invalid_input("config: sweep must be nonempty");
    if (config.trials < 1) throw invalid_input("config: trials must be >= 1");
    return config;
}

/// One output record: metric value for a (sweep point, user) cell of one
/// experiment branch.
struct ResultRow {
    std::string experiment;  // branch-qualified, e.g. "fig5.lens"
    double sweep = 0.0;
    std::string user;        // "1".."K", "sum", or "median"
    std::string metric;      // avg_snr_db | theory_snr_db | bound_snr_db | sum_rate | surrogate_rate
    double value = 0.0;
    double std_err = 0.0;
    int trials = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string csv_header() {
    return "experiment,sweep,user,metric,value,std_err,trials,seed";
}

inline std::string to_csv(std::span<const ResultRow> rows) {
    std::string text = csv_header() + "\n";
    for (const auto& row : rows) {
        text += row.experiment + ',' + detail::format_double(row.sweep) + ',' + row.user + ',' +
                row.metric + ',' + detail::format_double(row.value) + ',' +
                detail::format_double(row.std_err) + ',' + std::to_string(row.trials) + ',' +
                std::to_string(row.seed) + '\n';
    }
    return text;
}

inline std::vector<ResultRow> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != csv_header())
        throw invalid_input("csv: missing or malformed header row");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 8) throw invalid_input("csv: expected 8 fields: " + line);
        ResultRow row;
        row.experiment = fields[0];
        row.sweep = std::strtod(fields[1].c_str(), nullptr);
        row.user = fields[2];
        row.metric = fields[3];
        row.value = std::strtod(fields[4].c_str(), nullptr);
        row.std_err = std::strtod(fields[5].c_str(), nullptr);
        row.trials = std::stoi(fields[6]);
        row.seed = std::stoull(fields[7]);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_csv_file(const std::string& path, std::span<const ResultRow> rows) {
    std::ofstream out(path, std::ios::binary);  // LF line endings on every platform
    if (!out) throw invalid_input("cannot open output path: " + path);
    out << to_csv(rows);
    if (!out) throw invalid_input("failed writing output path: " + path);
}

namespace detail {

inline double se_to_db(double mean, double se) {
    return mean > 0.0 ? 10.0 / std::log(10.0) * se / mean : 0.0;
}

inline ResultRow snr_row(std::string experiment, double sweep, std::string user,
                         std::string metric, double mean, double se, int trials,
                         std::uint64_t seed) {
    return {std::move(experiment), sweep,  std::move(user), std::move(metric),
            linear_to_db(mean),    se_to_db(mean, se), trials, seed};
}

/// Index of the user attaining the (lower) median of `values`.
inline int median_user(const Vec& values) {
    std::vector<int> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return values(i) < values(j); });
    return order[(order.size() - 1) / 2];
}

inline std::vector<UserProfile> grid_users(const ExperimentConfig& config) {
    const Vec aoas = nominal_aoa_grid(config.users, config.coverage);
    std::vector<UserProfile> users;
    users.reserve(config.users);
    for (int k = 0; k < config.users; ++k)
        users.emplace_back(config.gain, aoas(k), config.sigma_phi);
    return users;
}

// fig5: single-user average SNR vs training SNR, exact theory alongside.
inline void run_single_user_sweep(const ExperimentConfig& config, std::vector<ResultRow>& rows) {
    const ArrayGeometry geom = config.geometry();
    const LensProfile lens = config.lens();
    const double rho_d = db_to_linear(config.rho_d_db);
    const UserProfile user(config.gain, deg_to_rad(config.aoa_deg), config.sigma_phi);
    const std::string id = config.experiment;

    for (double rho_tr_db : config.sweep) {
        const double rho_tr = db_to_linear(rho_tr_db);
        const Scenario scenario{geom, {user}, lens, rho_tr, rho_d};
        const int trials = config.theory_only ? 0 : config.trials;
        const LensGainReport report =
            compare_with_without_lens(scenario, trials, config.seed, config.threads);
        rows.push_back(snr_row(id + ".lens", rho_tr_db, "1", "theory_snr_db",
                               report.bound_with(0), 0.0, 0, config.seed));
        rows.push_back(snr_row(id + ".nolens", rho_tr_db, "1", "theory_snr_db",
                               report.bound_without(0), 0.0, 0, config.seed));
        if (trials > 0) {
            rows.push_back(snr_row(id + ".lens", rho_tr_db, "1", "avg_snr_db", report.mc_with(0),
                                   report.se_with(0), trials, config.seed));
            rows.push_back(snr_row(id + ".nolens", rho_tr_db, "1", "avg_snr_db",
                                   report.mc_without(0), report.se_without(0), trials,
                                   config.seed));
        }
    }
}

// fig6/custom: per-user average SNR and its covariance-only bound vs
// training SNR for a fixed AoA grid.
inline void run_multiuser_sweep(const ExperimentConfig& config, std::vector<ResultRow>& rows) {
    const ArrayGeometry geom = config.geometry();
    const LensProfile lens = config.lens();
    const double rho_d = db_to_linear(config.rho_d_db);
    const std::vector<UserProfile> users = grid_users(config);
    const std::string id = config.experiment;

    for (double rho_tr_db : config.sweep) {
        const double rho_tr = db_to_linear(rho_tr_db);
        const Scenario scenario{geom, users, lens, rho_tr, rho_d};
        const int trials = config.theory_only ? 0 : config.trials;
        const LensGainReport report =
            compare_with_without_lens(scenario, trials, config.seed, config.threads);

        for (int k = 0; k < config.users; ++k) {
            const std::string user_id = std::to_string(k + 1);
            rows.push_back(snr_row(id + ".lens", rho_tr_db, user_id, "bound_snr_db",
                                   report.bound_with(k), 0.0, 0, config.seed));
            rows.push_back(snr_row(id + ".nolens", rho_tr_db, user_id, "bound_snr_db",
                                   report.bound_without(k), 0.0, 0, config.seed));
            if (trials > 0) {
                rows.push_back(snr_row(id + ".lens", rho_tr_db, user_id, "avg_snr_db",
                                       report.mc_with(k), report.se_with(k), trials, config.seed));
                rows.push_back(snr_row(id + ".nolens", rho_tr_db, user_id, "avg_snr_db",
                                       report.mc_without(k), report.se_without(k), trials,
                                       config.seed));
            }
        }
        const int med_bound_l = median_user(report.bound_with);
        const int med_bound_n = median_user(report.bound_without);
        rows.push_back(snr_row(id + ".lens", rho_tr_db, "median", "bound_snr_db",
                               report.bound_with(med_bound_l), 0.0, 0, config.seed));
        rows.push_back(snr_row(id + ".nolens", rho_tr_db, "median", "bound_snr_db",
                               report.bound_without(med_bound_n), 0.0, 0, config.seed));
        if (trials > 0) {
            const int med_l = median_user(report.mc_with);
            const int med_n = median_user(report.mc_without);
            rows.push_back(snr_row(id + ".lens", rho_tr_db, "median", "avg_snr_db",
                                   report.mc_with(med_l), report.se_with(med_l), trials,
                                   config.seed));
            rows.push_back(snr_row(id + ".nolens", rho_tr_db, "median", "avg_snr_db",
                                   report.mc_without(med_n), report.se_without(med_n), trials,
                                   config.seed));
        }
    }
}

// fig7: achievable sum rate vs user count, nominal AoAs redrawn uniformly
// every realization.
inline void run_sum_rate_vs_users(const ExperimentConfig& config, std::vector<ResultRow>& rows) {
    if (config.theory_only) return;  // rate curves here are Monte-Carlo only
    const ArrayGeometry geom = config.geometry();
    const LensProfile lens = config.lens();
    const double rho_d = db_to_linear(config.rho_d_db);
    const double rho_tr = db_to_linear(config.rho_tr_db);
    const std::string id = config.experiment;

    for (double sweep_users : config.sweep) {
        const int k_users = static_cast<int>(sweep_users);
        if (k_users < 1 || std::abs(sweep_users - k_users) > 0.0)
            throw invalid_input("fig7: user-count sweep values must be positive integers");

        auto body = [&](int, RngStream& rng) {
            std::vector<UserProfile> users;
            users.reserve(k_users);
            for (int k = 0; k < k_users; ++k) {
                const double theta = geom.coverage * (2.0 * rng.uniform() - 1.0);
                users.emplace_back(config.gain, theta, config.sigma_phi);
            }
            const SystemModel with = build_system_model(geom, users, &lens, rho_tr);
            const SystemModel without = build_system_model(geom, users, nullptr, rho_tr);
            Vec row(2);
            row.setZero();
            std::vector<CVec> est_with(k_users), est_without(k_users);
            for (int u = 0; u < k_users; ++u) {
                const CVec white = rng.cnormal_vec(geom.elements);
                const CVec noise = rng.cnormal_vec(geom.elements) / std::sqrt(rho_tr);
                est_with[u] = with.estimators[u].estimate(with.factors[u].apply(white) + noise);
                est_without[u] =
                    without.estimators[u].estimate(without.factors[u].apply(white) + noise);
            }
            const Vec g_with = all_user_snrs(est_with, with.err_cov_sum, rho_d);
            const Vec g_without = all_user_snrs(est_without, without.err_cov_sum, rho_d);
            for (int u = 0; u < k_users; ++u) {
                row(0) += std::log2(1.0 + g_with(u));
                row(1) += std::log2(1.0 + g_without(u));
            }
            return row;
        };
        const MonteCarloStats stats =
            monte_carlo(config.trials, 2, config.seed, config.threads, body);
        rows.push_back({id + ".lens", sweep_users, "sum", "sum_rate", stats.mean(0),
                        stats.std_err(0), config.trials, config.seed});
        rows.push_back({id + ".nolens", sweep_users, "sum", "sum_rate", stats.mean(1),
                        stats.std_err(1), config.trials, config.seed});
    }
}

// fig8: full-scale MMSE vs grouped small-MIMO sum rate over the training SNR
// sweep.
inline void run_small_mimo_sweep(const ExperimentConfig& config, std::vector<ResultRow>& rows) {
    if (config.theory_only) return;
    const ArrayGeometry geom = config.geometry();
    const LensProfile lens = config.lens();
    const double rho_d = db_to_linear(config.rho_d_db);
    const std::vector<UserProfile> users = grid_users(config);
    const GroupPartition partition = partition_contiguous(config.elements, config.groups);
    const std::string id = config.experiment;

    for (double rho_tr_db : config.sweep) {
        const double rho_tr = db_to_linear(rho_tr_db);
        const SystemModel with = build_system_model(geom, users, &lens, rho_tr);
        const SystemModel without = build_system_model(geom, users, nullptr, rho_tr);

        auto body = [&](int, RngStream& rng) {
            TrialDraw draw_with, draw_without;
            for (int u = 0; u < config.users; ++u) {
                const CVec white = rng.cnormal_vec(geom.elements);
                const CVec noise = rng.cnormal_vec(geom.elements) / std::sqrt(rho_tr);
                draw_with.estimates.push_back(
                    with.estimators[u].estimate(with.factors[u].apply(white) + noise));
                draw_without.estimates.push_back(
                    without.estimators[u].estimate(without.factors[u].apply(white) + noise));
            }
            const Vec full_with = trial_snrs(with, draw_with, rho_d);
            const Vec full_without = trial_snrs(without, draw_without, rho_d);
            const Vec small_with = trial_snrs_grouped(with, draw_with, rho_d, partition);
            const Vec small_without = trial_snrs_grouped(without, draw_without, rho_d, partition);
            Vec row(4);
            row.setZero();
            for (int u = 0; u < config.users; ++u) {
                row(0) += std::log2(1.0 + full_with(u));
                row(1) += std::log2(1.0 + small_with(u));
                row(2) += std::log2(1.0 + full_without(u));
                row(3) += std::log2(1.0 + small_without(u));
            }
            return row;
        };
        const MonteCarloStats stats =
            monte_carlo(config.trials, 4, config.seed, config.threads, body);
        const char* branch[4] = {".lens.full", ".lens.small", ".nolens.full", ".nolens.small"};
        for (int i = 0; i < 4; ++i)
            rows.push_back({id + branch[i], rho_tr_db, "sum", "sum_rate", stats.mean(i),
                            stats.std_err(i), config.trials, config.seed});
    }
}

// fig9: covariance-based (greedy) and instantaneous-CSI antenna selection
// sum rates vs the number of active antennas.
inline void run_selection_sweep(const ExperimentConfig& config, std::vector<ResultRow>& rows) {
    const ArrayGeometry geom = config.geometry();
    const LensProfile lens = config.lens();
    const double rho_d = db_to_linear(config.rho_d_db);
    const double rho_tr = db_to_linear(config.rho_tr_db);
    const std::vector<UserProfile> users = grid_users(config);
    const std::string id = config.experiment;

    std::vector<int> counts;
    for (double v : config.sweep) {
        const int n = static_cast<int>(v);
        if (n < 1 || n > config.elements || std::abs(v - n) > 0.0)
            throw invalid_input("fig9: antenna-count sweep values must be integers in [1, M]");
        counts.push_back(n);
    }
    const int max_count = *std::max_element(counts.begin(), counts.end());

    const SystemModel with = build_system_model(geom, users, &lens, rho_tr);
    const SystemModel without = build_system_model(geom, users, nullptr, rho_tr);
    const SnrBoundInputs inputs_with{with.covs, rho_tr, rho_d};
    const SnrBoundInputs inputs_without{without.covs, rho_tr, rho_d};

    const SelectionResult greedy_with = greedy_select(inputs_with, max_count);
    const SelectionResult greedy_without = greedy_select(inputs_without, max_count);

    for (int n : counts) {
        rows.push_back({id + ".lens.cov", static_cast<double>(n), "sum", "surrogate_rate",
                        greedy_with.surrogate_rate[n - 1], 0.0, 0, config.seed});
        rows.push_back({id + ".nolens.cov", static_cast<double>(n), "sum", "surrogate_rate",
                        greedy_without.surrogate_rate[n - 1], 0.0, 0, config.seed});
    }
    if (config.theory_only) return;

    // Monte-Carlo rate of the covariance-chosen subarrays: antennas outside
    // the subset are never trained, so each prefix gets its own submodel.
    for (int n : counts) {
        for (const bool lensed : {true, false}) {
            const SystemModel& model = lensed ? with : without;
            const SelectionResult& greedy = lensed ? greedy_with : greedy_without;
            std::vector<int> subset(greedy.chosen.begin(), greedy.chosen.begin() + n);
            std::sort(subset.begin(), subset.end());
            std::vector<Covariance> sub_covs;
            sub_covs.reserve(model.covs.size());
            for (const auto& cov : model.covs) sub_covs.push_back(cov.submatrix(subset));
            const SystemModel submodel = model_from_covariances(std::move(sub_covs), rho_tr);

            auto body = [&](int, RngStream& rng) {
                const TrialDraw draw = draw_trial(submodel, rho_tr, rng);
                const Vec gammas = trial_snrs(submodel, draw, rho_d);
                Vec row(1);
                row(0) = 0.0;
                for (int u = 0; u < submodel.users(); ++u) row(0) += std::log2(1.0 + gammas(u));
                return row;
            };
            const MonteCarloStats stats =
                monte_carlo(config.trials, 1, config.seed, config.threads, body);
            rows.push_back({id + (lensed ? ".lens.cov" : ".nolens.cov"), static_cast<double>(n),
                            "sum", "sum_rate", stats.mean(0), stats.std_err(0), config.trials,
                            config.seed});
        }
    }

    // Instantaneous-CSI benchmark: reselect per realization from full-array
    // estimates; greedy prefixes give every sweep point in one pass.
    auto body = [&](int, RngStream& rng) {
        Vec row(2 * counts.size());
        for (const bool lensed : {true, false}) {
            const SystemModel& model = lensed ? with : without;
            const TrialDraw draw = draw_trial(model, rho_tr, rng);
            const SelectionResult picks = instantaneous_csi_select(
                draw.estimates, model.err_covs, rho_d, max_count);
            for (std::size_t i = 0; i < counts.size(); ++i) {
                std::vector<int> subset(picks.chosen.begin(), picks.chosen.begin() + counts[i]);
                row((lensed ? 0 : counts.size()) + i) = subset_instantaneous_sum_rate(
                    draw.estimates, model.err_covs, rho_d, subset);
            }
        }
        return row;
    };
    const MonteCarloStats stats = monte_carlo(
        config.trials, static_cast<int>(2 * counts.size()), config.seed, config.threads, body);
    for (std::size_t i = 0; i < counts.size(); ++i) {
        rows.push_back({id + ".lens.inst", static_cast<double>(counts[i]), "sum", "sum_rate",
                        stats.mean(i), stats.std_err(i), config.trials, config.seed});
        rows.push_back({id + ".nolens.inst", static_cast<double>(counts[i]), "sum", "sum_rate",
                        stats.mean(counts.size() + i), stats.std_err(counts.size() + i),
                        config.trials, config.seed});
    }
}

}  // namespace detail

/// Runs the configured experiment and returns its rows; also writes them as
/// CSV when an output path is set. Deterministic for a fixed seed regardless
/// of thread count.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
    ExperimentConfig cfg = config;
    cfg.experiment = detail::canonical_experiment(cfg.experiment);
    if (cfg.sweep.empty()) throw invalid_input("run_experiment: sweep must be nonempty");
    if (cfg.trials < 1) throw invalid_input("run_experiment: trials must be >= 1");

    std::vector<ResultRow> rows;
    if (cfg.experiment == "fig5")
        detail::run_single_user_sweep(cfg, rows);
    else if (cfg.experiment == "fig6" || cfg.experiment == "custom")
        detail::run_multiuser_sweep(cfg, rows);
    else if (cfg.experiment == "fig7-sumrate-vs-K")
        detail::run_sum_rate_vs_users(cfg, rows);
    else if (cfg.experiment == "fig8-smallmimo")
        detail::run_small_mimo_sweep(cfg, rows);
    else if (cfg.experiment == "fig9-selection")
        detail::run_selection_sweep(cfg, rows);

    if (!cfg.out.empty()) write_csv_file(cfg.out, rows);
    return rows;
}

}  // namespace emlens
