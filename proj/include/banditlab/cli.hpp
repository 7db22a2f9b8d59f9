#pragma once

#include <optional>
#include <string>
#include <vector>

#include "banditlab/harness.hpp"

// Run configuration, JSON parsing/validation, and the experiment dispatcher
// behind the command-line tool. All floating output is serialized with 17
// significant digits and LF line endings so repeated runs are byte-identical.

namespace banditlab {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::vector<std::string>& problems);
    std::vector<std::string> problems;
};

struct RunConfig {
    // Environment.
    std::string family = "t5";
    Vector theta_star = {0.1, 0.1, 0.1, 0.0, 0.0, 0.0};
    int context_dim = 2;
    double context_low = 0.0;
    double context_high = 5.0;
    // Logging policy.
    std::string policy = "ts";
    double clip = 0.01;
    double epsilon = 0.1;
    double fixed_prob = 0.5;
    double ts_noise_var = 1.0;
    double hodges_exponent = 0.17;
    // Evaluation policy and estimators.
    std::string eval_policy = "uniform";
    int eval_pilot_reps = 200;
    int wdec_pilot_reps = 200;
    std::vector<std::string> estimators = {"ols", "aw-ls", "self-norm"};
    // Monte Carlo shape.
    std::vector<long> t_grid = {100, 316, 1000};
    int n_reps = 1000;
    double alpha = 0.1;
    std::string target = "full";
    std::uint64_t seed = 20210406;
    int threads = 0;
    std::string calibration = "per-t";
    // Demonstration knobs.
    std::vector<double> delta_grid = {0.0, 0.001, 0.01, 0.1, 1.0};
    // Output.
    std::string output_dir = ".";
    std::string format = "csv";
    bool full_scale = false;
    bool dump_trajectory = false;

    // Which keys appeared explicitly (full-scale only upgrades defaults).
    bool n_reps_explicit = false;
    bool t_grid_explicit = false;
};

/// Parses and validates a JSON config document. Unknown keys are rejected;
/// every violation is reported at once.
RunConfig parse_config_text(const std::string& json_text);
/// Same, but starting from explicit defaults (used for the seed env var).
RunConfig parse_config_text_with_base(const std::string& json_text, RunConfig base);
RunConfig parse_config_file(const std::string& path);

/// Effective configuration echoed as canonical JSON (parse round-trips).
std::string config_echo_json(const RunConfig& cfg);

/// Applies the full-scale upgrades to any knobs left at their defaults.
void apply_full_scale(RunConfig& cfg);

ExperimentSpec to_experiment_spec(const RunConfig& cfg);
MabSpec to_mab_spec(const RunConfig& cfg);

/// %.17g, locale-independent.
std::string format_double(double v);

/// Runs one subcommand end to end, writing CSV (and a JSON config echo) under
/// cfg.output_dir. Returns 0 on success, 1 when any summary cell had too few
/// usable replications, 2 on configuration errors.
int dispatch(const std::string& command, RunConfig cfg);

std::vector<std::string> known_commands();

}  // namespace banditlab
