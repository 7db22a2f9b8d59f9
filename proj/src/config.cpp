#include "banditlab/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace banditlab {

namespace {

using nlohmann::ordered_json;

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

const std::set<std::string> kKnownKeys = {
    "family",        "theta_star",      "context_dim",    "context_low",
    "context_high",  "policy",          "clip",           "epsilon",
    "fixed_prob",    "ts_noise_var",    "hodges_exponent", "eval_policy",
    "eval_pilot_reps", "wdec_pilot_reps", "estimators",   "t_grid",
    "n_reps",        "alpha",           "target",         "seed",
    "threads",       "calibration",     "delta_grid",     "output_dir",
    "format",        "full_scale",      "dump_trajectory"};

void validate(const RunConfig& cfg, std::vector<std::string>& problems) {
    auto check = [&](bool ok, const std::string& msg) {
        if (!ok) problems.push_back(msg);
    };
    try {
        family_from_name(cfg.family);
    } catch (const std::exception& e) {
        problems.push_back(e.what());
    }
    try {
        policy_from_name(cfg.policy);
    } catch (const std::exception& e) {
        problems.push_back(e.what());
    }
    try {
        eval_policy_from_name(cfg.eval_policy);
    } catch (const std::exception& e) {
        problems.push_back(e.what());
    }
    for (const std::string& est : cfg.estimators) {
        try {
            estimator_from_name(est);
        } catch (const std::exception& e) {
            problems.push_back(e.what());
        }
    }
    check(cfg.target == "full" || cfg.target == "advantage",
          "target must be 'full' or 'advantage'");
    check(cfg.context_dim >= 0, "context_dim must be >= 0");
    check(static_cast<int>(cfg.theta_star.size()) == 2 * (cfg.context_dim + 1),
          "theta_star must have length 2*(context_dim+1)");
    check(cfg.context_low <= cfg.context_high, "context_low must be <= context_high");
    check(cfg.clip > 0.0 && cfg.clip < 0.5, "clip must lie in (0,0.5)");
    check(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0, "epsilon must lie in [0,1]");
    check(cfg.fixed_prob >= 0.0 && cfg.fixed_prob <= 1.0, "fixed_prob must lie in [0,1]");
    check(cfg.ts_noise_var > 0.0, "ts_noise_var must be positive");
    check(cfg.hodges_exponent > 0.0, "hodges_exponent must be positive");
    check(cfg.eval_pilot_reps >= 100, "eval_pilot_reps must be >= 100");
    check(cfg.wdec_pilot_reps >= 1, "wdec_pilot_reps must be >= 1");
    check(!cfg.estimators.empty(), "estimators must be nonempty");
    check(!cfg.t_grid.empty(), "t_grid must be nonempty");
    check(std::is_sorted(cfg.t_grid.begin(), cfg.t_grid.end()), "t_grid must be sorted ascending");
    for (long t : cfg.t_grid) check(t >= 1, "t_grid entries must be >= 1");
    check(cfg.n_reps >= 2, "n_reps must be >= 2");
    check(cfg.alpha > 0.0 && cfg.alpha < 1.0, "alpha must lie in (0,1)");
    check(cfg.threads >= 0, "threads must be >= 0");
    check(cfg.calibration == "per-t" || cfg.calibration == "pooled",
          "calibration must be 'per-t' or 'pooled'");
    check(cfg.format == "csv" || cfg.format == "json", "format must be 'csv' or 'json'");
    check(!cfg.delta_grid.empty(), "delta_grid must be nonempty");
}

}  // namespace

ValidationError::ValidationError(const std::vector<std::string>& problems_in)
    : std::runtime_error("invalid configuration: " + join(problems_in, "; ")),
      problems(problems_in) {}

RunConfig parse_config_text(const std::string& json_text) {
    return parse_config_text_with_base(json_text, RunConfig{});
}

RunConfig parse_config_text_with_base(const std::string& json_text, RunConfig cfg) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(std::string("config parse error: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("config must be a JSON object");

    std::vector<std::string> problems;
    for (const auto& [key, value] : doc.items()) {
        if (!kKnownKeys.count(key)) {
            problems.push_back("unknown key '" + key + "'");
            continue;
        }
        try {
            if (key == "family") cfg.family = value.get<std::string>();
            else if (key == "theta_star") cfg.theta_star = value.get<Vector>();
            else if (key == "context_dim") cfg.context_dim = value.get<int>();
            else if (key == "context_low") cfg.context_low = value.get<double>();
            else if (key == "context_high") cfg.context_high = value.get<double>();
            else if (key == "policy") cfg.policy = value.get<std::string>();
            else if (key == "clip") cfg.clip = value.get<double>();
            else if (key == "epsilon") cfg.epsilon = value.get<double>();
            else if (key == "fixed_prob") cfg.fixed_prob = value.get<double>();
            else if (key == "ts_noise_var") cfg.ts_noise_var = value.get<double>();
            else if (key == "hodges_exponent") cfg.hodges_exponent = value.get<double>();
            else if (key == "eval_policy") cfg.eval_policy = value.get<std::string>();
            else if (key == "eval_pilot_reps") cfg.eval_pilot_reps = value.get<int>();
            else if (key == "wdec_pilot_reps") cfg.wdec_pilot_reps = value.get<int>();
            else if (key == "estimators") cfg.estimators = value.get<std::vector<std::string>>();
            else if (key == "t_grid") {
                cfg.t_grid = value.get<std::vector<long>>();
                cfg.t_grid_explicit = true;
            } else if (key == "n_reps") {
                cfg.n_reps = value.get<int>();
                cfg.n_reps_explicit = true;
            } else if (key == "alpha") cfg.alpha = value.get<double>();
            else if (key == "target") cfg.target = value.get<std::string>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "threads") cfg.threads = value.get<int>();
            else if (key == "calibration") cfg.calibration = value.get<std::string>();
            else if (key == "delta_grid") cfg.delta_grid = value.get<std::vector<double>>();
            else if (key == "output_dir") cfg.output_dir = value.get<std::string>();
            else if (key == "format") cfg.format = value.get<std::string>();
            else if (key == "full_scale") cfg.full_scale = value.get<bool>();
            else if (key == "dump_trajectory") cfg.dump_trajectory = value.get<bool>();
        } catch (const ordered_json::exception&) {
            problems.push_back("key '" + key + "' has the wrong type");
        }
    }
    if (cfg.full_scale) apply_full_scale(cfg);
    validate(cfg, problems);
    if (!problems.empty()) throw ValidationError(problems);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void apply_full_scale(RunConfig& cfg) {
    cfg.full_scale = true;
    if (!cfg.n_reps_explicit) cfg.n_reps = 5000;
    if (!cfg.t_grid_explicit) cfg.t_grid = {100, 316, 1000, 3162, 10000};
}

std::string config_echo_json(const RunConfig& cfg) {
    ordered_json doc;
    doc["family"] = cfg.family;
    doc["theta_star"] = cfg.theta_star;
    doc["context_dim"] = cfg.context_dim;
    doc["context_low"] = cfg.context_low;
    doc["context_high"] = cfg.context_high;
    doc["policy"] = cfg.policy;
    doc["clip"] = cfg.clip;
    doc["epsilon"] = cfg.epsilon;
    doc["fixed_prob"] = cfg.fixed_prob;
    doc["ts_noise_var"] = cfg.ts_noise_var;
    doc["hodges_exponent"] = cfg.hodges_exponent;
    doc["eval_policy"] = cfg.eval_policy;
    doc["eval_pilot_reps"] = cfg.eval_pilot_reps;
    doc["wdec_pilot_reps"] = cfg.wdec_pilot_reps;
    doc["estimators"] = cfg.estimators;
    doc["t_grid"] = cfg.t_grid;
    doc["n_reps"] = cfg.n_reps;
    doc["alpha"] = cfg.alpha;
    doc["target"] = cfg.target;
    doc["seed"] = cfg.seed;
    doc["threads"] = cfg.threads;
    doc["calibration"] = cfg.calibration;
    doc["delta_grid"] = cfg.delta_grid;
    doc["output_dir"] = cfg.output_dir;
    doc["format"] = cfg.format;
    doc["full_scale"] = cfg.full_scale;
    doc["dump_trajectory"] = cfg.dump_trajectory;
    return doc.dump(2) + "\n";
}

ExperimentSpec to_experiment_spec(const RunConfig& cfg) {
    ExperimentSpec spec;
    spec.env.family.tag = family_from_name(cfg.family);
    spec.env.theta_star = cfg.theta_star;
    spec.env.context_dim = cfg.context_dim;
    spec.env.context_low = cfg.context_low;
    spec.env.context_high = cfg.context_high;
    spec.policy.kind = policy_from_name(cfg.policy);
    spec.policy.clip = cfg.clip;
    spec.policy.epsilon = cfg.epsilon;
    spec.policy.fixed_prob = cfg.fixed_prob;
    spec.policy.ts_noise_var = cfg.ts_noise_var;
    spec.policy.hodges_exponent = cfg.hodges_exponent;
    spec.eval_kind = eval_policy_from_name(cfg.eval_policy);
    spec.eval_pilot_reps = cfg.eval_pilot_reps;
    spec.wdec_pilot_reps = cfg.wdec_pilot_reps;
    spec.estimators.clear();
    for (const std::string& est : cfg.estimators) spec.estimators.push_back(estimator_from_name(est));
    spec.t_grid = cfg.t_grid;
    spec.n_reps = cfg.n_reps;
    spec.alpha = cfg.alpha;
    spec.target = target_from_name(cfg.target);
    spec.master_seed = cfg.seed;
    spec.threads = cfg.threads;
    spec.calibration_scope = cfg.calibration;
    return spec;
}

MabSpec to_mab_spec(const RunConfig& cfg) {
    if (cfg.context_dim != 0 || cfg.theta_star.size() != 2) {
        throw ValidationError({"this experiment needs an intercept-only bandit: "
                               "context_dim 0 and a 2-entry theta_star"});
    }
    MabSpec spec;
    spec.family.tag = family_from_name(cfg.family);
    spec.mu0 = cfg.theta_star[0];
    spec.delta = cfg.theta_star[1];
    spec.policy.kind = policy_from_name(cfg.policy);
    spec.policy.clip = cfg.clip;
    spec.policy.epsilon = cfg.epsilon;
    spec.policy.fixed_prob = cfg.fixed_prob;
    spec.policy.ts_noise_var = cfg.ts_noise_var;
    spec.policy.hodges_exponent = cfg.hodges_exponent;
    spec.T = cfg.t_grid.back();
    spec.n_reps = cfg.n_reps;
    spec.master_seed = cfg.seed;
    spec.threads = cfg.threads;
    return spec;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::string summary_csv(const std::string& experiment, const RunConfig& cfg,
                        const McSummary& summary) {
    std::ostringstream out;
    out << "experiment,family,policy,estimator,region,target,T,alpha,n_reps,coverage,"
           "coverage_se,mean_volume,volume_se,mse,mse_se,calibrated,failures\n";
    for (const McCell& cell : summary) {
        out << experiment << ',' << cfg.family << ',' << cfg.policy << ',' << cell.estimator << ','
            << cell.region << ',' << cell.target << ',' << cell.T << ','
            << format_double(cell.alpha) << ',' << cell.n_reps << ',';
        if (cell.insufficient) {
            out << "nan,nan,nan,nan,nan,nan,FAILED," << cell.failures << '\n';
            continue;
        }
        out << format_double(cell.coverage) << ',' << format_double(cell.coverage_se) << ','
            << format_double(cell.mean_volume) << ',' << format_double(cell.volume_se) << ','
            << format_double(cell.mse) << ',' << format_double(cell.mse_se) << ','
            << (cell.calibrated ? "true" : "false") << ',' << cell.failures << '\n';
    }
    return out.str();
}

std::string summary_json(const std::string& experiment, const RunConfig& cfg,
                         const McSummary& summary) {
    ordered_json rows = ordered_json::array();
    for (const McCell& cell : summary) {
        ordered_json row;
        row["experiment"] = experiment;
        row["family"] = cfg.family;
        row["policy"] = cfg.policy;
        row["estimator"] = cell.estimator;
        row["region"] = cell.region;
        row["target"] = cell.target;
        row["T"] = cell.T;
        row["alpha"] = cell.alpha;
        row["n_reps"] = cell.n_reps;
        if (cell.insufficient) {
            row["status"] = "FAILED";
        } else {
            row["coverage"] = cell.coverage;
            row["coverage_se"] = cell.coverage_se;
            row["mean_volume"] = cell.mean_volume;
            row["volume_se"] = cell.volume_se;
            row["mse"] = cell.mse;
            row["mse_se"] = cell.mse_se;
            row["calibrated"] = cell.calibrated;
        }
        row["failures"] = cell.failures;
        rows.push_back(row);
    }
    ordered_json doc;
    doc["experiment"] = experiment;
    doc["config"] = ordered_json::parse(config_echo_json(cfg));
    doc["summary"] = rows;
    return doc.dump(2) + "\n";
}

int run_summary_command(const std::string& command, const RunConfig& cfg) {
    ExperimentSpec spec = to_experiment_spec(cfg);
    McSummary summary;
    if (cfg.dump_trajectory) {
        // Dump the first replication of each horizon alongside the summary.
        for (long T : spec.t_grid) {
            HorizonContext ctx = make_horizon_context(spec, T);
            RngStream rng(spec.master_seed, derive_stream_id({0x7472616aULL,
                                                              static_cast<std::uint64_t>(T), 0}));
            PolicyState policy(spec.policy, spec.env.xdim());
            Trajectory traj = run_trajectory(spec.env, policy, T, rng);
            std::ostringstream out;
            write_trajectory_csv(traj, out);
            write_file(fs::path(cfg.output_dir) /
                           ("trajectory_T" + std::to_string(T) + "_rep0.csv"),
                       out.str());
        }
    }
    summary = run_experiment(spec);
    write_file(fs::path(cfg.output_dir) / (command + ".csv"), summary_csv(command, cfg, summary));
    if (cfg.format == "json") {
        write_file(fs::path(cfg.output_dir) / (command + ".json"),
                   summary_json(command, cfg, summary));
    }
    return has_insufficient(summary) ? 1 : 0;
}

int run_calibrate(const RunConfig& cfg) {
    ExperimentSpec spec = to_experiment_spec(cfg);
    spec.validate();
    std::ostringstream out;
    out << "estimator,region,target,T,alpha,n_reps,nominal_cutoff,calibrated_cutoff\n";
    bool insufficient = false;
    std::vector<std::vector<RepRecord>> records(spec.t_grid.size());
    for (size_t ti = 0; ti < spec.t_grid.size(); ++ti) {
        HorizonContext ctx = make_horizon_context(spec, spec.t_grid[ti]);
        records[ti].resize(spec.n_reps);
        parallel_for(spec.n_reps, spec.threads,
                     [&](int rep) { records[ti][rep] = run_replication(spec, ctx, rep); });
    }
    for (size_t e = 0; e < spec.estimators.size(); ++e) {
        for (size_t ti = 0; ti < spec.t_grid.size(); ++ti) {
            std::vector<double> stats;
            double nominal = 0.0;
            for (const RepRecord& rec : records[ti]) {
                if (rec.outcomes[e].failed) continue;
                stats.push_back(rec.outcomes[e].statistic);
                nominal += rec.outcomes[e].cutoff;
            }
            out << estimator_name(spec.estimators[e]) << ','
                << (spec.estimators[e] == EstimatorKind::SelfNormalized ? "norm-ball" : "hotelling")
                << ',' << target_name(spec.target) << ',' << spec.t_grid[ti] << ','
                << format_double(spec.alpha) << ',' << stats.size() << ',';
            if (stats.size() < 2) {
                insufficient = true;
                out << "nan,FAILED\n";
                continue;
            }
            nominal /= static_cast<double>(stats.size());
            out << format_double(nominal) << ','
                << format_double(calibrate_cutoff(stats, spec.alpha)) << '\n';
        }
    }
    write_file(fs::path(cfg.output_dir) / "calibrate.csv", out.str());
    return insufficient ? 1 : 0;
}

int run_zstat(const RunConfig& cfg) {
    ZstatResult result = zstat_experiment(to_mab_spec(cfg));
    std::ostringstream zs;
    zs << "method,rep,value\n";
    for (size_t i = 0; i < result.ols.size(); ++i) {
        zs << "ols," << i << ',' << format_double(result.ols[i]) << '\n';
    }
    for (size_t i = 0; i < result.awls.size(); ++i) {
        zs << "aw-ls," << i << ',' << format_double(result.awls[i]) << '\n';
    }
    write_file(fs::path(cfg.output_dir) / "zstat.csv", zs.str());
    std::ostringstream ks;
    ks << "method,ks_distance\n";
    ks << "ols," << format_double(result.ks_ols) << '\n';
    ks << "aw-ls," << format_double(result.ks_awls) << '\n';
    write_file(fs::path(cfg.output_dir) / "ks.csv", ks.str());
    return 0;
}

int run_allocation(const RunConfig& cfg) {
    MabSpec spec = to_mab_spec(cfg);
    AllocationResult result = allocation_experiment(spec);
    std::ostringstream hist;
    hist << "policy,delta,T,n_reps,bin_lo,bin_hi,count\n";
    for (size_t b = 0; b < result.histogram.size(); ++b) {
        hist << cfg.policy << ',' << format_double(spec.delta) << ',' << spec.T << ','
             << result.n_reps << ',' << format_double(b / 50.0) << ','
             << format_double((b + 1) / 50.0) << ',' << result.histogram[b] << '\n';
    }
    write_file(fs::path(cfg.output_dir) / "allocation.csv", hist.str());
    std::ostringstream summ;
    summ << "policy,delta,T,n_reps,mean_allocation,allocation_variance\n";
    summ << cfg.policy << ',' << format_double(spec.delta) << ',' << spec.T << ','
         << result.n_reps << ',' << format_double(result.mean) << ','
         << format_double(result.variance) << '\n';
    write_file(fs::path(cfg.output_dir) / "allocation_summary.csv", summ.str());
    return 0;
}

int run_uniformity(const RunConfig& cfg) {
    MabSpec base = to_mab_spec(cfg);
    std::vector<UniformityCell> cells = uniformity_experiment(
        base, cfg.delta_grid, {PolicyKind::UniformFixed, PolicyKind::TsHodges}, cfg.alpha);
    std::ostringstream out;
    out << "policy,delta,T,alpha,n_reps,coverage,coverage_se\n";
    for (const UniformityCell& cell : cells) {
        out << policy_name(cell.policy) << ',' << format_double(cell.delta) << ',' << base.T << ','
            << format_double(cfg.alpha) << ',' << cell.n_reps << ','
            << format_double(cell.coverage) << ',' << format_double(cell.coverage_se) << '\n';
    }
    write_file(fs::path(cfg.output_dir) / "uniformity.csv", out.str());
    return 0;
}

int run_evalpolicy(const RunConfig& cfg) {
    MabSpec spec = to_mab_spec(cfg);
    EvalPolicy table = estimate_expected_pi(
        EnvConfig{GlmFamily{family_from_name(cfg.family)}, {spec.mu0, spec.delta}, 0},
        spec.policy, spec.T, cfg.eval_pilot_reps, spec.master_seed);
    std::ostringstream tbl;
    write_eval_policy_csv(table, tbl);
    write_file(fs::path(cfg.output_dir) / "pieval_table.csv", tbl.str());
    std::vector<PievalCell> cells = evalpolicy_experiment(spec, cfg.eval_pilot_reps);
    std::ostringstream out;
    out << "eval_policy,arm,T,n_reps,t_mse,t_mse_se,formula_variance,cs_lower_bound\n";
    for (const PievalCell& cell : cells) {
        out << cell.eval_policy << ',' << cell.arm << ',' << spec.T << ',' << spec.n_reps << ','
            << format_double(cell.t_mse) << ',' << format_double(cell.t_mse_se) << ','
            << format_double(cell.formula_variance) << ',' << format_double(cell.lower_bound)
            << '\n';
    }
    write_file(fs::path(cfg.output_dir) / "evalpolicy.csv", out.str());
    return 0;
}

}  // namespace

std::vector<std::string> known_commands() {
    return {"coverage", "mse", "zstat", "allocation", "uniformity", "evalpolicy", "calibrate"};
}

int dispatch(const std::string& command, RunConfig cfg) {
    try {
        fs::create_directories(cfg.output_dir);
        write_file(fs::path(cfg.output_dir) / (command + "_config.json"), config_echo_json(cfg));
        if (command == "coverage" || command == "mse") return run_summary_command(command, cfg);
        if (command == "zstat") return run_zstat(cfg);
        if (command == "allocation") return run_allocation(cfg);
        if (command == "uniformity") return run_uniformity(cfg);
        if (command == "evalpolicy") return run_evalpolicy(cfg);
        if (command == "calibrate") return run_calibrate(cfg);
        std::fprintf(stderr, "unknown command '%s'\n", command.c_str());
        return 2;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }
}

}  // namespace banditlab
