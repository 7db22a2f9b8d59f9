#include "banditlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <thread>

namespace banditlab {

namespace {

constexpr std::uint64_t kTrajectoryTag = 0x7472616aULL;  // "traj"
constexpr std::uint64_t kWdecPilotTag = 0x77646563ULL;   // "wdec"
constexpr std::uint64_t kZstatTag = 0x7a737461ULL;       // "zsta"
constexpr std::uint64_t kAllocTag = 0x616c6c6fULL;       // "allo"
constexpr std::uint64_t kUniformityTag = 0x756e6966ULL;  // "unif"
constexpr std::uint64_t kPievalTag = 0x70696576ULL;      // "piev"

std::vector<DesignRow> contextual_rows(const Trajectory& traj, const EvalPolicy& eval,
                                       bool weighted) {
    const int k = static_cast<int>(traj.contexts.front().size());
    std::vector<DesignRow> rows(traj.T);
    for (long t = 0; t < traj.T; ++t) {
        DesignRow& row = rows[t];
        row.z.assign(2 * k, 0.0);
        for (int i = 0; i < k; ++i) {
            row.z[i] = traj.contexts[t][i];
            if (traj.actions[t] == 1) row.z[k + i] = traj.contexts[t][i];
        }
        row.prob_logged = traj.prob_logged(t);
        row.w = weighted
                    ? sqrt_importance_weight(eval_prob(eval, t + 1, traj.actions[t]), row.prob_logged)
                    : 1.0;
        row.reward = traj.rewards_raw[t];
    }
    return rows;
}

enum class MabWeight { Unit, SqrtImportance, InverseSqrtPropensity };

std::vector<DesignRow> arm_indicator_rows(const Trajectory& traj, const EvalPolicy& eval,
                                          MabWeight weight) {
    std::vector<DesignRow> rows(traj.T);
    for (long t = 0; t < traj.T; ++t) {
        DesignRow& row = rows[t];
        row.z = traj.actions[t] == 1 ? Vector{0.0, 1.0} : Vector{1.0, 0.0};
        row.prob_logged = traj.prob_logged(t);
        switch (weight) {
            case MabWeight::Unit: row.w = 1.0; break;
            case MabWeight::SqrtImportance:
                row.w = sqrt_importance_weight(eval_prob(eval, t + 1, traj.actions[t]),
                                               row.prob_logged);
                break;
            case MabWeight::InverseSqrtPropensity: row.w = 1.0 / std::sqrt(row.prob_logged); break;
        }
        row.reward = traj.rewards_raw[t];
    }
    return rows;
}

Vector tail(const Vector& v, int p) {
    return Vector(v.end() - p, v.end());
}

double sq_distance(const Vector& a, const Vector& b) {
    return norm2_squared(a - b);
}

/// Fills the membership/volume fields of an outcome from a finished region.
void finish_outcome(RegionOutcome& out, const Ellipsoid& region, const Vector& truth,
                    const Vector& point_estimate) {
    out.dim = static_cast<int>(region.center.size());
    out.statistic = ellipsoid_statistic(region, truth);
    out.cutoff = region.cutoff;
    Ellipsoid unit{region.center, region.shape, 1.0};
    out.base_volume = ellipsoid_volume(unit);
    out.covered = out.statistic <= out.cutoff;
    out.sq_error = sq_distance(point_estimate, truth);
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

double se_of_mean(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double s = 0.0;
    for (double x : xs) s += (x - mean) * (x - mean);
    double var = s / static_cast<double>(xs.size() - 1);
    return std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace

std::string estimator_name(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::Ols: return "ols";
        case EstimatorKind::AwLs: return "aw-ls";
        case EstimatorKind::Mle: return "mle";
        case EstimatorKind::AwMle: return "aw-mle";
        case EstimatorKind::WDecorrelated: return "w-dec";
        case EstimatorKind::SelfNormalized: return "self-norm";
    }
    throw std::logic_error("estimator_name: bad kind");
}

EstimatorKind estimator_from_name(const std::string& name) {
    if (name == "ols") return EstimatorKind::Ols;
    if (name == "aw-ls") return EstimatorKind::AwLs;
    if (name == "mle") return EstimatorKind::Mle;
    if (name == "aw-mle") return EstimatorKind::AwMle;
    if (name == "w-dec") return EstimatorKind::WDecorrelated;
    if (name == "self-norm") return EstimatorKind::SelfNormalized;
    throw std::invalid_argument("unknown estimator: " + name);
}

std::string target_name(Target t) {
    return t == Target::FullTheta ? "full" : "advantage";
}

Target target_from_name(const std::string& name) {
    if (name == "full") return Target::FullTheta;
    if (name == "advantage") return Target::AdvantageOnly;
    throw std::invalid_argument("unknown target: " + name);
}

void ExperimentSpec::validate() const {
    env.validate();
    policy.validate();
    if (n_reps < 2) throw std::invalid_argument("n_reps must be >= 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (t_grid.empty()) throw std::invalid_argument("t_grid must be nonempty");
    if (!std::is_sorted(t_grid.begin(), t_grid.end())) {
        throw std::invalid_argument("t_grid must be sorted ascending");
    }
    if (estimators.empty()) throw std::invalid_argument("estimators must be nonempty");
    if (calibration_scope != "per-t" && calibration_scope != "pooled") {
        throw std::invalid_argument("calibration_scope must be per-t or pooled");
    }
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

HorizonContext make_horizon_context(const ExperimentSpec& spec, long T) {
    HorizonContext ctx;
    ctx.T = T;
    if (spec.eval_kind == EvalPolicy::Kind::ExpectedPi) {
        ctx.eval = estimate_expected_pi(spec.env, spec.policy, T, spec.eval_pilot_reps,
                                        spec.master_seed);
    } else {
        ctx.eval = EvalPolicy::uniform();
    }
    bool wants_wdec = std::find(spec.estimators.begin(), spec.estimators.end(),
                                EstimatorKind::WDecorrelated) != spec.estimators.end();
    if (wants_wdec) {
        std::vector<double> min_eigs(spec.wdec_pilot_reps);
        parallel_for(spec.wdec_pilot_reps, spec.threads, [&](int i) {
            RngStream rng(spec.master_seed,
                          derive_stream_id({kWdecPilotTag, static_cast<std::uint64_t>(T),
                                            static_cast<std::uint64_t>(i)}));
            PolicyState policy(spec.policy, spec.env.xdim());
            Trajectory traj = run_trajectory(spec.env, policy, T, rng);
            const int d = 2 * spec.env.xdim();
            Matrix gram(d, d);
            EvalPolicy uniform;
            for (const DesignRow& row : contextual_rows(traj, uniform, false)) {
                add_outer(gram, row.z);
            }
            min_eigs[i] = symmetric_eigenvalues(gram).front();
        });
        ctx.wdec_lambda = select_lambda_t(min_eigs, T);
    }
    return ctx;
}

RepRecord run_replication(const ExperimentSpec& spec, const HorizonContext& ctx, int rep_index) {
    const long T = ctx.T;
    RepRecord record;
    record.T = T;
    record.rep = rep_index;
    RngStream rng(spec.master_seed,
                  derive_stream_id({kTrajectoryTag, static_cast<std::uint64_t>(T),
                                    static_cast<std::uint64_t>(rep_index)}));
    PolicyState policy(spec.policy, spec.env.xdim());
    Trajectory traj = run_trajectory(spec.env, policy, T, rng);
    double alloc = 0.0;
    for (int a : traj.actions) alloc += a;
    record.allocation = alloc / static_cast<double>(T);

    const int p = spec.env.xdim();  // advantage block size
    const Vector& theta_star = spec.env.theta_star;
    const Vector truth =
        spec.target == Target::FullTheta ? theta_star : tail(theta_star, p);

    std::vector<DesignRow> unit_rows;
    std::vector<DesignRow> weighted_rows;
    auto get_unit_rows = [&]() -> const std::vector<DesignRow>& {
        if (unit_rows.empty()) unit_rows = contextual_rows(traj, ctx.eval, false);
        return unit_rows;
    };
    auto get_weighted_rows = [&]() -> const std::vector<DesignRow>& {
        if (weighted_rows.empty()) weighted_rows = contextual_rows(traj, ctx.eval, true);
        return weighted_rows;
    };

    record.outcomes.resize(spec.estimators.size());
    for (size_t e = 0; e < spec.estimators.size(); ++e) {
        RegionOutcome& out = record.outcomes[e];
        try {
            switch (spec.estimators[e]) {
                case EstimatorKind::Ols:
                case EstimatorKind::AwLs:
                case EstimatorKind::Mle:
                case EstimatorKind::AwMle: {
                    EstimatorKind kind = spec.estimators[e];
                    bool weighted = kind == EstimatorKind::AwLs || kind == EstimatorKind::AwMle;
                    bool glm = kind == EstimatorKind::Mle || kind == EstimatorKind::AwMle;
                    const std::vector<DesignRow>& rows =
                        weighted ? get_weighted_rows() : get_unit_rows();
                    EstimatorReport report =
                        glm ? aw_mle_glm(rows, spec.env.family, Vector(2 * p, 0.0))
                            : aw_least_squares(rows);
                    if (spec.target == Target::FullTheta) {
                        finish_outcome(out, hotelling_region(report, spec.alpha), truth,
                                       report.theta_hat);
                    } else if (weighted) {
                        Ellipsoid full = hotelling_region(report, spec.alpha);
                        finish_outcome(out, project_ellipsoid(full, p), truth,
                                       tail(report.theta_hat, p));
                    } else {
                        // Sub-block normal approximation for the unweighted fits.
                        Matrix cov = inverse_spd(static_cast<double>(T) * report.bread);
                        if (!glm) cov *= report.sigma2_hat;
                        finish_outcome(out,
                                       subblock_region(report.theta_hat, cov, p, T, spec.alpha),
                                       truth, tail(report.theta_hat, p));
                    }
                    break;
                }
                case EstimatorKind::WDecorrelated: {
                    EstimatorReport ls = aw_least_squares(get_unit_rows());
                    WDecorrelated dec = w_decorrelated(get_unit_rows(), ctx.wdec_lambda.value(),
                                                       ls.theta_hat, ls.sigma2_hat);
                    const int d = 2 * p;
                    if (spec.target == Target::FullTheta) {
                        Ellipsoid region;
                        region.center = dec.theta;
                        region.shape = inverse_spd(dec.variance);
                        double dd = static_cast<double>(d);
                        double tt = static_cast<double>(T);
                        region.cutoff = dd * (tt - 1.0) / (tt - dd) *
                                        f_quantile(d, static_cast<int>(T - d), 1.0 - spec.alpha);
                        finish_outcome(out, region, truth, dec.theta);
                    } else {
                        finish_outcome(out,
                                       subblock_region(dec.theta, dec.variance, p, T, spec.alpha),
                                       truth, tail(dec.theta, p));
                    }
                    break;
                }
                case EstimatorKind::SelfNormalized: {
                    RidgeEstimate ridge = ridge_estimator(get_unit_rows(), 2 * p);
                    NormBall ball = self_normalized_region(ridge.theta, ridge.v, spec.alpha);
                    Ellipsoid region = to_ellipsoid(ball);
                    if (spec.target == Target::AdvantageOnly) {
                        region = project_ellipsoid(region, p);
                    }
                    finish_outcome(out, region, truth,
                                   spec.target == Target::FullTheta ? ridge.theta
                                                                    : tail(ridge.theta, p));
                    break;
                }
            }
        } catch (const std::exception& ex) {
            out.failed = true;
            out.error = ex.what();
        }
    }
    return record;
}

McSummary summarize(const ExperimentSpec& spec, const std::vector<std::vector<RepRecord>>& records) {
    if (records.size() != spec.t_grid.size()) {
        throw std::invalid_argument("summarize: records do not match the horizon grid");
    }
    McSummary summary;
    // First pass: raw per-cell aggregates.
    for (size_t e = 0; e < spec.estimators.size(); ++e) {
        for (size_t ti = 0; ti < spec.t_grid.size(); ++ti) {
            McCell cell;
            cell.estimator = estimator_name(spec.estimators[e]);
            cell.region =
                spec.estimators[e] == EstimatorKind::SelfNormalized ? "norm-ball" : "hotelling";
            cell.target = target_name(spec.target);
            cell.T = spec.t_grid[ti];
            cell.alpha = spec.alpha;
            cell.n_reps = static_cast<int>(records[ti].size());
            std::vector<double> volumes;
            std::vector<double> sq_errors;
            int contained = 0;
            int usable = 0;
            for (const RepRecord& rec : records[ti]) {
                const RegionOutcome& out = rec.outcomes[e];
                if (out.failed) {
                    ++cell.failures;
                    continue;
                }
                ++usable;
                contained += out.covered ? 1 : 0;
                volumes.push_back(out.base_volume * std::pow(out.cutoff, 0.5 * out.dim));
                sq_errors.push_back(out.sq_error);
                cell.nominal_cutoff += out.cutoff;
            }
            if (usable < 2) {
                cell.insufficient = true;
                summary.push_back(std::move(cell));
                continue;
            }
            cell.nominal_cutoff /= static_cast<double>(usable);
            cell.coverage = static_cast<double>(contained) / static_cast<double>(usable);
            cell.coverage_se =
                std::sqrt(cell.coverage * (1.0 - cell.coverage) / static_cast<double>(usable));
            cell.mean_volume = mean_of(volumes);
            cell.volume_se = se_of_mean(volumes, cell.mean_volume);
            cell.mse = mean_of(sq_errors);
            cell.mse_se = se_of_mean(sq_errors, cell.mse);
            summary.push_back(std::move(cell));
        }
    }
    // Calibration pass: any estimator that under-covers somewhere on the grid
    // has its reported volumes recomputed at the empirical cutoff.
    for (size_t e = 0; e < spec.estimators.size(); ++e) {
        bool undercovers = false;
        for (size_t ti = 0; ti < spec.t_grid.size(); ++ti) {
            const McCell& cell = summary[e * spec.t_grid.size() + ti];
            if (!cell.insufficient && cell.coverage < 1.0 - spec.alpha) undercovers = true;
        }
        if (!undercovers) continue;
        std::vector<double> pooled;
        if (spec.calibration_scope == "pooled") {
            for (size_t ti = 0; ti < spec.t_grid.size(); ++ti) {
                for (const RepRecord& rec : records[ti]) {
                    if (!rec.outcomes[e].failed) pooled.push_back(rec.outcomes[e].statistic);
                }
            }
        }
        for (size_t ti = 0; ti < spec.t_grid.size(); ++ti) {
            McCell& cell = summary[e * spec.t_grid.size() + ti];
            if (cell.insufficient) continue;
            std::vector<double> stats;
            for (const RepRecord& rec : records[ti]) {
                if (!rec.outcomes[e].failed) stats.push_back(rec.outcomes[e].statistic);
            }
            double cutoff = calibrate_cutoff(spec.calibration_scope == "pooled" ? pooled : stats,
                                             spec.alpha);
            cell.calibrated = true;
            cell.calibrated_cutoff = cutoff;
            std::vector<double> volumes;
            for (const RepRecord& rec : records[ti]) {
                const RegionOutcome& out = rec.outcomes[e];
                if (out.failed) continue;
                volumes.push_back(out.base_volume * std::pow(cutoff, 0.5 * out.dim));
            }
            cell.mean_volume = mean_of(volumes);
            cell.volume_se = se_of_mean(volumes, cell.mean_volume);
        }
    }
    return summary;
}

McSummary run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    std::vector<std::vector<RepRecord>> records(spec.t_grid.size());
    for (size_t ti = 0; ti < spec.t_grid.size(); ++ti) {
        HorizonContext ctx = make_horizon_context(spec, spec.t_grid[ti]);
        records[ti].resize(spec.n_reps);
        parallel_for(spec.n_reps, spec.threads,
                     [&](int rep) { records[ti][rep] = run_replication(spec, ctx, rep); });
    }
    return summarize(spec, records);
}

bool has_insufficient(const McSummary& summary) {
    for (const McCell& cell : summary) {
        if (cell.insufficient) return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// Two-arm demonstrations
// ---------------------------------------------------------------------------

namespace {

EnvConfig mab_env(const MabSpec& spec) {
    EnvConfig env;
    env.family = spec.family;
    env.context_dim = 0;
    env.theta_star = {spec.mu0, spec.delta};
    return env;
}

struct ArmMeans {
    double mu0;
    double mu1;
};

ArmMeans mab_arm_means(const MabSpec& spec) {
    // Arm means on the indicator basis; GLM families go through the link.
    GlmFamily family = spec.family;
    if (family.tag == Family::GaussianT5) return {spec.mu0, spec.mu0 + spec.delta};
    return {family.b_prime(spec.mu0), family.b_prime(spec.mu0 + spec.delta)};
}

}  // namespace

double ks_distance_to_fitted_normal(std::vector<double> sample) {
    if (sample.empty()) throw std::invalid_argument("ks_distance: empty sample");
    double ss = 0.0;
    for (double x : sample) ss += x * x;
    double scale = std::sqrt(ss / static_cast<double>(sample.size()));
    if (!(scale > 0.0)) return 1.0;
    std::sort(sample.begin(), sample.end());
    double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (size_t i = 0; i < sample.size(); ++i) {
        double f = normal_cdf(sample[i] / scale);
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    }
    return d;
}

ZstatResult zstat_experiment(const MabSpec& spec) {
    if (spec.family.tag != Family::GaussianT5) {
        throw std::invalid_argument("zstat_experiment: defined for the Gaussian family");
    }
    EnvConfig env = mab_env(spec);
    const double mu1 = mab_arm_means(spec).mu1;
    std::vector<double> ols(spec.n_reps), awls(spec.n_reps);
    std::vector<char> ok(spec.n_reps, 0);
    parallel_for(spec.n_reps, spec.threads, [&](int rep) {
        RngStream rng(spec.master_seed,
                      derive_stream_id({kZstatTag, static_cast<std::uint64_t>(spec.T),
                                        static_cast<std::uint64_t>(rep)}));
        PolicyState policy(spec.policy, 1);
        Trajectory traj = run_trajectory(env, policy, spec.T, rng);
        long n1 = 0;
        for (int a : traj.actions) n1 += a;
        if (n1 == 0 || n1 == spec.T) return;  // degenerate pull counts
        EvalPolicy uniform;
        EstimatorReport ls = aw_least_squares(arm_indicator_rows(traj, uniform, MabWeight::Unit));
        EstimatorReport aw = aw_least_squares(
            arm_indicator_rows(traj, uniform, MabWeight::InverseSqrtPropensity));
        ols[rep] = std::sqrt(static_cast<double>(n1)) * (ls.theta_hat[1] - mu1);
        double weight_sum = 0.0;
        for (long t = 0; t < spec.T; ++t) {
            if (traj.actions[t] == 1) weight_sum += 1.0 / std::sqrt(traj.prob_arm1[t]);
        }
        awls[rep] = weight_sum / std::sqrt(static_cast<double>(spec.T)) * (aw.theta_hat[1] - mu1);
        ok[rep] = 1;
    });
    ZstatResult result;
    for (int rep = 0; rep < spec.n_reps; ++rep) {
        if (!ok[rep]) {
            ++result.failures;
            continue;
        }
        result.ols.push_back(ols[rep]);
        result.awls.push_back(awls[rep]);
    }
    result.ks_ols = ks_distance_to_fitted_normal(result.ols);
    result.ks_awls = ks_distance_to_fitted_normal(result.awls);
    return result;
}

AllocationResult allocation_experiment(const MabSpec& spec) {
    EnvConfig env = mab_env(spec);
    std::vector<double> allocations(spec.n_reps);
    parallel_for(spec.n_reps, spec.threads, [&](int rep) {
        RngStream rng(spec.master_seed,
                      derive_stream_id({kAllocTag, static_cast<std::uint64_t>(spec.T),
                                        static_cast<std::uint64_t>(rep)}));
        PolicyState policy(spec.policy, 1);
        Trajectory traj = run_trajectory(env, policy, spec.T, rng);
        double s = 0.0;
        for (int a : traj.actions) s += a;
        allocations[rep] = s / static_cast<double>(spec.T);
    });
    AllocationResult result;
    result.histogram.assign(50, 0);
    result.n_reps = spec.n_reps;
    for (double a : allocations) {
        int bin = std::min(49, static_cast<int>(a * 50.0));
        ++result.histogram[bin];
    }
    result.mean = mean_of(allocations);
    double ss = 0.0;
    for (double a : allocations) ss += (a - result.mean) * (a - result.mean);
    result.variance = ss / static_cast<double>(spec.n_reps - 1);
    return result;
}

std::vector<UniformityCell> uniformity_experiment(const MabSpec& base,
                                                  const std::vector<double>& delta_grid,
                                                  const std::vector<PolicyKind>& policies,
                                                  double alpha) {
    const double z = normal_quantile(1.0 - 0.5 * alpha);
    std::vector<UniformityCell> cells;
    for (PolicyKind kind : policies) {
        for (size_t di = 0; di < delta_grid.size(); ++di) {
            MabSpec spec = base;
            spec.delta = delta_grid[di];
            spec.policy.kind = kind;
            EnvConfig env = mab_env(spec);
            std::vector<char> covered(spec.n_reps, 0), ok(spec.n_reps, 0);
            parallel_for(spec.n_reps, spec.threads, [&](int rep) {
                RngStream rng(spec.master_seed,
                              derive_stream_id({kUniformityTag, static_cast<std::uint64_t>(kind),
                                                static_cast<std::uint64_t>(di),
                                                static_cast<std::uint64_t>(spec.T),
                                                static_cast<std::uint64_t>(rep)}));
                PolicyState policy(spec.policy, 1);
                Trajectory traj = run_trajectory(env, policy, spec.T, rng);
                long n1 = 0;
                for (int a : traj.actions) n1 += a;
                long n0 = spec.T - n1;
                if (n0 == 0 || n1 == 0) return;
                EvalPolicy uniform;
                EstimatorReport ls =
                    aw_least_squares(arm_indicator_rows(traj, uniform, MabWeight::Unit));
                double margin_hat = ls.theta_hat[1] - ls.theta_hat[0];
                double half_width =
                    z * std::sqrt(ls.sigma2_hat * (1.0 / static_cast<double>(n0) +
                                                   1.0 / static_cast<double>(n1)));
                covered[rep] = std::fabs(margin_hat - spec.delta) <= half_width ? 1 : 0;
                ok[rep] = 1;
            });
            UniformityCell cell;
            cell.policy = kind;
            cell.delta = spec.delta;
            int usable = 0, hit = 0;
            for (int rep = 0; rep < spec.n_reps; ++rep) {
                if (!ok[rep]) {
                    ++cell.failures;
                    continue;
                }
                ++usable;
                hit += covered[rep];
            }
            cell.n_reps = usable;
            cell.coverage = usable > 0 ? static_cast<double>(hit) / usable : 0.0;
            cell.coverage_se =
                usable > 0 ? std::sqrt(cell.coverage * (1.0 - cell.coverage) / usable) : 0.0;
            cells.push_back(cell);
        }
    }
    return cells;
}

std::vector<PievalCell> evalpolicy_experiment(const MabSpec& spec, int eval_pilot_reps) {
    EnvConfig env = mab_env(spec);
    EvalPolicy uniform;
    EvalPolicy expected =
        estimate_expected_pi(env, spec.policy, spec.T, eval_pilot_reps, spec.master_seed);
    const ArmMeans means = mab_arm_means(spec);

    struct RepData {
        bool ok = false;
        double err_uniform[2], err_expected[2];
        double pi_bar[2], cross_uniform[2], cross_expected[2];
    };
    std::vector<RepData> reps(spec.n_reps);
    parallel_for(spec.n_reps, spec.threads, [&](int rep) {
        RngStream rng(spec.master_seed,
                      derive_stream_id({kPievalTag, static_cast<std::uint64_t>(spec.T),
                                        static_cast<std::uint64_t>(rep)}));
        PolicyState policy(spec.policy, 1);
        Trajectory traj = run_trajectory(env, policy, spec.T, rng);
        long n1 = 0;
        for (int a : traj.actions) n1 += a;
        if (n1 == 0 || n1 == spec.T) return;
        RepData& data = reps[rep];
        EstimatorReport fit_u =
            aw_least_squares(arm_indicator_rows(traj, uniform, MabWeight::SqrtImportance));
        EstimatorReport fit_e =
            aw_least_squares(arm_indicator_rows(traj, expected, MabWeight::SqrtImportance));
        data.err_uniform[0] = fit_u.theta_hat[0] - means.mu0;
        data.err_uniform[1] = fit_u.theta_hat[1] - means.mu1;
        data.err_expected[0] = fit_e.theta_hat[0] - means.mu0;
        data.err_expected[1] = fit_e.theta_hat[1] - means.mu1;
        for (int arm = 0; arm < 2; ++arm) {
            double pb = 0.0, cu = 0.0, ce = 0.0;
            for (long t = 0; t < spec.T; ++t) {
                double pi_a = arm == 1 ? traj.prob_arm1[t] : 1.0 - traj.prob_arm1[t];
                pb += pi_a;
                cu += std::sqrt(pi_a * eval_prob(uniform, t + 1, arm));
                ce += std::sqrt(pi_a * eval_prob(expected, t + 1, arm));
            }
            data.pi_bar[arm] = pb / static_cast<double>(spec.T);
            data.cross_uniform[arm] = cu / static_cast<double>(spec.T);
            data.cross_expected[arm] = ce / static_cast<double>(spec.T);
        }
        data.ok = true;
    });

    // True per-arm reward variances.
    double sigma2[2];
    switch (spec.family.tag) {
        case Family::GaussianT5:
            sigma2[0] = sigma2[1] = 5.0 / 3.0;
            break;
        case Family::Bernoulli: {
            sigma2[0] = means.mu0 * (1.0 - means.mu0);
            sigma2[1] = means.mu1 * (1.0 - means.mu1);
            break;
        }
        case Family::Poisson:
            sigma2[0] = means.mu0;
            sigma2[1] = means.mu1;
            break;
    }

    std::vector<PievalCell> cells;
    double tt = static_cast<double>(spec.T);
    for (int which = 0; which < 2; ++which) {
        const EvalPolicy& eval = which == 0 ? uniform : expected;
        for (int arm = 0; arm < 2; ++arm) {
            std::vector<double> t_sq_errors;
            double pi_bar = 0.0, pi_eval_bar = 0.0, cross_bar = 0.0;
            int usable = 0;
            for (const RepData& data : reps) {
                if (!data.ok) continue;
                ++usable;
                double err = which == 0 ? data.err_uniform[arm] : data.err_expected[arm];
                t_sq_errors.push_back(tt * err * err);
                pi_bar += data.pi_bar[arm];
                cross_bar += which == 0 ? data.cross_uniform[arm] : data.cross_expected[arm];
            }
            if (usable == 0) throw std::runtime_error("evalpolicy_experiment: no usable reps");
            pi_bar /= usable;
            cross_bar /= usable;
            double eb = 0.0;
            for (long t = 0; t < spec.T; ++t) eb += eval_prob(eval, t + 1, arm);
            pi_eval_bar = eb / tt;
            double s2 = sigma2[arm];
            AwlsVariance var = awls_asymptotic_variance({&s2, 1}, {&pi_bar, 1}, {&pi_eval_bar, 1},
                                                        {&cross_bar, 1});
            PievalCell cell;
            cell.eval_policy = eval_policy_name(eval.kind);
            cell.arm = arm;
            cell.t_mse = mean_of(t_sq_errors);
            cell.t_mse_se = se_of_mean(t_sq_errors, cell.t_mse);
            cell.formula_variance = var.variance[0];
            cell.lower_bound = var.lower_bound[0];
            cells.push_back(cell);
        }
    }
    return cells;
}

}  // namespace banditlab
