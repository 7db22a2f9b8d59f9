#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "banditlab/env.hpp"
#include "banditlab/estimators.hpp"
#include "banditlab/evalpolicy.hpp"
#include "banditlab/regions.hpp"

// Monte Carlo experiment engine: replications with deterministic per-rep
// streams, coverage/volume/MSE aggregation, z-statistic distribution checks,
// and the allocation / uniformity demonstrations.

namespace banditlab {

enum class EstimatorKind { Ols, AwLs, Mle, AwMle, WDecorrelated, SelfNormalized };
enum class Target { FullTheta, AdvantageOnly };

std::string estimator_name(EstimatorKind k);
EstimatorKind estimator_from_name(const std::string& name);
std::string target_name(Target t);
Target target_from_name(const std::string& name);

struct ExperimentSpec {
    EnvConfig env;
    PolicyConfig policy;
    EvalPolicy::Kind eval_kind = EvalPolicy::Kind::Uniform;
    int eval_pilot_reps = 200;
    int wdec_pilot_reps = 200;
    std::vector<EstimatorKind> estimators = {EstimatorKind::Ols, EstimatorKind::AwLs,
                                             EstimatorKind::SelfNormalized};
    std::vector<long> t_grid = {100, 316, 1000};
    int n_reps = 1000;
    double alpha = 0.1;
    Target target = Target::FullTheta;
    std::uint64_t master_seed = 20210406;
    int threads = 0;  // 0 => hardware concurrency
    /// "per-t": each horizon calibrates from its own statistics; "pooled":
    /// one cutoff from the pooled sample across the grid.
    std::string calibration_scope = "per-t";

    void validate() const;
};

/// Per-horizon shared inputs derived once before the replication sweep.
struct HorizonContext {
    long T = 0;
    EvalPolicy eval;
    std::optional<double> wdec_lambda;
};

struct RegionOutcome {
    bool failed = false;
    std::string error;
    double statistic = 0.0;    // quadratic form at the true target
    double cutoff = 0.0;       // nominal cutoff for this replication
    double base_volume = 0.0;  // region volume at cutoff 1
    int dim = 0;
    double sq_error = 0.0;  // squared estimation error on the target coords
    bool covered = false;
};

struct RepRecord {
    long T = 0;
    int rep = 0;
    double allocation = 0.0;
    std::vector<RegionOutcome> outcomes;  // parallel to spec.estimators
};

HorizonContext make_horizon_context(const ExperimentSpec& spec, long T);
RepRecord run_replication(const ExperimentSpec& spec, const HorizonContext& ctx, int rep_index);

struct McCell {
    std::string estimator;
    std::string region;
    std::string target;
    long T = 0;
    double alpha = 0.1;
    int n_reps = 0;
    double coverage = 0.0;
    double coverage_se = 0.0;
    double mean_volume = 0.0;
    double volume_se = 0.0;
    double mse = 0.0;
    double mse_se = 0.0;
    bool calibrated = false;
    double calibrated_cutoff = 0.0;
    double nominal_cutoff = 0.0;
    int failures = 0;
    bool insufficient = false;  // fewer than two usable replications
};

using McSummary = std::vector<McCell>;

/// Aggregates replication records; applies empirical cutoff calibration to
/// the reported volumes of any estimator that under-covers somewhere on the
/// grid. records[i] must hold the records for t_grid[i] in rep order.
McSummary summarize(const ExperimentSpec& spec, const std::vector<std::vector<RepRecord>>& records);

/// Runs the full replication sweep for every horizon and summarizes.
McSummary run_experiment(const ExperimentSpec& spec);

bool has_insufficient(const McSummary& summary);

// ---------------------------------------------------------------------------
// Two-arm bandit demonstrations (arm-indicator design)
// ---------------------------------------------------------------------------

/// Intercept-only two-arm configuration: arm 0 mean mu0, margin delta.
struct MabSpec {
    GlmFamily family;
    double mu0 = 0.0;
    double delta = 0.0;
    PolicyConfig policy;
    long T = 1000;
    int n_reps = 5000;
    std::uint64_t master_seed = 20210406;
    int threads = 0;
};

struct ZstatResult {
    std::vector<double> ols;
    std::vector<double> awls;
    double ks_ols = 0.0;
    double ks_awls = 0.0;
    int failures = 0;
};

/// Z statistics of the arm-1 mean: sqrt(N1) (ols - mu1) for least squares and
/// the weighted form (1/sqrt(T)) sum_t (A_t / sqrt(pi_t1)) (awls - mu1).
ZstatResult zstat_experiment(const MabSpec& spec);

/// Kolmogorov-Smirnov distance to a mean-zero normal with scale fitted to
/// the sample root mean square.
double ks_distance_to_fitted_normal(std::vector<double> sample);

struct AllocationResult {
    std::vector<long> histogram;  // 50 bins on [0,1]
    double mean = 0.0;
    double variance = 0.0;
    int n_reps = 0;
};

AllocationResult allocation_experiment(const MabSpec& spec);

struct UniformityCell {
    PolicyKind policy;
    double delta = 0.0;
    double coverage = 0.0;
    double coverage_se = 0.0;
    int n_reps = 0;
    int failures = 0;
};

/// Coverage of the normal-approximation least-squares CI for the margin,
/// for each policy in `policies` at every margin in `delta_grid`.
std::vector<UniformityCell> uniformity_experiment(const MabSpec& base,
                                                  const std::vector<double>& delta_grid,
                                                  const std::vector<PolicyKind>& policies,
                                                  double alpha);

struct PievalCell {
    std::string eval_policy;
    int arm = 0;
    double t_mse = 0.0;
    double t_mse_se = 0.0;
    double formula_variance = 0.0;
    double lower_bound = 0.0;
};

/// Compares the weighted least-squares arm-mean MSE under the uniform and
/// expected-propensity evaluation policies against the asymptotic variance
/// formula, on shared trajectories.
std::vector<PievalCell> evalpolicy_experiment(const MabSpec& spec, int eval_pilot_reps);

/// Deterministic bounded worker pool; results must be written by index.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

}  // namespace banditlab
