#pragma once

#include <string>

#include "banditlab/statfn.hpp"

// Logging policies: clipped Thompson Sampling with per-arm Gaussian linear
// models, the Hodges-style TS variant, epsilon-greedy, and fixed policies.

namespace banditlab {

/// Conjugate Gaussian linear posterior with N(0, I) prior and unit noise:
/// precision starts at I, moment at 0; mean = precision^{-1} moment.
struct GaussianLinearPosterior {
    Matrix precision;
    Vector moment;

    explicit GaussianLinearPosterior(int dim = 1)
        : precision(Matrix::identity(dim)), moment(dim, 0.0) {}

    Vector mean() const { return solve_spd(precision, moment); }
    /// x' Sigma x for the posterior covariance Sigma = precision^{-1}.
    double covariance_quad(const Vector& x) const { return dot(x, solve_spd(precision, x)); }
};

enum class PolicyKind { ThompsonSampling, TsHodges, EpsGreedy, Fixed, UniformFixed };

std::string policy_name(PolicyKind k);
PolicyKind policy_from_name(const std::string& name);

struct PolicyConfig {
    PolicyKind kind = PolicyKind::ThompsonSampling;
    double clip = 0.01;
    double epsilon = 0.1;
    double fixed_prob = 0.5;
    /// Observation-noise variance assumed by the TS linear model.
    double ts_noise_var = 1.0;
    /// Hodges forcing threshold is t^(-hodges_exponent).
    double hodges_exponent = 0.17;

    void validate() const;
};

/// Mutable per-replication policy state; single-owner, movable.
struct PolicyState {
    PolicyConfig cfg;
    int dim = 1;  // context_dim + 1
    long t = 0;   // completed updates
    GaussianLinearPosterior post0;
    GaussianLinearPosterior post1;

    PolicyState(const PolicyConfig& config, int xdim);

    /// Probability of selecting arm 1 at the current step given xtilde.
    double prob_arm1(const Vector& xtilde) const;

    /// Feed back one observation; TS-family posteriors update on the chosen arm.
    void update(const Vector& xtilde, int action, double reward_pre);
};

double clip_prob(double p, double c);

/// Closed-form P(xtilde' beta1 > xtilde' beta0) under the two posteriors, clipped.
double ts_prob_arm1(const PolicyState& state, const Vector& xtilde);

/// Hodges variant (intercept-only bandit): forces 0.5 while the posterior
/// means differ by at most t^(-exponent), TS probability otherwise; clipped.
double ts_hodges_prob(const PolicyState& state, const Vector& xtilde);

double eps_greedy_prob(const PolicyState& state, const Vector& xtilde);

void ts_update(PolicyState& state, const Vector& xtilde, int action, double reward_pre);

}  // namespace banditlab
