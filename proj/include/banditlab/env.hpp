#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "banditlab/policies.hpp"
#include "banditlab/statfn.hpp"

// Stochastic two-arm contextual bandit environment: i.i.d. uniform contexts,
// GLM-style reward families, reward preprocessing for the logging algorithm,
// and the logged trajectory produced by running a policy.

namespace banditlab {

enum class Family { GaussianT5, Bernoulli, Poisson };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

/// Outcome family bundling the cumulant function b and its derivatives.
struct GlmFamily {
    Family tag = Family::GaussianT5;

    double b(double nu) const;
    double b_prime(double nu) const;
    double b_double_prime(double nu) const;
};

struct EnvConfig {
    GlmFamily family;
    /// Length 2*(context_dim+1), split [theta0, theta1].
    Vector theta_star = {0.1, 0.1, 0.1, 0.0, 0.0, 0.0};
    int context_dim = 2;
    double context_low = 0.0;
    double context_high = 5.0;

    int xdim() const { return context_dim + 1; }
    void validate() const;
};

/// One logged bandit run. prob_arm1[t] is the probability actually used to
/// sample actions[t] (recorded before the draw); rewards_pre is what the
/// logging algorithm saw, rewards_raw is what estimators consume.
struct Trajectory {
    long T = 0;
    std::vector<Vector> contexts;  // each row is xtilde = [1, x1, ..., xk]
    std::vector<int> actions;
    Vector prob_arm1;
    Vector rewards_raw;
    Vector rewards_pre;

    double prob_logged(long t) const {
        return actions[t] == 1 ? prob_arm1[t] : 1.0 - prob_arm1[t];
    }
};

/// xtilde = [1, u1, ..., u_dim] with ui ~ Uniform(low, high) i.i.d.
Vector draw_context(const EnvConfig& cfg, RngStream& rng);

/// nu = xtilde' theta0 + a * xtilde' theta1.
double linear_predictor(const Vector& theta, const Vector& xtilde, int a);

double draw_reward(const GlmFamily& family, double nu, RngStream& rng);

/// GaussianT5 passes through; Bernoulli maps {0,1} to {-1,+1}; Poisson scales by 0.6.
double preprocess_reward(const GlmFamily& family, double r);

Trajectory run_trajectory(const EnvConfig& cfg, PolicyState& policy, long T, RngStream& rng);

/// CSV dump with columns t,x1..xk,action,prob_arm1,reward_raw,reward_pre.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace banditlab
