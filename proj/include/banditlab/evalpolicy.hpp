#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "banditlab/env.hpp"

// Evaluation-policy selection: the uniform default and the expected-propensity
// oracle estimated from pilot runs, plus the asymptotic-variance comparison
// for the weighted least-squares arm means.

namespace banditlab {

/// Pre-specified action distribution defining the weighting target measure.
/// Fixed before any trajectory data is seen; immutable once constructed.
struct EvalPolicy {
    enum class Kind { Uniform, ExpectedPi };
    Kind kind = Kind::Uniform;
    Vector table;  // per-step arm-1 probabilities, ExpectedPi only

    static EvalPolicy uniform() { return EvalPolicy{}; }
    static EvalPolicy expected_pi(Vector arm1_probs);
};

std::string eval_policy_name(EvalPolicy::Kind k);
EvalPolicy::Kind eval_policy_from_name(const std::string& name);

/// Probability that the evaluation policy takes `arm` at 1-based step t.
double eval_prob(const EvalPolicy& policy, long t, int arm);

/// Oracle expected-propensity table: averages the logged arm-1 propensities
/// over n_pilot independent pilot runs at the true theta*, clamped to
/// [0.01, 0.99]. Pilot randomness lives in its own stream namespace.
EvalPolicy estimate_expected_pi(const EnvConfig& cfg, const PolicyConfig& policy_cfg, long T,
                                int n_pilot, std::uint64_t seed);

struct AwlsVariance {
    Vector variance;
    Vector lower_bound;  // Cauchy-Schwarz floor sigma_a^2 / pi_bar_a
};

/// Per-arm asymptotic variance sigma_a^2 * pi_eval_bar_a / cross_bar_a^2 of
/// the weighted least-squares arm mean, with its Cauchy-Schwarz lower bound.
AwlsVariance awls_asymptotic_variance(std::span<const double> sigma2,
                                      std::span<const double> pi_bar,
                                      std::span<const double> pi_eval_bar,
                                      std::span<const double> cross_bar);

/// CSV with columns t,pi_eval_arm1.
void write_eval_policy_csv(const EvalPolicy& policy, std::ostream& out);
EvalPolicy read_eval_policy_csv(std::istream& in);

}  // namespace banditlab
