#include "banditlab/evalpolicy.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace banditlab {

namespace {
constexpr std::uint64_t kPilotStreamTag = 0x70696c6f74ULL;  // "pilot"
}

EvalPolicy EvalPolicy::expected_pi(Vector arm1_probs) {
    for (double p : arm1_probs) {
        if (!(p > 0.0 && p < 1.0)) {
            throw std::invalid_argument("EvalPolicy: table probabilities must lie in (0,1)");
        }
    }
    return EvalPolicy{Kind::ExpectedPi, std::move(arm1_probs)};
}

std::string eval_policy_name(EvalPolicy::Kind k) {
    return k == EvalPolicy::Kind::Uniform ? "uniform" : "expected-pi";
}

EvalPolicy::Kind eval_policy_from_name(const std::string& name) {
    if (name == "uniform") return EvalPolicy::Kind::Uniform;
    if (name == "expected-pi") return EvalPolicy::Kind::ExpectedPi;
    throw std::invalid_argument("unknown eval policy: " + name);
}

double eval_prob(const EvalPolicy& policy, long t, int arm) {
    if (arm != 0 && arm != 1) throw std::out_of_range("eval_prob: arm must be 0/1");
    if (t < 1) throw std::out_of_range("eval_prob: steps are 1-based");
    if (policy.kind == EvalPolicy::Kind::Uniform) return 0.5;
    if (t > static_cast<long>(policy.table.size())) {
        throw std::out_of_range("eval_prob: step beyond table horizon");
    }
    double p1 = policy.table[t - 1];
    return arm == 1 ? p1 : 1.0 - p1;
}

EvalPolicy estimate_expected_pi(const EnvConfig& cfg, const PolicyConfig& policy_cfg, long T,
                                int n_pilot, std::uint64_t seed) {
    if (n_pilot < 100) throw std::domain_error("estimate_expected_pi: need n_pilot >= 100");
    Vector table(T, 0.0);
    for (int rep = 0; rep < n_pilot; ++rep) {
        RngStream rng(seed, derive_stream_id({kPilotStreamTag, static_cast<std::uint64_t>(T),
                                              static_cast<std::uint64_t>(rep)}));
        PolicyState policy(policy_cfg, cfg.xdim());
        Trajectory traj = run_trajectory(cfg, policy, T, rng);
        for (long t = 0; t < T; ++t) table[t] += traj.prob_arm1[t];
    }
    for (double& p : table) {
        p = std::max(0.01, std::min(0.99, p / static_cast<double>(n_pilot)));
    }
    return EvalPolicy::expected_pi(std::move(table));
}

AwlsVariance awls_asymptotic_variance(std::span<const double> sigma2,
                                      std::span<const double> pi_bar,
                                      std::span<const double> pi_eval_bar,
                                      std::span<const double> cross_bar) {
    size_t n = sigma2.size();
    if (pi_bar.size() != n || pi_eval_bar.size() != n || cross_bar.size() != n) {
        throw std::invalid_argument("awls_asymptotic_variance: arm count mismatch");
    }
    AwlsVariance out;
    out.variance.resize(n);
    out.lower_bound.resize(n);
    for (size_t a = 0; a < n; ++a) {
        if (!(sigma2[a] > 0.0)) throw std::domain_error("awls_asymptotic_variance: sigma2 <= 0");
        if (!(pi_bar[a] > 0.0 && pi_bar[a] <= 1.0) || !(pi_eval_bar[a] > 0.0 && pi_eval_bar[a] <= 1.0) ||
            !(cross_bar[a] > 0.0 && cross_bar[a] <= 1.0)) {
            throw std::domain_error("awls_asymptotic_variance: averages must lie in (0,1]");
        }
        out.variance[a] = sigma2[a] * pi_eval_bar[a] / (cross_bar[a] * cross_bar[a]);
        out.lower_bound[a] = sigma2[a] / pi_bar[a];
        if (out.variance[a] < out.lower_bound[a] - 1e-12) {
            throw std::domain_error(
                "awls_asymptotic_variance: inputs violate the Cauchy-Schwarz bound");
        }
    }
    return out;
}

void write_eval_policy_csv(const EvalPolicy& policy, std::ostream& out) {
    out << "t,pi_eval_arm1\n";
    char buf[64];
    for (size_t t = 0; t < policy.table.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%.17g", policy.table[t]);
        out << (t + 1) << ',' << buf << '\n';
    }
}

EvalPolicy read_eval_policy_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "t,pi_eval_arm1") {
        throw std::invalid_argument("eval policy csv: bad header");
    }
    Vector table;
    long expected_t = 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        long t;
        char comma;
        double p;
        if (!(ss >> t >> comma >> p) || comma != ',' || t != expected_t) {
            throw std::invalid_argument("eval policy csv: bad row: " + line);
        }
        table.push_back(p);
        ++expected_t;
    }
    return EvalPolicy::expected_pi(std::move(table));
}

}  // namespace banditlab
