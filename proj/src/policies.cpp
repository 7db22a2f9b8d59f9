#include "banditlab/policies.hpp"

#include <cmath>
#include <stdexcept>

namespace banditlab {

std::string policy_name(PolicyKind k) {
    switch (k) {
        case PolicyKind::ThompsonSampling: return "ts";
        case PolicyKind::TsHodges: return "ts-hodges";
        case PolicyKind::EpsGreedy: return "eps-greedy";
        case PolicyKind::Fixed: return "fixed";
        case PolicyKind::UniformFixed: return "uniform";
    }
    throw std::logic_error("policy_name: bad kind");
}

PolicyKind policy_from_name(const std::string& name) {
    if (name == "ts") return PolicyKind::ThompsonSampling;
    if (name == "ts-hodges") return PolicyKind::TsHodges;
    if (name == "eps-greedy") return PolicyKind::EpsGreedy;
    if (name == "fixed") return PolicyKind::Fixed;
    if (name == "uniform") return PolicyKind::UniformFixed;
    throw std::invalid_argument("unknown policy: " + name);
}

void PolicyConfig::validate() const {
    if (!(clip > 0.0 && clip < 0.5)) throw std::invalid_argument("policy clip must lie in (0,0.5)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("policy epsilon must lie in [0,1]");
    if (!(fixed_prob >= 0.0 && fixed_prob <= 1.0)) throw std::invalid_argument("fixed_prob must lie in [0,1]");
    if (!(ts_noise_var > 0.0)) throw std::invalid_argument("ts_noise_var must be positive");
    if (!(hodges_exponent > 0.0)) throw std::invalid_argument("hodges_exponent must be positive");
}

PolicyState::PolicyState(const PolicyConfig& config, int xdim)
    : cfg(config), dim(xdim), post0(xdim), post1(xdim) {
    cfg.validate();
    if (xdim < 1) throw std::invalid_argument("PolicyState: xdim must be >= 1");
}

double clip_prob(double p, double c) {
    return std::max(c, std::min(1.0 - c, p));
}

double ts_prob_arm1(const PolicyState& state, const Vector& xtilde) {
    Vector mean_diff = state.post1.mean() - state.post0.mean();
    double num = dot(xtilde, mean_diff);
    double var = state.post0.covariance_quad(xtilde) + state.post1.covariance_quad(xtilde);
    double p = normal_cdf(num / std::sqrt(var));
    return clip_prob(p, state.cfg.clip);
}

double ts_hodges_prob(const PolicyState& state, const Vector& xtilde) {
    if (state.dim != 1) {
        throw std::logic_error("ts_hodges_prob: only defined for intercept-only bandits");
    }
    // 1-based step counter of the decision being made now.
    double step = static_cast<double>(state.t + 1);
    double threshold = std::pow(step, -state.cfg.hodges_exponent);
    double diff = state.post1.mean()[0] - state.post0.mean()[0];
    double p = 0.5;
    if (std::fabs(diff) > threshold) {
        double var = state.post0.covariance_quad(xtilde) + state.post1.covariance_quad(xtilde);
        p = normal_cdf(diff / std::sqrt(var));
    }
    return clip_prob(p, state.cfg.clip);
}

double eps_greedy_prob(const PolicyState& state, const Vector& xtilde) {
    double m0 = dot(xtilde, state.post0.mean());
    double m1 = dot(xtilde, state.post1.mean());
    if (m0 == m1) return 0.5;
    double best = 1.0 - state.cfg.epsilon + 0.5 * state.cfg.epsilon;
    return m1 > m0 ? best : 0.5 * state.cfg.epsilon;
}

void ts_update(PolicyState& state, const Vector& xtilde, int action, double reward_pre) {
    if (action != 0 && action != 1) throw std::invalid_argument("ts_update: action must be 0/1");
    GaussianLinearPosterior& post = action == 1 ? state.post1 : state.post0;
    double inv_noise = 1.0 / state.cfg.ts_noise_var;
    add_outer(post.precision, xtilde, inv_noise);
    for (int i = 0; i < state.dim; ++i) post.moment[i] += inv_noise * xtilde[i] * reward_pre;
    state.t += 1;
}

double PolicyState::prob_arm1(const Vector& xtilde) const {
    if (static_cast<int>(xtilde.size()) != dim) {
        throw std::invalid_argument("prob_arm1: context dimension mismatch");
    }
    switch (cfg.kind) {
        case PolicyKind::ThompsonSampling: return ts_prob_arm1(*this, xtilde);
        case PolicyKind::TsHodges: return ts_hodges_prob(*this, xtilde);
        case PolicyKind::EpsGreedy: return eps_greedy_prob(*this, xtilde);
        case PolicyKind::Fixed: return cfg.fixed_prob;
        case PolicyKind::UniformFixed: return 0.5;
    }
    throw std::logic_error("prob_arm1: bad kind");
}

void PolicyState::update(const Vector& xtilde, int action, double reward_pre) {
    switch (cfg.kind) {
        case PolicyKind::ThompsonSampling:
        case PolicyKind::TsHodges:
        case PolicyKind::EpsGreedy:
            ts_update(*this, xtilde, action, reward_pre);
            break;
        case PolicyKind::Fixed:
        case PolicyKind::UniformFixed:
            t += 1;
            break;
    }
}

}  // namespace banditlab
