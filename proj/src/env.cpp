#include "banditlab/env.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace banditlab {

std::string family_name(Family f) {
    switch (f) {
        case Family::GaussianT5: return "t5";
        case Family::Bernoulli: return "bernoulli";
        case Family::Poisson: return "poisson";
    }
    throw std::logic_error("family_name: bad tag");
}

Family family_from_name(const std::string& name) {
    if (name == "t5") return Family::GaussianT5;
    if (name == "bernoulli") return Family::Bernoulli;
    if (name == "poisson") return Family::Poisson;
    throw std::invalid_argument("unknown family: " + name);
}

double GlmFamily::b(double nu) const {
    switch (tag) {
        case Family::GaussianT5: return 0.5 * nu * nu;
        case Family::Bernoulli:
            // log(1 + e^nu), evaluated stably on both tails.
            return nu > 0.0 ? nu + std::log1p(std::exp(-nu)) : std::log1p(std::exp(nu));
        case Family::Poisson: return std::exp(nu);
    }
    throw std::logic_error("GlmFamily::b: bad tag");
}

double GlmFamily::b_prime(double nu) const {
    switch (tag) {
        case Family::GaussianT5: return nu;
        case Family::Bernoulli: return 1.0 / (1.0 + std::exp(-nu));
        case Family::Poisson: return std::exp(nu);
    }
    throw std::logic_error("GlmFamily::b_prime: bad tag");
}

double GlmFamily::b_double_prime(double nu) const {
    switch (tag) {
        case Family::GaussianT5: return 1.0;
        case Family::Bernoulli: {
            double p = 1.0 / (1.0 + std::exp(-nu));
            return p * (1.0 - p);
        }
        case Family::Poisson: return std::exp(nu);
    }
    throw std::logic_error("GlmFamily::b_double_prime: bad tag");
}

void EnvConfig::validate() const {
    if (context_dim < 0) throw std::invalid_argument("context_dim must be >= 0");
    if (static_cast<int>(theta_star.size()) != 2 * xdim()) {
        throw std::invalid_argument("theta_star must have length 2*(context_dim+1)");
    }
    if (!(context_low <= context_high)) {
        throw std::invalid_argument("context_low must be <= context_high");
    }
}

Vector draw_context(const EnvConfig& cfg, RngStream& rng) {
    Vector x(cfg.xdim());
    x[0] = 1.0;
    for (int i = 1; i < cfg.xdim(); ++i) {
        x[i] = sample_uniform(rng, cfg.context_low, cfg.context_high);
    }
    return x;
}

double linear_predictor(const Vector& theta, const Vector& xtilde, int a) {
    size_t k = xtilde.size();
    if (theta.size() != 2 * k) throw std::invalid_argument("linear_predictor: dimension mismatch");
    double nu = 0.0;
    for (size_t i = 0; i < k; ++i) nu += xtilde[i] * theta[i];
    if (a == 1) {
        for (size_t i = 0; i < k; ++i) nu += xtilde[i] * theta[k + i];
    }
    return nu;
}

double draw_reward(const GlmFamily& family, double nu, RngStream& rng) {
    switch (family.tag) {
        case Family::GaussianT5: return nu + sample_t(5, rng);
        case Family::Bernoulli: return sample_bernoulli(1.0 / (1.0 + std::exp(-nu)), rng);
        case Family::Poisson: return static_cast<double>(sample_poisson(std::exp(nu), rng));
    }
    throw std::logic_error("draw_reward: bad tag");
}

double preprocess_reward(const GlmFamily& family, double r) {
    switch (family.tag) {
        case Family::GaussianT5: return r;
        case Family::Bernoulli: return r * 2.0 - 1.0;
        case Family::Poisson: return r * 0.6;
    }
    throw std::logic_error("preprocess_reward: bad tag");
}

Trajectory run_trajectory(const EnvConfig& cfg, PolicyState& policy, long T, RngStream& rng) {
    if (T < 1) throw std::invalid_argument("run_trajectory: T must be >= 1");
    cfg.validate();
    Trajectory traj;
    traj.T = T;
    traj.contexts.reserve(T);
    traj.actions.reserve(T);
    traj.prob_arm1.reserve(T);
    traj.rewards_raw.reserve(T);
    traj.rewards_pre.reserve(T);
    for (long t = 0; t < T; ++t) {
        Vector x = draw_context(cfg, rng);
        // Record the propensity before sampling the action from it.
        double p1 = policy.prob_arm1(x);
        int a = sample_bernoulli(p1, rng);
        double nu = linear_predictor(cfg.theta_star, x, a);
        double r = draw_reward(cfg.family, nu, rng);
        double r_pre = preprocess_reward(cfg.family, r);
        policy.update(x, a, r_pre);
        traj.contexts.push_back(std::move(x));
        traj.actions.push_back(a);
        traj.prob_arm1.push_back(p1);
        traj.rewards_raw.push_back(r);
        traj.rewards_pre.push_back(r_pre);
    }
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    size_t xdim = traj.contexts.empty() ? 0 : traj.contexts.front().size();
    out << "t";
    for (size_t i = 1; i <= xdim; ++i) out << ",x" << i;
    out << ",action,prob_arm1,reward_raw,reward_pre\n";
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << ',' << buf;
    };
    for (long t = 0; t < traj.T; ++t) {
        out << (t + 1);
        for (double xi : traj.contexts[t]) put(xi);
        out << ',' << traj.actions[t];
        put(traj.prob_arm1[t]);
        put(traj.rewards_raw[t]);
        put(traj.rewards_pre[t]);
        out << '\n';
    }
}

}  // namespace banditlab
