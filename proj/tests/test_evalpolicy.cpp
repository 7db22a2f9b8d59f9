#include <doctest.h>

#include <cmath>
#include <sstream>

#include "banditlab/estimators.hpp"
#include "banditlab/evalpolicy.hpp"

using namespace banditlab;

TEST_CASE("eval_prob") {
    EvalPolicy uniform;
    CHECK(eval_prob(uniform, 1, 0) == 0.5);
    CHECK(eval_prob(uniform, 999, 1) == 0.5);
    EvalPolicy table = EvalPolicy::expected_pi({0.5, 0.5, 0.7, 0.5});
    CHECK(eval_prob(table, 3, 1) == doctest::Approx(0.7));
    CHECK(eval_prob(table, 3, 0) == doctest::Approx(0.3));
    CHECK_THROWS_AS(eval_prob(table, 5, 1), std::out_of_range);
    CHECK_THROWS_AS(eval_prob(table, 0, 1), std::out_of_range);
    CHECK_THROWS_AS(eval_prob(table, 2, 2), std::out_of_range);
    CHECK_THROWS_AS(EvalPolicy::expected_pi({0.5, 1.0}), std::invalid_argument);
}

TEST_CASE("uniform eval weights are a rescaled inverse-root propensity") {
    // sqrt(0.5/pi) versus 1/sqrt(pi): the fitted point is identical.
    RngStream rng(811, 0);
    std::vector<DesignRow> a(120), b(120);
    for (int i = 0; i < 120; ++i) {
        double pi = sample_uniform(rng, 0.05, 0.95);
        Vector z = {1.0, sample_uniform(rng, 0.0, 2.0)};
        double r = sample_std_normal(rng) + z[1];
        a[i] = DesignRow{z, sqrt_importance_weight(0.5, pi), pi, r};
        b[i] = DesignRow{z, 1.0 / std::sqrt(pi), pi, r};
    }
    EstimatorReport fa = aw_least_squares(a);
    EstimatorReport fb = aw_least_squares(b);
    for (int i = 0; i < 2; ++i) CHECK(std::fabs(fa.theta_hat[i] - fb.theta_hat[i]) < 1e-12);
}

TEST_CASE("estimate_expected_pi") {
    SUBCASE("fixed policy recovers its own probability") {
        EnvConfig env;
        env.context_dim = 0;
        env.theta_star = {0.0, 0.0};
        PolicyConfig pc;
        pc.kind = PolicyKind::Fixed;
        pc.fixed_prob = 0.8;
        EvalPolicy table = estimate_expected_pi(env, pc, 40, 150, 99);
        CHECK(table.kind == EvalPolicy::Kind::ExpectedPi);
        CHECK(table.table.size() == 40);
        for (double p : table.table) CHECK(p == doctest::Approx(0.8).epsilon(1e-12));
    }
    SUBCASE("symmetric bandit averages to one half") {
        EnvConfig env;
        env.context_dim = 0;
        env.theta_star = {0.0, 0.0};
        PolicyConfig pc;  // clipped TS
        EvalPolicy table = estimate_expected_pi(env, pc, 200, 400, 100);
        double mean = 0.0, worst = 0.0;
        for (double p : table.table) {
            mean += p;
            worst = std::max(worst, std::fabs(p - 0.5));
        }
        mean /= table.table.size();
        CHECK(std::fabs(mean - 0.5) < 0.02);
        CHECK(worst < 0.1);
    }
    SUBCASE("dominant arm drifts toward the clip ceiling") {
        EnvConfig env;
        env.context_dim = 0;
        env.theta_star = {0.0, 1.0};
        PolicyConfig pc;
        EvalPolicy table = estimate_expected_pi(env, pc, 300, 200, 101);
        CHECK(table.table[0] == 0.5);  // fresh posteriors are exactly symmetric
        double late = 0.0;
        for (int t = 250; t < 300; ++t) late += table.table[t];
        late /= 50.0;
        CHECK(late > 0.95);
        // The climb toward the ceiling is monotone for the vast majority of
        // the early steps.
        int rising = 0;
        for (int t = 0; t < 10; ++t) rising += table.table[t + 1] > table.table[t] ? 1 : 0;
        CHECK(rising >= 8);
        for (double p : table.table) {
            CHECK(p >= 0.01);
            CHECK(p <= 0.99);
        }
    }
    SUBCASE("pilot count is enforced") {
        EnvConfig env;
        CHECK_THROWS_AS(estimate_expected_pi(env, PolicyConfig{}, 10, 50, 7), std::domain_error);
    }
}

TEST_CASE("awls_asymptotic_variance") {
    SUBCASE("matching policies attain the Cauchy-Schwarz floor") {
        double s2 = 1.3, pi = 0.4;
        double cross = pi;  // sqrt(pi * pi)
        AwlsVariance v = awls_asymptotic_variance({&s2, 1}, {&pi, 1}, {&pi, 1}, {&cross, 1});
        CHECK(v.variance[0] == doctest::Approx(v.lower_bound[0]).epsilon(1e-12));
    }
    SUBCASE("worked example") {
        double s2 = 1.0, pi = 0.5, pieval = 0.5, cross = 0.4;
        AwlsVariance v =
            awls_asymptotic_variance({&s2, 1}, {&pi, 1}, {&pieval, 1}, {&cross, 1});
        CHECK(v.variance[0] == doctest::Approx(3.125).epsilon(1e-12));
        CHECK(v.lower_bound[0] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(v.variance[0] >= v.lower_bound[0]);
    }
    SUBCASE("inconsistent averages are rejected") {
        double s2 = 1.0, pi = 0.5, pieval = 0.5, cross = 0.9;  // > sqrt(pi*pieval)
        CHECK_THROWS_AS(awls_asymptotic_variance({&s2, 1}, {&pi, 1}, {&pieval, 1}, {&cross, 1}),
                        std::domain_error);
        double bad = -1.0;
        CHECK_THROWS_AS(awls_asymptotic_variance({&bad, 1}, {&pi, 1}, {&pieval, 1}, {&cross, 1}),
                        std::domain_error);
    }
}

TEST_CASE("eval policy csv round trip") {
    EvalPolicy table = EvalPolicy::expected_pi({0.5, 0.013, 0.98765432101234567, 0.25});
    std::ostringstream out;
    write_eval_policy_csv(table, out);
    CHECK(out.str().substr(0, out.str().find('\n')) == "t,pi_eval_arm1");
    std::istringstream in(out.str());
    EvalPolicy back = read_eval_policy_csv(in);
    REQUIRE(back.table.size() == table.table.size());
    for (size_t i = 0; i < table.table.size(); ++i) CHECK(back.table[i] == table.table[i]);
    std::istringstream bad("t,wrong\n1,0.5\n");
    CHECK_THROWS_AS(read_eval_policy_csv(bad), std::invalid_argument);
}
