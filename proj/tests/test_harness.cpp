#include <doctest.h>

#include <cmath>

#include "banditlab/harness.hpp"

using namespace banditlab;

namespace {

bool cells_bitwise_equal(const McSummary& a, const McSummary& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        const McCell& x = a[i];
        const McCell& y = b[i];
        if (x.estimator != y.estimator || x.T != y.T || x.n_reps != y.n_reps) return false;
        if (x.coverage != y.coverage || x.coverage_se != y.coverage_se) return false;
        if (x.mean_volume != y.mean_volume || x.volume_se != y.volume_se) return false;
        if (x.mse != y.mse || x.mse_se != y.mse_se) return false;
        if (x.calibrated != y.calibrated || x.failures != y.failures) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("run_replication") {
    ExperimentSpec spec;
    spec.estimators = {EstimatorKind::Ols, EstimatorKind::AwLs, EstimatorKind::SelfNormalized};
    spec.t_grid = {60};
    spec.n_reps = 4;
    HorizonContext ctx = make_horizon_context(spec, 60);

    SUBCASE("identical inputs give identical records") {
        RepRecord a = run_replication(spec, ctx, 2);
        RepRecord b = run_replication(spec, ctx, 2);
        CHECK(a.allocation == b.allocation);
        REQUIRE(a.outcomes.size() == b.outcomes.size());
        for (size_t i = 0; i < a.outcomes.size(); ++i) {
            CHECK(a.outcomes[i].statistic == b.outcomes[i].statistic);
            CHECK(a.outcomes[i].base_volume == b.outcomes[i].base_volume);
            CHECK(a.outcomes[i].sq_error == b.outcomes[i].sq_error);
        }
    }
    SUBCASE("non-adaptive uniform logging makes ols and aw-ls coincide") {
        ExperimentSpec fixed = spec;
        fixed.policy.kind = PolicyKind::UniformFixed;
        fixed.estimators = {EstimatorKind::Ols, EstimatorKind::AwLs};
        HorizonContext fctx = make_horizon_context(fixed, 60);
        RepRecord rec = run_replication(fixed, fctx, 0);
        // Weights are exactly one, so the squared errors agree to the bit.
        CHECK(rec.outcomes[0].sq_error == rec.outcomes[1].sq_error);
        CHECK(rec.outcomes[0].statistic == doctest::Approx(rec.outcomes[1].statistic));
    }
    SUBCASE("degenerate horizon flags failures without crashing") {
        ExperimentSpec tiny = spec;
        tiny.t_grid = {1};
        HorizonContext tctx = make_horizon_context(tiny, 1);
        RepRecord rec = run_replication(tiny, tctx, 0);
        CHECK(rec.outcomes[0].failed);  // T=1 < d: singular design
        CHECK(rec.outcomes[1].failed);
        CHECK_FALSE(rec.outcomes[2].failed);  // the ridge fit always exists
    }
}

TEST_CASE("summarize") {
    ExperimentSpec spec;
    spec.estimators = {EstimatorKind::AwLs};
    spec.t_grid = {100};
    spec.alpha = 0.1;

    auto make_records = [&](const std::vector<double>& stats, double cutoff) {
        std::vector<RepRecord> recs(stats.size());
        for (size_t i = 0; i < stats.size(); ++i) {
            recs[i].T = 100;
            recs[i].rep = static_cast<int>(i);
            RegionOutcome out;
            out.statistic = stats[i];
            out.cutoff = cutoff;
            out.covered = stats[i] <= cutoff;
            out.base_volume = 1.0;
            out.dim = 6;
            out.sq_error = stats[i];
            recs[i].outcomes = {out};
        }
        return recs;
    };

    SUBCASE("all contained") {
        spec.n_reps = 50;
        McSummary s = summarize(spec, {make_records(std::vector<double>(50, 1.0), 2.0)});
        CHECK(s[0].coverage == 1.0);
        CHECK(s[0].coverage_se == 0.0);
        CHECK_FALSE(s[0].calibrated);
    }
    SUBCASE("half contained") {
        spec.n_reps = 100;
        std::vector<double> stats(100, 1.0);
        for (int i = 0; i < 50; ++i) stats[i] = 3.0;
        McSummary s = summarize(spec, {make_records(stats, 2.0)});
        CHECK(s[0].coverage == doctest::Approx(0.5));
        CHECK(s[0].coverage_se == doctest::Approx(0.05));
        CHECK(s[0].calibrated);  // undercovers, so volumes recalibrate
        CHECK(s[0].calibrated_cutoff == 3.0);
    }
    SUBCASE("chi-square statistics cover at the nominal rate") {
        spec.n_reps = 10000;
        RngStream rng(900, 0);
        std::vector<double> stats(10000);
        for (double& s : stats) {
            s = 0.0;
            for (int i = 0; i < 6; ++i) {
                double z = sample_std_normal(rng);
                s += z * z;
            }
        }
        McSummary s = summarize(spec, {make_records(stats, chi2_quantile(6, 0.9))});
        CHECK(std::fabs(s[0].coverage - 0.9) < 3.0 * 0.003);
    }
    SUBCASE("insufficient data is flagged") {
        spec.n_reps = 2;
        auto recs = make_records({1.0, 1.0}, 2.0);
        recs[0].outcomes[0].failed = true;
        recs[1].outcomes[0].failed = true;
        McSummary s = summarize(spec, {recs});
        CHECK(s[0].insufficient);
        CHECK(has_insufficient(s));
    }
}

TEST_CASE("summaries are identical across worker counts") {
    ExperimentSpec spec;
    spec.estimators = {EstimatorKind::Ols, EstimatorKind::AwLs, EstimatorKind::WDecorrelated};
    spec.t_grid = {40, 80};
    spec.n_reps = 24;
    spec.wdec_pilot_reps = 20;
    spec.threads = 1;
    McSummary serial = run_experiment(spec);
    spec.threads = 4;
    McSummary parallel = run_experiment(spec);
    CHECK(cells_bitwise_equal(serial, parallel));
}

TEST_CASE("ks distance recognizes normal and non-normal samples") {
    RngStream rng(901, 0);
    std::vector<double> normal(4000), bimodal(4000);
    for (int i = 0; i < 4000; ++i) {
        normal[i] = 2.0 * sample_std_normal(rng);
        bimodal[i] = (i % 2 == 0 ? 3.0 : -3.0) + 0.3 * sample_std_normal(rng);
    }
    CHECK(ks_distance_to_fitted_normal(normal) < 0.025);
    CHECK(ks_distance_to_fitted_normal(bimodal) > 0.2);
}

TEST_CASE("zstat_experiment under independent sampling stays near normal") {
    MabSpec spec;
    spec.T = 400;
    spec.n_reps = 2000;
    spec.policy.kind = PolicyKind::UniformFixed;
    spec.master_seed = 902;
    ZstatResult result = zstat_experiment(spec);
    CHECK(result.failures == 0);
    CHECK(result.ks_ols < 0.03);
    CHECK(result.ks_awls < 0.03);
    CHECK(std::fabs(result.ks_ols - result.ks_awls) < 0.02);
}

TEST_CASE("allocation_experiment") {
    SUBCASE("independent sampling matches the binomial variance") {
        MabSpec spec;
        spec.T = 100;
        spec.n_reps = 4000;
        spec.policy.kind = PolicyKind::UniformFixed;
        spec.master_seed = 903;
        AllocationResult result = allocation_experiment(spec);
        CHECK(std::fabs(result.mean - 0.5) < 0.005);
        CHECK(result.variance > 0.0020);
        CHECK(result.variance < 0.0030);
        long total = 0;
        for (long c : result.histogram) total += c;
        CHECK(total == spec.n_reps);
    }
    SUBCASE("thompson sampling spreads out at zero margin") {
        MabSpec spec;
        spec.T = 100;
        spec.n_reps = 2000;
        spec.master_seed = 904;
        AllocationResult result = allocation_experiment(spec);
        CHECK(result.variance > 4.0 * 0.25 / spec.T);
    }
    SUBCASE("ts-hodges concentrates at zero margin") {
        MabSpec spec;
        spec.T = 2000;
        spec.n_reps = 600;
        spec.master_seed = 905;
        spec.policy.kind = PolicyKind::TsHodges;
        AllocationResult hodges = allocation_experiment(spec);
        spec.policy.kind = PolicyKind::ThompsonSampling;
        AllocationResult ts = allocation_experiment(spec);
        CHECK(std::fabs(hodges.mean - 0.5) < 0.01);
        CHECK(ts.variance > 4.0 * hodges.variance);
    }
}

TEST_CASE("uniformity_experiment under independent sampling is nominal") {
    MabSpec base;
    base.T = 500;
    base.n_reps = 800;
    base.master_seed = 906;
    auto cells = uniformity_experiment(base, {0.0, 1.0}, {PolicyKind::UniformFixed}, 0.1);
    for (const UniformityCell& cell : cells) {
        CHECK(cell.coverage > 0.87);
        CHECK(cell.coverage < 0.93);
    }
}

TEST_CASE("evalpolicy_experiment orders the two evaluation policies") {
    MabSpec spec;
    spec.delta = 1.0;
    spec.T = 500;
    spec.n_reps = 600;
    spec.master_seed = 907;
    auto cells = evalpolicy_experiment(spec, 150);
    REQUIRE(cells.size() == 4);
    // The gain shows on the full estimator (the scarce arm dominates the MSE).
    double uniform_mse = 0.0, expected_mse = 0.0;
    for (const PievalCell& cell : cells) {
        CHECK(cell.formula_variance >= cell.lower_bound - 1e-12);
        (cell.eval_policy == "uniform" ? uniform_mse : expected_mse) += cell.t_mse;
    }
    CHECK(expected_mse <= uniform_mse);
}
