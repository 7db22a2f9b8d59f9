#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "banditlab/env.hpp"
#include "banditlab/statfn.hpp"

// Point estimators on logged trajectories: adaptively weighted and plain
// least squares, weighted GLM maximum likelihood, the W-decorrelated
// estimator, and the ridge estimator backing self-normalized bounds.

namespace banditlab {

struct SingularDesign : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularHessian : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One observation prepared for estimation: feature vector z, adaptive
/// weight w = sqrt(pi_eval / pi_logged), the logged propensity of the taken
/// action, and the raw reward.
struct DesignRow {
    Vector z;
    double w = 1.0;
    double prob_logged = 1.0;
    double reward = 0.0;
};

struct EstimatorReport {
    Vector theta_hat;
    Matrix bread;  // (1/T) sum w b''(theta' z) z z'; b'' = 1 for least squares
    Matrix meat;   // (1/T) sum w^2 [sigma2 or b''] z z'
    double sigma2_hat = 0.0;
    long T = 0;
    bool converged = true;
    int iterations = 0;
};

double sqrt_importance_weight(double pi_eval, double pi_logged);

/// Closed-form weighted least squares with sandwich pieces. With all weights
/// equal to one this is ordinary least squares.
EstimatorReport aw_least_squares(std::span<const DesignRow> rows);

/// Root of the weighted GLM score 0 = sum w (r - b'(theta' z)) z, by Newton
/// iteration with step halving. Declares separation when the fitted linear
/// predictor saturates.
EstimatorReport aw_mle_glm(std::span<const DesignRow> rows, const GlmFamily& family,
                           const Vector& init, int max_iter = 100, double tol = 1e-10);

struct WDecorrelated {
    Vector theta;
    Matrix variance;  // sigma2 * sum of weight outer products
};

/// Sequential decorrelation of a least-squares fit; rows must be in time order.
WDecorrelated w_decorrelated(std::span<const DesignRow> rows, double lambda_t,
                             const Vector& theta_ls, double sigma2_hat);

/// 1st-percentile (nearest-rank) of pilot Gram minimum eigenvalues over log T.
double select_lambda_t(std::vector<double> pilot_gram_min_eigs, long T);

struct RidgeEstimate {
    Vector theta;
    Matrix v;  // lambda I + sum z z'
};

RidgeEstimate ridge_estimator(std::span<const DesignRow> rows, int dim, double lambda = 1.0);

}  // namespace banditlab
