#pragma once

#include <vector>

#include "banditlab/estimators.hpp"
#include "banditlab/statfn.hpp"

// Confidence regions: Hotelling-style ellipsoids, coordinate projections,
// self-normalized martingale balls, membership, volumes, and empirical
// cutoff calibration.

namespace banditlab {

/// Region {theta : (center - theta)' Q (center - theta) <= cutoff}, Q SPD.
struct Ellipsoid {
    Vector center;
    Matrix shape;  // Q
    double cutoff = 1.0;
};

/// Region {theta : ||center - theta||_V <= radius}, V SPD.
struct NormBall {
    Vector center;
    Matrix metric;  // V
    double radius = 0.0;
    bool radius_clamped = false;
};

/// Hotelling ellipsoid: Q = T * bread' meat^{-1} bread with the
/// d(T-1)/(T-d) F_{d,T-d}(1-alpha) cutoff.
Ellipsoid hotelling_region(const EstimatorReport& report, double alpha);

/// Sub-block region for the last p coordinates: Q = cov_block^{-1} for the
/// given covariance of (theta_hat - theta) restricted to those coordinates,
/// with the p-dimensional Hotelling cutoff.
Ellipsoid subblock_region(const Vector& theta_hat, const Matrix& covariance, int keep_last,
                          long T, double alpha);

/// Projection of the ellipsoid onto its last keep_last coordinates via the
/// Schur complement of the normalized shape; the result has cutoff 1.
Ellipsoid project_ellipsoid(const Ellipsoid& region, int keep_last);

NormBall self_normalized_region(const Vector& theta_ridge, const Matrix& v_t, double alpha,
                                double lambda = 1.0, double sigma = 1.0, double s_bound = 6.0);

/// NormBall as an ellipsoid (Q = V, cutoff = radius^2) for shared volume math.
Ellipsoid to_ellipsoid(const NormBall& ball);

bool contains(const Ellipsoid& region, const Vector& theta);
bool contains(const NormBall& region, const Vector& theta);

/// Quadratic form (center - theta)' Q (center - theta); membership statistic.
double ellipsoid_statistic(const Ellipsoid& region, const Vector& theta);

double ellipsoid_volume(const Ellipsoid& region);

/// Empirical (1-alpha) quantile of a statistic sample, nearest rank.
double calibrate_cutoff(std::vector<double> statistics, double alpha);

}  // namespace banditlab
