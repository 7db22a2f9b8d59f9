#include "banditlab/regions.hpp"

#include <algorithm>
#include <cmath>

namespace banditlab {

Ellipsoid hotelling_region(const EstimatorReport& report, double alpha) {
    const int d = static_cast<int>(report.theta_hat.size());
    const long T = report.T;
    if (T <= d) throw std::domain_error("hotelling_region: need T > d");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("hotelling_region: bad alpha");
    Matrix meat_inv_bread;
    try {
        meat_inv_bread = solve_spd(report.meat, report.bread);
    } catch (const NotPositiveDefinite& e) {
        throw SingularDesign(std::string("hotelling_region: ") + e.what());
    }
    Ellipsoid region;
    region.center = report.theta_hat;
    region.shape = static_cast<double>(T) * (transpose(report.bread) * meat_inv_bread);
    double dd = static_cast<double>(d);
    double tt = static_cast<double>(T);
    region.cutoff = dd * (tt - 1.0) / (tt - dd) * f_quantile(d, static_cast<int>(T - d), 1.0 - alpha);
    return region;
}

Ellipsoid subblock_region(const Vector& theta_hat, const Matrix& covariance, int keep_last,
                          long T, double alpha) {
    const int d = static_cast<int>(theta_hat.size());
    if (keep_last < 1 || keep_last > d) throw std::domain_error("subblock_region: bad keep_last");
    if (covariance.rows() != d) throw std::invalid_argument("subblock_region: shape mismatch");
    Matrix block(keep_last, keep_last);
    for (int i = 0; i < keep_last; ++i)
        for (int j = 0; j < keep_last; ++j)
            block(i, j) = covariance(d - keep_last + i, d - keep_last + j);
    Ellipsoid region;
    region.center.assign(theta_hat.end() - keep_last, theta_hat.end());
    region.shape = inverse_spd(block);
    double p = static_cast<double>(keep_last);
    double tt = static_cast<double>(T);
    if (T <= keep_last) throw std::domain_error("subblock_region: need T > keep_last");
    region.cutoff =
        p * (tt - 1.0) / (tt - p) * f_quantile(keep_last, static_cast<int>(T - keep_last), 1.0 - alpha);
    return region;
}

Ellipsoid project_ellipsoid(const Ellipsoid& region, int keep_last) {
    const int d = static_cast<int>(region.center.size());
    if (keep_last < 1 || keep_last >= d) {
        throw std::domain_error("project_ellipsoid: need 1 <= keep_last < d");
    }
    const int q = d - keep_last;
    // Normalize to x' B x = 1, then Schur-complement out the first q coords.
    Matrix c(q, q);
    Matrix dmat(q, keep_last);
    Matrix e(keep_last, keep_last);
    const double inv_cut = 1.0 / region.cutoff;
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < q; ++j) c(i, j) = region.shape(i, j) * inv_cut;
    for (int i = 0; i < q; ++i)
        for (int j = 0; j < keep_last; ++j) dmat(i, j) = region.shape(i, q + j) * inv_cut;
    for (int i = 0; i < keep_last; ++i)
        for (int j = 0; j < keep_last; ++j) e(i, j) = region.shape(q + i, q + j) * inv_cut;
    Matrix c_inv_d = solve_spd(c, dmat);
    Matrix schur = e;
    Matrix dt_cinv_d = transpose(dmat) * c_inv_d;
    for (int i = 0; i < keep_last; ++i)
        for (int j = 0; j < keep_last; ++j) schur(i, j) -= dt_cinv_d(i, j);
    Ellipsoid out;
    out.center.assign(region.center.end() - keep_last, region.center.end());
    out.shape = std::move(schur);
    out.cutoff = 1.0;
    return out;
}

NormBall self_normalized_region(const Vector& theta_ridge, const Matrix& v_t, double alpha,
                                double lambda, double sigma, double s_bound) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("self_normalized_region: bad alpha");
    const int d = static_cast<int>(theta_ridge.size());
    NormBall ball;
    ball.center = theta_ridge;
    ball.metric = v_t;
    double log_arg = 0.5 * log_det_spd(v_t) - 0.5 * d * std::log(lambda) - std::log(alpha);
    if (log_arg < 0.0) {
        log_arg = 0.0;
        ball.radius_clamped = true;
    }
    ball.radius = sigma * std::sqrt(2.0 * log_arg) + std::sqrt(lambda) * s_bound;
    return ball;
}

Ellipsoid to_ellipsoid(const NormBall& ball) {
    return Ellipsoid{ball.center, ball.metric, ball.radius * ball.radius};
}

double ellipsoid_statistic(const Ellipsoid& region, const Vector& theta) {
    if (theta.size() != region.center.size()) {
        throw std::invalid_argument("ellipsoid_statistic: dimension mismatch");
    }
    return quad_form(region.shape, region.center - theta);
}

bool contains(const Ellipsoid& region, const Vector& theta) {
    return ellipsoid_statistic(region, theta) <= region.cutoff;
}

bool contains(const NormBall& region, const Vector& theta) {
    if (theta.size() != region.center.size()) {
        throw std::invalid_argument("contains: dimension mismatch");
    }
    return std::sqrt(quad_form(region.metric, region.center - theta)) <= region.radius;
}

double ellipsoid_volume(const Ellipsoid& region) {
    const int d = static_cast<int>(region.center.size());
    double dd = static_cast<double>(d);
    double unit_ball = std::pow(M_PI, 0.5 * dd) / std::exp(std::lgamma(0.5 * dd + 1.0));
    return unit_ball * std::pow(region.cutoff, 0.5 * dd) * std::exp(-0.5 * log_det_spd(region.shape));
}

double calibrate_cutoff(std::vector<double> statistics, double alpha) {
    if (statistics.empty()) throw std::invalid_argument("calibrate_cutoff: empty sample");
    std::sort(statistics.begin(), statistics.end());
    double n = static_cast<double>(statistics.size());
    size_t rank = static_cast<size_t>(std::ceil((1.0 - alpha) * n));
    rank = std::min(std::max<size_t>(rank, 1), statistics.size());
    return statistics[rank - 1];
}

}  // namespace banditlab
