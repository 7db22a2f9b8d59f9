#include "banditlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace banditlab {

namespace {

double max_abs_norm(const Vector& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

// Fitted linear predictors past this magnitude mean a GLM fit is running off
// to a boundary (complete separation for Bernoulli, blown-up means for
// Poisson); the score can dip below any tolerance out there.
constexpr double kSaturationBound = 18.0;

}  // namespace

double sqrt_importance_weight(double pi_eval, double pi_logged) {
    if (!(pi_eval > 0.0 && pi_eval <= 1.0) || !(pi_logged > 0.0 && pi_logged <= 1.0)) {
        throw std::domain_error("sqrt_importance_weight: probabilities must lie in (0,1]");
    }
    return std::sqrt(pi_eval / pi_logged);
}

EstimatorReport aw_least_squares(std::span<const DesignRow> rows) {
    if (rows.empty()) throw std::invalid_argument("aw_least_squares: no rows");
    const int d = static_cast<int>(rows.front().z.size());
    const double T = static_cast<double>(rows.size());

    Matrix gram_w(d, d);
    Vector rhs(d, 0.0);
    for (const DesignRow& row : rows) {
        if (!(row.w > 0.0)) throw std::domain_error("aw_least_squares: weights must be positive");
        add_outer(gram_w, row.z, row.w);
        for (int i = 0; i < d; ++i) rhs[i] += row.w * row.z[i] * row.reward;
    }

    EstimatorReport rep;
    try {
        rep.theta_hat = solve_spd(gram_w, rhs);
    } catch (const NotPositiveDefinite& e) {
        throw SingularDesign(std::string("aw_least_squares: ") + e.what());
    }

    double rss = 0.0;
    rep.meat = Matrix(d, d);
    for (const DesignRow& row : rows) {
        double resid = row.reward - dot(row.z, rep.theta_hat);
        rss += resid * resid;
        add_outer(rep.meat, row.z, row.w * row.w);
    }
    rep.sigma2_hat = rss / T;
    rep.meat *= rep.sigma2_hat / T;
    rep.bread = (1.0 / T) * gram_w;
    rep.T = rows.size();
    rep.converged = true;
    rep.iterations = 0;
    return rep;
}

EstimatorReport aw_mle_glm(std::span<const DesignRow> rows, const GlmFamily& family,
                           const Vector& init, int max_iter, double tol) {
    if (rows.empty()) throw std::invalid_argument("aw_mle_glm: no rows");
    const int d = static_cast<int>(rows.front().z.size());
    const double T = static_cast<double>(rows.size());
    Vector theta = init.empty() ? Vector(d, 0.0) : init;
    if (static_cast<int>(theta.size()) != d) {
        throw std::invalid_argument("aw_mle_glm: init dimension mismatch");
    }

    double max_abs_nu = 0.0;
    auto score_at = [&](const Vector& th) {
        Vector s(d, 0.0);
        max_abs_nu = 0.0;
        for (const DesignRow& row : rows) {
            double nu = dot(row.z, th);
            max_abs_nu = std::max(max_abs_nu, std::fabs(nu));
            double resid = row.reward - family.b_prime(nu);
            for (int i = 0; i < d; ++i) s[i] += row.w * resid * row.z[i];
        }
        return s;
    };
    auto check_saturation = [&]() {
        if (family.tag != Family::GaussianT5 && max_abs_nu > kSaturationBound) {
            throw NonConvergence("aw_mle_glm: linear predictor saturated (separation)");
        }
    };

    Vector score = score_at(theta);
    double score_norm = max_abs_norm(score);
    check_saturation();
    int iter = 0;
    for (; iter < max_iter && score_norm > tol; ++iter) {
        Matrix hess(d, d);  // negated: sum w b'' z z'
        for (const DesignRow& row : rows) {
            add_outer(hess, row.z, row.w * family.b_double_prime(dot(row.z, theta)));
        }
        Vector step;
        try {
            step = solve_spd(hess, score);
        } catch (const NotPositiveDefinite& e) {
            throw SingularHessian(std::string("aw_mle_glm: ") + e.what());
        }
        // Halve the step until the score norm stops increasing.
        double scale = 1.0;
        bool accepted = false;
        for (int h = 0; h < 30; ++h) {
            Vector candidate = theta + scale * step;
            Vector cand_score = score_at(candidate);
            double cand_norm = max_abs_norm(cand_score);
            if (std::isfinite(cand_norm) && (cand_norm < score_norm || cand_norm <= tol)) {
                theta = std::move(candidate);
                score = std::move(cand_score);
                score_norm = cand_norm;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if (!accepted) {
            throw NonConvergence("aw_mle_glm: step halving exhausted");
        }
        check_saturation();
    }
    if (score_norm > tol) {
        throw NonConvergence("aw_mle_glm: no convergence after " + std::to_string(max_iter) +
                             " iterations");
    }

    EstimatorReport rep;
    rep.theta_hat = theta;
    rep.bread = Matrix(d, d);
    rep.meat = Matrix(d, d);
    for (const DesignRow& row : rows) {
        double bpp = family.b_double_prime(dot(row.z, theta));
        add_outer(rep.bread, row.z, row.w * bpp);
        add_outer(rep.meat, row.z, row.w * row.w * bpp);
    }
    rep.bread *= 1.0 / T;
    rep.meat *= 1.0 / T;
    rep.sigma2_hat = std::numeric_limits<double>::quiet_NaN();
    rep.T = rows.size();
    rep.converged = true;
    rep.iterations = iter;
    return rep;
}

WDecorrelated w_decorrelated(std::span<const DesignRow> rows, double lambda_t,
                             const Vector& theta_ls, double sigma2_hat) {
    if (!(lambda_t > 0.0)) throw std::domain_error("w_decorrelated: lambda_t must be positive");
    const int d = static_cast<int>(theta_ls.size());
    Matrix residual_proj = Matrix::identity(d);  // I - sum_{s<t} w_s z_s'
    WDecorrelated out;
    out.theta = theta_ls;
    out.variance = Matrix(d, d);
    for (const DesignRow& row : rows) {
        if (static_cast<int>(row.z.size()) != d) {
            throw std::invalid_argument("w_decorrelated: dimension mismatch");
        }
        Vector w = (1.0 / (lambda_t + norm2_squared(row.z))) * (residual_proj * row.z);
        double resid = row.reward - dot(row.z, theta_ls);
        for (int i = 0; i < d; ++i) out.theta[i] += w[i] * resid;
        add_outer(out.variance, w);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) residual_proj(i, j) -= w[i] * row.z[j];
    }
    out.variance *= sigma2_hat;
    return out;
}

double select_lambda_t(std::vector<double> pilot_gram_min_eigs, long T) {
    if (pilot_gram_min_eigs.empty()) {
        throw std::domain_error("select_lambda_t: empty pilot list");
    }
    if (static_cast<double>(T) <= std::exp(1.0)) {
        throw std::domain_error("select_lambda_t: T must exceed e");
    }
    std::sort(pilot_gram_min_eigs.begin(), pilot_gram_min_eigs.end());
    size_t n = pilot_gram_min_eigs.size();
    size_t rank = static_cast<size_t>(std::ceil(0.01 * static_cast<double>(n)));
    rank = std::max<size_t>(rank, 1);
    return pilot_gram_min_eigs[rank - 1] / std::log(static_cast<double>(T));
}

RidgeEstimate ridge_estimator(std::span<const DesignRow> rows, int dim, double lambda) {
    if (!(lambda > 0.0)) throw std::domain_error("ridge_estimator: lambda must be positive");
    RidgeEstimate out;
    out.v = lambda * Matrix::identity(dim);
    Vector rhs(dim, 0.0);
    for (const DesignRow& row : rows) {
        if (static_cast<int>(row.z.size()) != dim) {
            throw std::invalid_argument("ridge_estimator: dimension mismatch");
        }
        add_outer(out.v, row.z);
        for (int i = 0; i < dim; ++i) rhs[i] += row.z[i] * row.reward;
    }
    out.theta = solve_spd(out.v, rhs);
    return out;
}

}  // namespace banditlab
