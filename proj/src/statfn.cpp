#include "banditlab/statfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace banditlab {

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

namespace {

// Acklam's rational approximation to the normal quantile, |rel err| < 1.15e-9.
double normal_quantile_estimate(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("normal_quantile: p must lie in (0,1)");
    }
    double x = normal_quantile_estimate(p);
    // Two Halley refinements drive the residual to rounding level.
    for (int i = 0; i < 2; ++i) {
        double e = normal_cdf(x) - p;
        double u = e / normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double regularized_gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0) {
        throw std::domain_error("regularized_gamma_p: need a > 0, x >= 0");
    }
    if (x == 0.0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        // Series representation.
        double ap = a;
        double sum = 1.0 / a;
        double del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    // Continued fraction for Q(a,x), modified Lentz.
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

namespace {

double beta_cont_frac(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h;
}

}  // namespace

double regularized_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) {
        throw std::domain_error("regularized_beta: need a, b > 0");
    }
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cont_frac(a, b, x) / a;
    }
    return 1.0 - front * beta_cont_frac(b, a, 1.0 - x) / b;
}

double chi2_quantile(int d, double p) {
    if (d < 1 || !(p > 0.0 && p < 1.0)) {
        throw std::domain_error("chi2_quantile: need d >= 1 and p in (0,1)");
    }
    const double a = 0.5 * d;
    auto cdf = [a](double x) { return regularized_gamma_p(a, 0.5 * x); };
    double hi = std::max(1.0, static_cast<double>(d));
    while (cdf(hi) < p) hi *= 2.0;
    double lo = 0.0;
    for (int i = 0; i < 200 && (hi - lo) > 1e-14 * std::max(1.0, hi); ++i) {
        double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double f_quantile(int d1, int d2, double p) {
    if (d1 < 1 || d2 < 1 || !(p > 0.0 && p < 1.0)) {
        throw std::domain_error("f_quantile: need d1,d2 >= 1 and p in (0,1)");
    }
    // F cdf at x is I_u(d1/2, d2/2) with u = d1 x / (d1 x + d2); bisect in u.
    const double a = 0.5 * d1;
    const double b = 0.5 * d2;
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 200 && (hi - lo) > 1e-16; ++i) {
        double mid = 0.5 * (lo + hi);
        (regularized_beta(a, b, mid) < p ? lo : hi) = mid;
    }
    double u = 0.5 * (lo + hi);
    return d2 * u / (d1 * (1.0 - u));
}

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("Matrix: negative shape");
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    if (!same_shape(other)) throw std::invalid_argument("Matrix +=: shape mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += other.a_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) {
    a += b;
    return a;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("Matrix *: shape mismatch");
    Matrix out(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Matrix operator*(double s, Matrix a) {
    a *= s;
    return a;
}

Vector operator*(const Matrix& a, const Vector& x) {
    if (a.cols() != static_cast<int>(x.size())) {
        throw std::invalid_argument("Matrix * vector: shape mismatch");
    }
    Vector out(a.rows(), 0.0);
    for (int i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
        out[i] = s;
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

double trace(const Matrix& a) {
    double s = 0.0;
    for (int i = 0; i < std::min(a.rows(), a.cols()); ++i) s += a(i, i);
    return s;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::fabs(a(i, j)));
    return m;
}

bool is_symmetric(const Matrix& a, double rel_tol) {
    if (a.rows() != a.cols()) return false;
    double scale = max_abs(a);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = i + 1; j < a.cols(); ++j)
            if (std::fabs(a(i, j) - a(j, i)) > rel_tol * std::max(scale, 1e-300)) return false;
    return true;
}

void add_outer(Matrix& a, const Vector& z, double w) {
    int n = static_cast<int>(z.size());
    if (a.rows() != n || a.cols() != n) throw std::invalid_argument("add_outer: shape mismatch");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) += w * z[i] * z[j];
}

double quad_form(const Matrix& q, const Vector& v) {
    return dot(v, q * v);
}

Matrix cholesky(const Matrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("cholesky: matrix not square");
    if (!is_symmetric(m)) throw std::invalid_argument("cholesky: matrix not symmetric");
    const int n = m.rows();
    const double pivot_floor = 1e-12 * trace(m);
    Matrix l(n, n);
    for (int j = 0; j < n; ++j) {
        double d = m(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > pivot_floor)) {
            throw NotPositiveDefinite("cholesky: non-positive pivot at column " +
                                      std::to_string(j));
        }
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}

namespace {

Vector solve_with_factor(const Matrix& l, const Vector& rhs) {
    const int n = l.rows();
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        double s = rhs[i];
        for (int k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    Vector x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = y[i];
        for (int k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
        x[i] = s / l(i, i);
    }
    return x;
}

}  // namespace

Vector solve_spd(const Matrix& m, const Vector& rhs) {
    if (m.rows() != static_cast<int>(rhs.size())) {
        throw std::invalid_argument("solve_spd: shape mismatch");
    }
    return solve_with_factor(cholesky(m), rhs);
}

Matrix solve_spd(const Matrix& m, const Matrix& rhs) {
    if (m.rows() != rhs.rows()) throw std::invalid_argument("solve_spd: shape mismatch");
    Matrix l = cholesky(m);
    Matrix out(rhs.rows(), rhs.cols());
    Vector col(rhs.rows());
    for (int j = 0; j < rhs.cols(); ++j) {
        for (int i = 0; i < rhs.rows(); ++i) col[i] = rhs(i, j);
        Vector x = solve_with_factor(l, col);
        for (int i = 0; i < rhs.rows(); ++i) out(i, j) = x[i];
    }
    return out;
}

Matrix inverse_spd(const Matrix& m) {
    return solve_spd(m, Matrix::identity(m.rows()));
}

double log_det_spd(const Matrix& m) {
    Matrix l = cholesky(m);
    double s = 0.0;
    for (int i = 0; i < l.rows(); ++i) s += std::log(l(i, i));
    return 2.0 * s;
}

Vector symmetric_eigenvalues(Matrix m) {
    if (!is_symmetric(m, 1e-8)) {
        throw std::invalid_argument("symmetric_eigenvalues: matrix not symmetric");
    }
    const int n = m.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
        if (off < 1e-30 * std::max(1.0, max_abs(m) * max_abs(m))) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::fabs(m(p, q)) < 1e-300) continue;
                double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double mkp = m(k, p);
                    double mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (int k = 0; k < n; ++k) {
                    double mpk = m(p, k);
                    double mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    Vector eig(n);
    for (int i = 0; i < n; ++i) eig[i] = m(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

double dot(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2_squared(const Vector& a) {
    return dot(a, a);
}

Vector operator-(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vector -: size mismatch");
    Vector out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Vector operator+(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vector +: size mismatch");
    Vector out(a.size());
    for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Vector operator*(double s, Vector a) {
    for (double& v : a) v *= s;
    return a;
}

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x2545f4914f6cdd1dULL;
    for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
    return h;
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : gen_(mix64(mix64(master_seed) ^ mix64(stream_id))), stream_id_(stream_id) {}

double RngStream::next_u01() {
    // 53-bit mantissa shifted into (0,1); cannot hit either endpoint.
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::next_u64() {
    return gen_();
}

double sample_std_normal(RngStream& rng) {
    return normal_quantile(rng.next_u01());
}

double sample_uniform(RngStream& rng, double lo, double hi) {
    if (!(lo <= hi)) throw std::domain_error("sample_uniform: lo > hi");
    return lo + (hi - lo) * rng.next_u01();
}

double sample_t(int df, RngStream& rng) {
    if (df < 1) throw std::domain_error("sample_t: df must be >= 1");
    double z = sample_std_normal(rng);
    double chi2 = 0.0;
    for (int i = 0; i < df; ++i) {
        double n = sample_std_normal(rng);
        chi2 += n * n;
    }
    return z / std::sqrt(chi2 / df);
}

long sample_poisson(double lambda, RngStream& rng) {
    if (lambda < 0.0 || !std::isfinite(lambda)) {
        throw std::domain_error("sample_poisson: lambda must be finite and >= 0");
    }
    if (lambda == 0.0) return 0;
    if (lambda > 700.0) throw std::domain_error("sample_poisson: lambda too large");
    double u = rng.next_u01();
    double p = std::exp(-lambda);
    double cum = p;
    long k = 0;
    while (u > cum) {
        ++k;
        p *= lambda / static_cast<double>(k);
        cum += p;
        if (k > 100000) break;  // unreachable for the supported lambda range
    }
    return k;
}

int sample_bernoulli(double p, RngStream& rng) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("sample_bernoulli: p outside [0,1]");
    return rng.next_u01() < p ? 1 : 0;
}

}  // namespace banditlab
