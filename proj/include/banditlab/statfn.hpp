#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <vector>

// Self-contained numerics kit: special functions, quantiles, small dense
// SPD linear algebra, and deterministic random streams. Dimensions never
// exceed ~16 in this library, so everything is plain and unblocked.

namespace banditlab {

using Vector = std::vector<double>;

struct NotPositiveDefinite : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Special functions and quantiles
// ---------------------------------------------------------------------------

/// Standard normal CDF, accurate to ~1e-15 via the complementary error function.
double normal_cdf(double x);

/// Standard normal density.
double normal_pdf(double x);

/// Inverse standard normal CDF on (0,1). Rational initial guess refined by
/// Halley steps so that normal_cdf(normal_quantile(p)) == p to ~1e-14.
double normal_quantile(double p);

/// Regularized lower incomplete gamma P(a,x), series/continued-fraction split.
double regularized_gamma_p(double a, double x);

/// Regularized incomplete beta I_x(a,b) via Lentz continued fraction.
double regularized_beta(double a, double b, double x);

/// Chi-square quantile: x with P(d/2, x/2) = p.
double chi2_quantile(int d, double p);

/// F distribution quantile with d1, d2 degrees of freedom.
double f_quantile(int d1, int d2, double p);

// ---------------------------------------------------------------------------
// Small dense matrices
// ---------------------------------------------------------------------------

class Matrix {
  public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0);
    static Matrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

    Matrix& operator+=(const Matrix& other);
    Matrix& operator*=(double s);

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

  private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> a_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Vector operator*(const Matrix& a, const Vector& x);
Matrix transpose(const Matrix& a);

double trace(const Matrix& a);
double max_abs(const Matrix& a);
bool is_symmetric(const Matrix& a, double rel_tol = 1e-9);

/// A += w * z z^T (symmetric rank-1 update).
void add_outer(Matrix& a, const Vector& z, double w = 1.0);

/// v^T q v.
double quad_form(const Matrix& q, const Vector& v);

/// Lower-triangular L with L L^T = m. Verifies symmetry (1e-9 relative) and
/// throws NotPositiveDefinite when a pivot falls at or below 1e-12 * trace.
Matrix cholesky(const Matrix& m);

Vector solve_spd(const Matrix& m, const Vector& rhs);
Matrix solve_spd(const Matrix& m, const Matrix& rhs);
Matrix inverse_spd(const Matrix& m);

/// log det of an SPD matrix via its Cholesky factor.
double log_det_spd(const Matrix& m);

/// Eigenvalues of a symmetric matrix (ascending), cyclic Jacobi rotations.
Vector symmetric_eigenvalues(Matrix m);

// Vector helpers.
double dot(const Vector& a, const Vector& b);
double norm2_squared(const Vector& a);
Vector operator-(const Vector& a, const Vector& b);
Vector operator+(const Vector& a, const Vector& b);
Vector operator*(double s, Vector a);

// ---------------------------------------------------------------------------
// Deterministic random streams and samplers
// ---------------------------------------------------------------------------

/// 64-bit mixing (splitmix64 finalizer); chains a list of labels into one seed.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> parts);

/// Reproducible random stream: the sample sequence depends only on
/// (master_seed, stream_id), never on scheduling. Single-owner, movable.
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t stream_id() const { return stream_id_; }

    /// Uniform draw strictly inside (0,1).
    double next_u01();
    std::uint64_t next_u64();

  private:
    std::mt19937_64 gen_;
    std::uint64_t stream_id_;
};

double sample_std_normal(RngStream& rng);
double sample_uniform(RngStream& rng, double lo, double hi);
/// Student t as N(0,1)/sqrt(chi2_df/df), chi2 from df squared normals.
double sample_t(int df, RngStream& rng);
/// Poisson by inversion with sequential search; fine for the small means here.
long sample_poisson(double lambda, RngStream& rng);
int sample_bernoulli(double p, RngStream& rng);

}  // namespace banditlab
