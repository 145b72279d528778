#pragma once

// Fixed-size matrix and quadratic-form algebra for 2x2 / 3x3 mechanics.
//
// Matrices are row-major; Mat3 multiplies column vectors. A deformation
// gradient F has F(k, a) = d y_k / d x_a, i.e. its columns are the partial
// derivatives of y.

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>

#include "thinvolt/errors.hpp"

namespace thinvolt {

template <int N>
struct Vec {
    std::array<double, N> v{};

    constexpr Vec() = default;
    constexpr Vec(std::initializer_list<double> init) {
        int i = 0;
        for (double x : init) {
            if (i < N) v[i++] = x;
        }
    }

    constexpr double& operator[](int i) { return v[i]; }
    constexpr double operator[](int i) const { return v[i]; }

    static constexpr Vec unit(int i) {
        Vec e;
        e[i] = 1.0;
        return e;
    }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < N; ++i) v[i] += o.v[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < N; ++i) v[i] -= o.v[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (auto& x : v) x *= s;
        return *this;
    }
};

template <int R, int C>
struct Mat {
    std::array<double, R * C> a{};

    constexpr Mat() = default;
    // Row-major list of entries.
    constexpr Mat(std::initializer_list<double> init) {
        int i = 0;
        for (double x : init) {
            if (i < R * C) a[i++] = x;
        }
    }

    constexpr double& operator()(int i, int j) { return a[i * C + j]; }
    constexpr double operator()(int i, int j) const { return a[i * C + j]; }

    static constexpr Mat identity() {
        static_assert(R == C);
        Mat m;
        for (int i = 0; i < R; ++i) m(i, i) = 1.0;
        return m;
    }

    static constexpr Mat diag(const Vec<R>& d) {
        static_assert(R == C);
        Mat m;
        for (int i = 0; i < R; ++i) m(i, i) = d[i];
        return m;
    }

    Vec<R> col(int j) const {
        Vec<R> c;
        for (int i = 0; i < R; ++i) c[i] = (*this)(i, j);
        return c;
    }
    void set_col(int j, const Vec<R>& c) {
        for (int i = 0; i < R; ++i) (*this)(i, j) = c[i];
    }

    Mat& operator+=(const Mat& o) {
        for (int i = 0; i < R * C; ++i) a[i] += o.a[i];
        return *this;
    }
    Mat& operator-=(const Mat& o) {
        for (int i = 0; i < R * C; ++i) a[i] -= o.a[i];
        return *this;
    }
    Mat& operator*=(double s) {
        for (auto& x : a) x *= s;
        return *this;
    }
};

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;
using Mat2 = Mat<2, 2>;
using Mat3 = Mat<3, 3>;

// ---- elementwise arithmetic -------------------------------------------------

template <int N>
Vec<N> operator+(Vec<N> a, const Vec<N>& b) { return a += b; }
template <int N>
Vec<N> operator-(Vec<N> a, const Vec<N>& b) { return a -= b; }
template <int N>
Vec<N> operator-(Vec<N> a) { return a *= -1.0; }
template <int N>
Vec<N> operator*(double s, Vec<N> a) { return a *= s; }
template <int N>
Vec<N> operator*(Vec<N> a, double s) { return a *= s; }

template <int R, int C>
Mat<R, C> operator+(Mat<R, C> a, const Mat<R, C>& b) { return a += b; }
template <int R, int C>
Mat<R, C> operator-(Mat<R, C> a, const Mat<R, C>& b) { return a -= b; }
template <int R, int C>
Mat<R, C> operator-(Mat<R, C> a) { return a *= -1.0; }
template <int R, int C>
Mat<R, C> operator*(double s, Mat<R, C> a) { return a *= s; }
template <int R, int C>
Mat<R, C> operator*(Mat<R, C> a, double s) { return a *= s; }

template <int R, int K, int C>
Mat<R, C> operator*(const Mat<R, K>& a, const Mat<K, C>& b) {
    Mat<R, C> m;
    for (int i = 0; i < R; ++i)
        for (int k = 0; k < K; ++k) {
            const double aik = a(i, k);
            for (int j = 0; j < C; ++j) m(i, j) += aik * b(k, j);
        }
    return m;
}

template <int R, int C>
Vec<R> operator*(const Mat<R, C>& a, const Vec<C>& x) {
    Vec<R> y;
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < C; ++j) y[i] += a(i, j) * x[j];
    return y;
}

template <int R, int C>
Mat<C, R> transpose(const Mat<R, C>& a) {
    Mat<C, R> t;
    for (int i = 0; i < R; ++i)
        for (int j = 0; j < C; ++j) t(j, i) = a(i, j);
    return t;
}

template <int N>
double dot(const Vec<N>& a, const Vec<N>& b) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

// Frobenius inner product A : B.
template <int R, int C>
double ddot(const Mat<R, C>& a, const Mat<R, C>& b) {
    double s = 0.0;
    for (int i = 0; i < R * C; ++i) s += a.a[i] * b.a[i];
    return s;
}

template <int N>
double norm(const Vec<N>& a) { return std::sqrt(dot(a, a)); }

template <int R, int C>
double norm(const Mat<R, C>& a) { return std::sqrt(ddot(a, a)); }

template <int N>
double trace(const Mat<N, N>& a) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += a(i, i);
    return s;
}

template <int N>
Mat<N, N> sym(const Mat<N, N>& a) { return 0.5 * (a + transpose(a)); }

template <int N>
Mat<N, N> skew(const Mat<N, N>& a) { return 0.5 * (a - transpose(a)); }

template <int N, int M>
Mat<N, M> outer(const Vec<N>& a, const Vec<M>& b) {
    Mat<N, M> m;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < M; ++j) m(i, j) = a[i] * b[j];
    return m;
}

template <int R, int C>
bool all_finite(const Mat<R, C>& a) {
    for (double x : a.a)
        if (!std::isfinite(x)) return false;
    return true;
}

template <int N>
bool all_finite(const Vec<N>& a) {
    for (double x : a.v)
        if (!std::isfinite(x)) return false;
    return true;
}

// Throws InvariantError if any entry is NaN/Inf.
template <typename T>
const T& require_finite(const T& x, const char* what) {
    if (!all_finite(x)) throw InvariantError(std::string(what) + ": non-finite entry");
    return x;
}

// ---- 2x2 / 3x3 specifics ----------------------------------------------------

double det2(const Mat2& m);
Mat2 inverse2(const Mat2& m);

double det3(const Mat3& m);
Mat3 cofactor3(const Mat3& m);
// Throws DomainError for singular input.
Mat3 inverse3(const Mat3& m);

Vec3 cross(const Vec3& a, const Vec3& b);

// X° : embeds a 2x2 block into the upper-left of a zero 3x3 matrix.
Mat3 embed2(const Mat2& g);
// M_{2x2}: drops the last row and column.
Mat2 block2(const Mat3& m);

// Polar factor of F with det F > 0, via Newton's iteration X <- (X + X^{-T})/2.
Mat3 nearest_rotation(const Mat3& f);

// dist^2(F, SO(3)); total for any F.
double dist_SO3_sq(const Mat3& f);

// Ascending eigenvalues of a symmetric 3x3 matrix (cyclic Jacobi).
Vec3 sym_eigenvalues3(const Mat3& s);
// Eigen-decomposition s = Q diag(lambda) Q^T; columns of Q are eigenvectors.
void sym_eigen3(const Mat3& s, Vec3& lambda, Mat3& q);

// Lower-triangular L with L L^T = S. Throws DegeneracyError if S is not SPD.
Mat3 cholesky3(const Mat3& s);

// Rotation about unit axis by angle (Rodrigues).
Mat3 axis_angle(const Vec3& axis, double angle);

// ---- general small symmetric eigenproblems ---------------------------------

// Cyclic Jacobi on a symmetric n x n matrix stored row-major (n <= 9).
// Returns eigenvalues in ascending order; `a` is destroyed.
template <int N>
std::array<double, N> jacobi_eigenvalues(std::array<double, N * N> a);

// ---- quadratic forms --------------------------------------------------------

// Symmetric 9x9 form on row-major vec(H): Q(H) = vec(H)^T A vec(H).
class QuadForm3 {
public:
    QuadForm3() = default;
    // A is symmetrized on construction; non-finite entries are rejected.
    explicit QuadForm3(const std::array<double, 81>& coeffs);

    double operator()(const Mat3& h) const;
    // Bilinear form B(H, K) with B(H, H) = Q(H).
    double bilinear(const Mat3& h, const Mat3& k) const;
    // A vec(H) reshaped to 3x3; dQ/dH = 2 apply(H).
    Mat3 apply(const Mat3& h) const;

    double coeff(int p, int q) const { return a_[p * 9 + q]; }
    const std::array<double, 81>& coeffs() const { return a_; }

    // Smallest eigenvalue of Q restricted to Sym(3) in an orthonormal basis.
    double min_sym_eigenvalue() const;

private:
    std::array<double, 81> a_{};
};

// Symmetric 4x4 form on row-major vec(X), X in R^{2x2}.
class QuadForm2 {
public:
    QuadForm2() = default;
    explicit QuadForm2(const std::array<double, 16>& coeffs);

    double operator()(const Mat2& x) const;
    double bilinear(const Mat2& x, const Mat2& y) const;
    Mat2 apply(const Mat2& x) const;

    double coeff(int p, int q) const { return a_[p * 4 + q]; }
    const std::array<double, 16>& coeffs() const { return a_; }

    double min_sym_eigenvalue() const;

private:
    std::array<double, 16> a_{};
};

// Symmetric 3x3 matrix split as [[kbar, kv], [kv^T, kz]].
struct PartitionedSym3 {
    Mat2 kbar;
    Vec2 kv;
    double kz = 1.0;

    static PartitionedSym3 from_matrix(const Mat3& k);
    Mat3 assemble() const;
};

// kbar - kv (x) kv / kz. Throws InvariantError if kz <= 0.
Mat2 schur_effective(const PartitionedSym3& k);

}  // namespace thinvolt
