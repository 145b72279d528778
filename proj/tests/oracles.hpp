#pragma once
// Independent reference implementations used only by the tests.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "thinvolt/smallmat.hpp"

namespace oracle {

using thinvolt::Mat2;
using thinvolt::Mat3;
using thinvolt::Vec2;
using thinvolt::Vec3;

using Dense = std::vector<std::vector<double>>;

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
    Mat3 mat3(double scale = 1.0) {
        Mat3 m;
        for (double& x : m.a) x = scale * uniform();
        return m;
    }
    Mat2 mat2(double scale = 1.0) {
        Mat2 m;
        for (double& x : m.a) x = scale * uniform();
        return m;
    }
    Vec3 vec3(double scale = 1.0) { return Vec3{scale * uniform(), scale * uniform(), scale * uniform()}; }
    Vec2 vec2(double scale = 1.0) { return Vec2{scale * uniform(), scale * uniform()}; }
    Mat3 spd3() {
        const Mat3 a = mat3();
        Mat3 s = transpose(a) * a;
        for (int i = 0; i < 3; ++i) s(i, i) += 0.1;
        return s;
    }
    Mat3 skew3(double scale = 1.0) {
        const Vec3 w = vec3(scale);
        return Mat3{0, -w[2], w[1], w[2], 0, -w[0], -w[1], w[0], 0};
    }
    // Gram-Schmidt of a random matrix, sign-fixed to det +1.
    Mat3 rotation() {
        Mat3 q;
        for (;;) {
            Mat3 a = mat3();
            Vec3 c[3] = {a.col(0), a.col(1), a.col(2)};
            bool ok = true;
            for (int i = 0; i < 3 && ok; ++i) {
                for (int j = 0; j < i; ++j) c[i] -= dot(c[i], c[j]) * c[j];
                const double n = norm(c[i]);
                if (n < 1e-3) ok = false;
                else c[i] *= 1.0 / n;
            }
            if (!ok) continue;
            for (int j = 0; j < 3; ++j) q.set_col(j, c[j]);
            break;
        }
        if (leibniz_det(q) < 0.0) q.set_col(2, -q.col(2));
        return q;
    }
    Mat3 near_identity(double scale) { return Mat3::identity() + mat3(scale); }

    static double leibniz_det(const Mat3& m) {
        static const int perm[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
        static const int sign[6] = {1, 1, 1, -1, -1, -1};
        double s = 0.0;
        for (int p = 0; p < 6; ++p) s += sign[p] * m(0, perm[p][0]) * m(1, perm[p][1]) * m(2, perm[p][2]);
        return s;
    }
};

inline double leibniz_det(const Mat3& m) { return Rng::leibniz_det(m); }

// Gauss-Jordan elimination with partial pivoting.
inline Dense dense_inverse(Dense a) {
    const std::size_t n = a.size();
    Dense inv(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        std::swap(a[c], a[p]);
        std::swap(inv[c], inv[p]);
        const double d = a[c][c];
        for (std::size_t j = 0; j < n; ++j) {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    return inv;
}

inline std::vector<double> dense_solve(const Dense& a, const std::vector<double>& b) {
    const Dense inv = dense_inverse(a);
    std::vector<double> x(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) x[i] += inv[i][j] * b[j];
    return x;
}

inline Mat3 gauss_inverse(const Mat3& m) {
    Dense a(3, std::vector<double>(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = m(i, j);
    const Dense inv = dense_inverse(a);
    Mat3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out(i, j) = inv[i][j];
    return out;
}

// Ascending eigenvalues of a dense symmetric matrix (Jacobi rotations via atan2).
inline std::vector<double> dense_sym_eigenvalues(Dense a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double phi = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
                const double c = std::cos(phi), s = std::sin(phi);
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline Dense to_dense(const Mat3& m) {
    Dense a(3, std::vector<double>(3));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a[i][j] = m(i, j);
    return a;
}

inline Dense to_dense(const Mat2& m) { return Dense{{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}; }

inline std::array<double, 3> singular_values(const Mat3& f) {
    const std::vector<double> ev = dense_sym_eigenvalues(to_dense(transpose(f) * f));
    return {std::sqrt(std::max(ev[0], 0.0)), std::sqrt(std::max(ev[1], 0.0)), std::sqrt(std::max(ev[2], 0.0))};
}

inline double svd_dist_sq(const Mat3& f) {
    const auto s = singular_values(f);
    double d = 0.0;
    for (double x : s) d += (x - 1.0) * (x - 1.0);
    return d;
}

// 2 mu |H_sym|^2 + lambda (tr H)^2
inline double isotropic_Q3(double mu, double lambda, const Mat3& h) {
    const Mat3 s = 0.5 * (h + transpose(h));
    const double tr = h(0, 0) + h(1, 1) + h(2, 2);
    return 2.0 * mu * ddot(s, s) + lambda * tr * tr;
}

// Closed-form plate form after eliminating the third column.
inline double isotropic_Q2(double mu, double lambda, const Mat2& x) {
    const Mat2 s = 0.5 * (x + transpose(x));
    const double tr = x(0, 0) + x(1, 1);
    return 2.0 * mu * ddot(s, s) + (2.0 * mu * lambda / (2.0 * mu + lambda)) * tr * tr;
}

inline double golden_min(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

// 1D linear finite elements on n nodes over an interval of length len.
inline Dense stiffness_1d(int n, double len) {
    const double h = len / (n - 1);
    Dense k(n, std::vector<double>(n, 0.0));
    for (int e = 0; e + 1 < n; ++e) {
        k[e][e] += 1.0 / h;
        k[e + 1][e + 1] += 1.0 / h;
        k[e][e + 1] -= 1.0 / h;
        k[e + 1][e] -= 1.0 / h;
    }
    return k;
}

inline Dense mass_1d(int n, double len) {
    const double h = len / (n - 1);
    Dense m(n, std::vector<double>(n, 0.0));
    for (int e = 0; e + 1 < n; ++e) {
        m[e][e] += h / 3.0;
        m[e + 1][e + 1] += h / 3.0;
        m[e][e + 1] += h / 6.0;
        m[e + 1][e] += h / 6.0;
    }
    return m;
}

// Trilinear Laplacian with the x3 derivative divided by eps, as a sum of Kronecker
// products; node order x3 fastest.
inline Dense kron_laplacian3(int n1, int n2, int n3, double eps) {
    const Dense k1 = stiffness_1d(n1, 1.0), m1 = mass_1d(n1, 1.0);
    const Dense k2 = stiffness_1d(n2, 1.0), m2 = mass_1d(n2, 1.0);
    const Dense k3 = stiffness_1d(n3, 1.0), m3 = mass_1d(n3, 1.0);
    const int n = n1 * n2 * n3;
    Dense out(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            for (int k = 0; k < n3; ++k)
                for (int p = 0; p < n1; ++p)
                    for (int q = 0; q < n2; ++q)
                        for (int r = 0; r < n3; ++r) {
                            const double v = k1[i][p] * m2[j][q] * m3[k][r] + m1[i][p] * k2[j][q] * m3[k][r] +
                                             m1[i][p] * m2[j][q] * k3[k][r] / (eps * eps);
                            if (v != 0.0) out[(i * n2 + j) * n3 + k][(p * n2 + q) * n3 + r] = v;
                        }
    return out;
}

inline Dense kron_laplacian2(int n1, int n2) {
    const Dense k1 = stiffness_1d(n1, 1.0), m1 = mass_1d(n1, 1.0);
    const Dense k2 = stiffness_1d(n2, 1.0), m2 = mass_1d(n2, 1.0);
    const int n = n1 * n2;
    Dense out(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            for (int p = 0; p < n1; ++p)
                for (int q = 0; q < n2; ++q) out[i * n2 + j][p * n2 + q] = k1[i][p] * m2[j][q] + m1[i][p] * k2[j][q];
    return out;
}

inline double quadratic_form(const Dense& a, const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) s += x[i] * a[i][j] * x[j];
    return s;
}

// Observed order from errors on grids with spacing ratio 2.
inline double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

}  // namespace oracle
