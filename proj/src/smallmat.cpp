#include "thinvolt/smallmat.hpp"

#include <algorithm>
#include <limits>

namespace thinvolt {

double det2(const Mat2& m) { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

Mat2 inverse2(const Mat2& m) {
    const double d = det2(m);
    if (d == 0.0 || !std::isfinite(d)) throw DomainError("inverse2: singular matrix");
    return Mat2{m(1, 1) / d, -m(0, 1) / d, -m(1, 0) / d, m(0, 0) / d};
}

double det3(const Mat3& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

Mat3 cofactor3(const Mat3& m) {
    Mat3 c;
    c(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    c(0, 1) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
    c(0, 2) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    c(1, 0) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    c(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    c(1, 2) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
    c(2, 0) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    c(2, 1) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    c(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return c;
}

Mat3 inverse3(const Mat3& m) {
    const double d = det3(m);
    if (d == 0.0 || !std::isfinite(d)) throw DomainError("inverse3: singular matrix");
    return (1.0 / d) * transpose(cofactor3(m));
}

Vec3 cross(const Vec3& a, const Vec3& b) {
    return Vec3{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Mat3 embed2(const Mat2& g) {
    Mat3 m;
    m(0, 0) = g(0, 0);
    m(0, 1) = g(0, 1);
    m(1, 0) = g(1, 0);
    m(1, 1) = g(1, 1);
    return m;
}

Mat2 block2(const Mat3& m) { return Mat2{m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

Mat3 nearest_rotation(const Mat3& f) {
    constexpr double kTol = 1e-13;
    constexpr int kMaxIter = 50;
    if (!(det3(f) > 0.0)) throw DomainError("nearest_rotation: no orientation-preserving polar factor");
    Mat3 x = f;
    for (int it = 0; it < kMaxIter; ++it) {
        const Mat3 next = 0.5 * (x + transpose(inverse3(x)));
        const double change = norm(next - x);
        x = next;
        if (change <= kTol * std::max(1.0, norm(x))) break;
    }
    return x;
}

void sym_eigen3(const Mat3& s, Vec3& lambda, Mat3& q) {
    Mat3 a = sym(s);
    q = Mat3::identity();
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
        double scale = 0.0;
        for (double x : a.a) scale += x * x;
        if (off <= 1e-32 * std::max(scale, std::numeric_limits<double>::min())) break;
        for (int p = 0; p < 2; ++p) {
            for (int r = p + 1; r < 3; ++r) {
                const double apr = a(p, r);
                if (apr == 0.0) continue;
                const double tau = (a(r, r) - a(p, p)) / (2.0 * apr);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                // a <- J^T a J for the plane rotation J(p, r).
                for (int k = 0; k < 3; ++k) {
                    const double akp = a(k, p), akr = a(k, r);
                    a(k, p) = c * akp - sn * akr;
                    a(k, r) = sn * akp + c * akr;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a(p, k), ark = a(r, k);
                    a(p, k) = c * apk - sn * ark;
                    a(r, k) = sn * apk + c * ark;
                }
                for (int k = 0; k < 3; ++k) {
                    const double qkp = q(k, p), qkr = q(k, r);
                    q(k, p) = c * qkp - sn * qkr;
                    q(k, r) = sn * qkp + c * qkr;
                }
            }
        }
    }
    // sort ascending
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
    Mat3 qs;
    for (int c = 0; c < 3; ++c) {
        lambda[c] = a(idx[c], idx[c]);
        qs.set_col(c, q.col(idx[c]));
    }
    q = qs;
}

Vec3 sym_eigenvalues3(const Mat3& s) {
    Vec3 l;
    Mat3 q;
    sym_eigen3(s, l, q);
    return l;
}

double dist_SO3_sq(const Mat3& f) {
    if (det3(f) > 0.0) {
        const Mat3 r = nearest_rotation(f);
        return ddot(f - r, f - r);
    }
    const Vec3 ev = sym_eigenvalues3(transpose(f) * f);
    double d = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double sigma = std::sqrt(std::max(ev[i], 0.0));
        d += (sigma - 1.0) * (sigma - 1.0);
    }
    return d;
}

Mat3 cholesky3(const Mat3& s) {
    Mat3 l;
    for (int j = 0; j < 3; ++j) {
        double d = s(j, j);
        for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) throw DegeneracyError("cholesky3: matrix is not positive definite");
        l(j, j) = std::sqrt(d);
        for (int i = j + 1; i < 3; ++i) {
            double v = s(i, j);
            for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
            l(i, j) = v / l(j, j);
        }
    }
    return l;
}

Mat3 axis_angle(const Vec3& axis, double angle) {
    const Vec3 u = (1.0 / norm(axis)) * axis;
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 k{0.0, -u[2], u[1], u[2], 0.0, -u[0], -u[1], u[0], 0.0};
    return Mat3::identity() + s * k + (1.0 - c) * (k * k);
}

template <int N>
std::array<double, N> jacobi_eigenvalues(std::array<double, N * N> a) {
    auto at = [&](int i, int j) -> double& { return a[i * N + j]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0, scale = 0.0;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) {
                scale += at(i, j) * at(i, j);
                if (i != j) off += at(i, j) * at(i, j);
            }
        if (off <= 1e-30 * std::max(scale, std::numeric_limits<double>::min())) break;
        for (int p = 0; p < N - 1; ++p) {
            for (int r = p + 1; r < N; ++r) {
                const double apr = at(p, r);
                if (apr == 0.0) continue;
                const double tau = (at(r, r) - at(p, p)) / (2.0 * apr);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;
                for (int k = 0; k < N; ++k) {
                    const double akp = at(k, p), akr = at(k, r);
                    at(k, p) = c * akp - sn * akr;
                    at(k, r) = sn * akp + c * akr;
                }
                for (int k = 0; k < N; ++k) {
                    const double apk = at(p, k), ark = at(r, k);
                    at(p, k) = c * apk - sn * ark;
                    at(r, k) = sn * apk + c * ark;
                }
            }
        }
    }
    std::array<double, N> ev{};
    for (int i = 0; i < N; ++i) ev[i] = at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

template std::array<double, 2> jacobi_eigenvalues<2>(std::array<double, 4>);
template std::array<double, 3> jacobi_eigenvalues<3>(std::array<double, 9>);
template std::array<double, 4> jacobi_eigenvalues<4>(std::array<double, 16>);
template std::array<double, 6> jacobi_eigenvalues<6>(std::array<double, 36>);
template std::array<double, 9> jacobi_eigenvalues<9>(std::array<double, 81>);

// ---- quadratic forms --------------------------------------------------------

namespace {

template <int M>
std::array<double, M * M> symmetrized(const std::array<double, M * M>& c, const char* what) {
    std::array<double, M * M> a{};
    for (int p = 0; p < M; ++p)
        for (int q = 0; q < M; ++q) {
            const double x = c[p * M + q];
            if (!std::isfinite(x)) throw InvariantError(std::string(what) + ": non-finite coefficient");
            a[p * M + q] = 0.5 * (x + c[q * M + p]);
        }
    return a;
}

}  // namespace

QuadForm3::QuadForm3(const std::array<double, 81>& coeffs) : a_(symmetrized<9>(coeffs, "QuadForm3")) {}

double QuadForm3::bilinear(const Mat3& h, const Mat3& k) const {
    double s = 0.0;
    for (int p = 0; p < 9; ++p) {
        double row = 0.0;
        for (int q = 0; q < 9; ++q) row += a_[p * 9 + q] * k.a[q];
        s += h.a[p] * row;
    }
    return s;
}

double QuadForm3::operator()(const Mat3& h) const { return bilinear(h, h); }

Mat3 QuadForm3::apply(const Mat3& h) const {
    Mat3 out;
    for (int p = 0; p < 9; ++p) {
        double row = 0.0;
        for (int q = 0; q < 9; ++q) row += a_[p * 9 + q] * h.a[q];
        out.a[p] = row;
    }
    return out;
}

double QuadForm3::min_sym_eigenvalue() const {
    std::array<Mat3, 6> basis;
    const double r = 1.0 / std::sqrt(2.0);
    basis[0](0, 0) = 1.0;
    basis[1](1, 1) = 1.0;
    basis[2](2, 2) = 1.0;
    basis[3](0, 1) = basis[3](1, 0) = r;
    basis[4](0, 2) = basis[4](2, 0) = r;
    basis[5](1, 2) = basis[5](2, 1) = r;
    std::array<double, 36> m{};
    for (int p = 0; p < 6; ++p)
        for (int q = 0; q < 6; ++q) m[p * 6 + q] = bilinear(basis[p], basis[q]);
    return jacobi_eigenvalues<6>(m)[0];
}

QuadForm2::QuadForm2(const std::array<double, 16>& coeffs) : a_(symmetrized<4>(coeffs, "QuadForm2")) {}

double QuadForm2::bilinear(const Mat2& x, const Mat2& y) const {
    double s = 0.0;
    for (int p = 0; p < 4; ++p) {
        double row = 0.0;
        for (int q = 0; q < 4; ++q) row += a_[p * 4 + q] * y.a[q];
        s += x.a[p] * row;
    }
    return s;
}

double QuadForm2::operator()(const Mat2& x) const { return bilinear(x, x); }

Mat2 QuadForm2::apply(const Mat2& x) const {
    Mat2 out;
    for (int p = 0; p < 4; ++p) {
        double row = 0.0;
        for (int q = 0; q < 4; ++q) row += a_[p * 4 + q] * x.a[q];
        out.a[p] = row;
    }
    return out;
}

double QuadForm2::min_sym_eigenvalue() const {
    std::array<Mat2, 3> basis;
    basis[0](0, 0) = 1.0;
    basis[1](1, 1) = 1.0;
    basis[2](0, 1) = basis[2](1, 0) = 1.0 / std::sqrt(2.0);
    std::array<double, 9> m{};
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) m[p * 3 + q] = bilinear(basis[p], basis[q]);
    return jacobi_eigenvalues<3>(m)[0];
}

PartitionedSym3 PartitionedSym3::from_matrix(const Mat3& k) {
    PartitionedSym3 p;
    p.kbar = block2(k);
    p.kv = Vec2{k(0, 2), k(1, 2)};
    p.kz = k(2, 2);
    return p;
}

Mat3 PartitionedSym3::assemble() const {
    Mat3 k = embed2(kbar);
    k(0, 2) = k(2, 0) = kv[0];
    k(1, 2) = k(2, 1) = kv[1];
    k(2, 2) = kz;
    return k;
}

Mat2 schur_effective(const PartitionedSym3& k) {
    if (!(k.kz > 0.0)) throw InvariantError("schur_effective: out-of-plane entry kz must be positive");
    return k.kbar - (1.0 / k.kz) * outer(k.kv, k.kv);
}

}  // namespace thinvolt
