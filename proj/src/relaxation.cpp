#include "thinvolt/relaxation.hpp"

namespace thinvolt {

namespace {

constexpr std::array<int, 4> kXIdx = {0, 1, 3, 4};  // (0,0) (0,1) (1,0) (1,1)
constexpr std::array<int, 3> kZIdx = {2, 5, 8};     // (0,2) (1,2) (2,2)

Mat3 z_block(const QuadForm3& q3) {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = q3.coeff(kZIdx[i], kZIdx[j]);
    return m;
}

Mat3 invert_z_block(const QuadForm3& q3) {
    const Mat3 m = z_block(q3);
    const Vec3 ev = sym_eigenvalues3(m);
    if (!(ev[0] > 1e-14 * std::max(1.0, std::abs(ev[2]))))
        throw DegeneracyError("Q3 degenerate on coupling subspace");
    return inverse3(m);
}

Vec3 coupling_rhs(const QuadForm3& q3, const Mat2& x) {
    Vec3 r;
    for (int i = 0; i < 3; ++i)
        for (int p = 0; p < 4; ++p) r[i] += q3.coeff(kZIdx[i], kXIdx[p]) * x.a[p];
    return r;
}

std::array<Mat2, 3> sym2_basis() {
    const double r = 1.0 / std::sqrt(2.0);
    return {Mat2{1.0, 0.0, 0.0, 0.0}, Mat2{0.0, 0.0, 0.0, 1.0}, Mat2{0.0, r, r, 0.0}};
}

}  // namespace

ZRelaxation relax_over_z(const QuadForm3& q3, const Mat2& x) {
    const Mat3 inv = invert_z_block(q3);
    ZRelaxation out;
    out.z = -(inv * coupling_rhs(q3, x));
    Mat3 h = embed2(x);
    for (int i = 0; i < 3; ++i) h(i, 2) += out.z[i];
    out.value = q3(h);
    return out;
}

RelaxedQ2::RelaxedQ2(const QuadForm3& q3, const PrestrainModel& prestrain)
    : q3_(q3), prestrain_(prestrain), zz_inverse_(invert_z_block(q3)) {
    for (int i = 0; i < 3; ++i)
        for (int p = 0; p < 9; ++p) zx_[i * 9 + p] = q3.coeff(kZIdx[i], p);
    std::array<double, 16> c{};
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) {
            double v = q3.coeff(kXIdx[p], kXIdx[q]);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    v -= q3.coeff(kZIdx[i], kXIdx[p]) * zz_inverse_(i, j) * q3.coeff(kZIdx[j], kXIdx[q]);
            c[p * 4 + q] = v;
        }
    q2_ = QuadForm2(c);

    const auto basis = sym2_basis();
    Mat3 m;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) m(a, b) = q2_.bilinear(basis[a], basis[b]);
    const Vec3 ev = sym_eigenvalues3(m);
    if (!(ev[0] > 1e-14 * std::max(1.0, std::abs(ev[2]))))
        throw DegeneracyError("Qbar2: stationarity system in s is singular");
    sym_system_inverse_ = inverse3(m);
}

ZRelaxation RelaxedQ2::relax(const Mat2& x) const {
    Vec3 r;
    const Mat3 xo = embed2(x);
    for (int i = 0; i < 3; ++i)
        for (int p = 0; p < 9; ++p) r[i] += zx_[i * 9 + p] * xo.a[p];
    ZRelaxation out;
    out.z = -(zz_inverse_ * r);
    out.value = q2_(x);
    return out;
}

double RelaxedQ2::Q2(double t, const Mat2& x) const {
    if (std::abs(t) > 0.5 + 1e-12) throw DomainError("Q2: t must lie in [-1/2, 1/2]");
    return q2_(x);
}

double RelaxedQ2::thickness_integral(const Mat2& g, const Mat2& s) const {
    double v = 0.0;
    for (int q = 0; q < 4; ++q) {
        const double t = kThicknessNodes[q];
        v += kThicknessWeights[q] * q2_(t * g + s - block2(prestrain_.at(t)));
    }
    return v;
}

Qbar2Value RelaxedQ2::Qbar2(const Mat2& g) const {
    const auto basis = sym2_basis();
    Vec3 rhs;
    for (int q = 0; q < 4; ++q) {
        const double t = kThicknessNodes[q];
        const Mat2 target = block2(prestrain_.at(t)) - t * g;
        for (int a = 0; a < 3; ++a) rhs[a] += kThicknessWeights[q] * q2_.bilinear(target, basis[a]);
    }
    const Vec3 c = sym_system_inverse_ * rhs;
    Qbar2Value out;
    for (int a = 0; a < 3; ++a) out.s += c[a] * basis[a];
    out.value = thickness_integral(g, out.s);
    return out;
}

Mat2 RelaxedQ2::dQbar2(const Mat2& g) const {
    const Mat2 s = Qbar2(g).s;
    Mat2 d;
    for (int q = 0; q < 4; ++q) {
        const double t = kThicknessNodes[q];
        d += (2.0 * kThicknessWeights[q] * t) * q2_.apply(t * g + s - block2(prestrain_.at(t)));
    }
    return d;
}

EffectivePermittivity effective_permittivity(const Mat3& kbar, const Mat3& r) {
    if (norm(transpose(r) * r - Mat3::identity()) > 1e-8) throw InvariantError("frame not orthonormal");
    EffectivePermittivity out;
    out.k = PartitionedSym3::from_matrix(transpose(r) * kbar * r);
    out.keff = schur_effective(out.k);
    return out;
}

double m_out_of_plane(const PartitionedSym3& k, const Vec2& grad_phi) {
    if (!(k.kz > 0.0)) throw InvariantError("m_out_of_plane: kz must be positive");
    return -dot(k.kv, grad_phi) / k.kz;
}

}  // namespace thinvolt
