#pragma once

#include <array>

#include "thinvolt/material.hpp"
#include "thinvolt/smallmat.hpp"

namespace thinvolt {

struct ZRelaxation {
    Vec3 z;
    double value = 0.0;
};

// min over z of Q3(X° + z (x) e3). Throws DegeneracyError when the z-block is singular.
ZRelaxation relax_over_z(const QuadForm3& q3, const Mat2& x);

struct Qbar2Value {
    Mat2 s;
    double value = 0.0;
};

// 4-point Gauss-Legendre nodes and weights on (-1/2, 1/2); weights sum to 1.
inline constexpr std::array<double, 4> kThicknessNodes = {-0.43056815579702629, -0.16999052179242813,
                                                          0.16999052179242813, 0.43056815579702629};
inline constexpr std::array<double, 4> kThicknessWeights = {0.17392742256872693, 0.32607257743127307,
                                                            0.32607257743127307, 0.17392742256872693};

class RelaxedQ2 {
public:
    RelaxedQ2(const QuadForm3& q3, const PrestrainModel& prestrain);

    const QuadForm3& q3() const { return q3_; }
    const QuadForm2& q2() const { return q2_; }
    const PrestrainModel& prestrain() const { return prestrain_; }

    // Stationary point of the z-minimization; z is linear in X.
    ZRelaxation relax(const Mat2& x) const;
    // Q3 carries no t-dependence, so t only enters through the argument.
    double Q2(double t, const Mat2& x) const;
    // min over s of the thickness integral of Q2(t G + s - B(t)_{2x2}).
    Qbar2Value Qbar2(const Mat2& g) const;
    // dQbar2/dG at the optimal s.
    Mat2 dQbar2(const Mat2& g) const;
    // Thickness integral at a prescribed s.
    double thickness_integral(const Mat2& g, const Mat2& s) const;

private:
    QuadForm3 q3_;
    PrestrainModel prestrain_;
    Mat3 zz_inverse_;
    std::array<double, 27> zx_{};  // A_{z,x} rows for the 9 entries of X°
    QuadForm2 q2_;
    Mat3 sym_system_inverse_;
};

struct EffectivePermittivity {
    PartitionedSym3 k;
    Mat2 keff;
};

// K_y = R^T kbar R and its Schur complement. Throws InvariantError if R is not orthonormal.
EffectivePermittivity effective_permittivity(const Mat3& kbar, const Mat3& r);

// -Kv . grad' phi / kz.
double m_out_of_plane(const PartitionedSym3& k, const Vec2& grad_phi);

}  // namespace thinvolt
