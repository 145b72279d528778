#pragma once

#include "thinvolt/electro3d.hpp"
#include "thinvolt/fields.hpp"
#include "thinvolt/material.hpp"

namespace thinvolt {

using DeformationField3 = VectorField3;

struct MechanicalParts {
    double elastic = 0.0;  // (1/eps^2) int W(F M^{-1}) det M, two Gauss points in x3
    double hyper = 0.0;    // (1/eps^2) int eps^{alpha_H} H_*(nabla^2_eps y)
    double min_det = 0.0;  // min over Gauss points of det(F M^{-1})
    bool feasible = true;

    double total() const;
};

MechanicalParts mechanical_parts(const DeformationField3& y, double eps, const Material& mat);

// +inf when some cell has det(F M^{-1}) <= 0.
double M_eps(const DeformationField3& y, double eps, const Material& mat);

// Throws DomainError at infinite energy.
VectorField3 grad_M_eps(const DeformationField3& y, double eps, const Material& mat);

double F_eps(const DeformationField3& y, const ScalarField3& phi, double eps, const Material& mat);
VectorField3 grad_y_F_eps(const DeformationField3& y, const ScalarField3& phi, double eps, const Material& mat);

struct AprioriReport {
    double eps = 0.0;
    double d2 = 0.0;
    double d2_prestrain = 0.0;
    double grad_qW = 0.0;       // int |nabla_eps y|^{q_W}
    double inv_det_qW2 = 0.0;   // int det^{-q_W/2}
    double weighted_flux = 0.0; // int |F^{-T} nabla_eps phi|^2 det F
    double p_W = 0.0;
    double grad_phi_pW = 0.0;   // ||nabla_eps phi||_{p_W}
    double min_det = 0.0;
};

AprioriReport apriori_report(const DeformationField3& y, const ScalarField3& phi, double eps, const Material& mat);

}  // namespace thinvolt
