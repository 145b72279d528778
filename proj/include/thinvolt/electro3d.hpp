#pragma once

#include <vector>

#include "thinvolt/fields.hpp"
#include "thinvolt/linsolve.hpp"
#include "thinvolt/material.hpp"

namespace thinvolt {

// Local coordinates and weights (fractions of the cell volume) of the 2x2x2 Gauss rule.
struct CellQuadrature3 {
    std::array<Vec3, 8> xi;
    std::array<std::array<double, 8>, 8> n;   // n[q][a]
    std::array<std::array<Vec3, 8>, 8> dn;    // dn[q][a], scaled by eps in x3
    double weight = 0.125;
};
CellQuadrature3 cell_quadrature3(const Grid3& g, double eps);

struct PoissonSystem3 {
    Grid3 grid;
    double eps = 1.0;
    StencilMatrix stiffness;
    std::vector<double> load;       // gamma-weighted charge moments, projected onto zero sum
    std::vector<double> weights;    // node weights defining the zero-mean gauge
    std::vector<Mat3> coefficient;  // kappa(nabla_eps y) per cell
};

// kappa(nabla_eps y) per cell; throws OrientationError on the first cell with det <= 0.
std::vector<Mat3> cell_permittivity(const VectorField3& y, double eps, const Material& mat);

PoissonSystem3 assemble_poisson3(const VectorField3& y, double eps, const Material& mat);

struct PotentialSolution3 {
    ScalarField3 phi;
    int iterations = 0;
    std::vector<double> residuals;
};

// Throws SolverError (with the residual history) if tol is not reached.
PotentialSolution3 solve_potential3(const PoissonSystem3& sys, double tol = 1e-10, int max_iters = 0,
                                    const ScalarField3* start = nullptr);

// integral of kappa grad phi . grad phi and of n_ch phi, with the rule used for assembly.
double dielectric_term3(const VectorField3& y, const ScalarField3& phi, double eps, const Material& mat);
double charge_term3(const ScalarField3& phi, const Material& mat);

// (beta/2) int kappa grad phi . grad phi - gamma int n_ch phi.
double E_eps(const VectorField3& y, const ScalarField3& phi, double eps, const Material& mat);

// |beta int k e.e det F - gamma int n phi| / (1 + |gamma int n phi|), e = F^{-T} grad phi.
double check_pg0(const VectorField3& y, const ScalarField3& phi, double eps, const Material& mat);

}  // namespace thinvolt
