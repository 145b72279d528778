#pragma once

#include <string>
#include <vector>

#include "thinvolt/fields.hpp"
#include "thinvolt/linsolve.hpp"
#include "thinvolt/material.hpp"
#include "thinvolt/relaxation.hpp"

namespace thinvolt {

// Plate isometry y(x) = (int_0^{x1} cos theta, x2, -int_0^{x1} sin theta) with a
// piecewise linear angle theta on uniform nodes of [0, 1]. Its normal is
// (sin theta, 0, cos theta) and the second fundamental form is diag(theta', 0).
class CylindricalIsometry {
public:
    CylindricalIsometry() : CylindricalIsometry(std::vector<double>{0.0, 0.0}) {}
    explicit CylindricalIsometry(std::vector<double> theta);
    static CylindricalIsometry constant_curvature(int nodes, double theta0, double curvature);

    int nodes() const { return static_cast<int>(theta_.size()); }
    double h() const { return h_; }
    const std::vector<double>& theta() const { return theta_; }

    double slope(int segment) const { return (theta_[segment + 1] - theta_[segment]) / h_; }
    double angle(double x1) const;
    // Mean of the adjacent segment slopes.
    double node_curvature(int i) const;

    // Columns d1 y, d2 y, normal.
    static Mat3 frame_from_angle(double theta);
    static Mat3 frame_derivative(double theta);
    Mat3 frame(double x1) const { return frame_from_angle(angle(x1)); }
    Vec3 normal(double x1) const { return frame(x1).col(2); }
    Vec3 position(double x1, double x2) const;
    Mat2 second_fundamental_form(int segment) const;

private:
    std::vector<double> theta_;
    double h_;
    std::vector<double> x1_integral_;  // int cos theta up to each node
    std::vector<double> x3_integral_;  // -int sin theta up to each node
    int segment_of(double x1) const;
};

using Potential2 = ScalarField2;

// 1/2 int_omega Qbar2(diag(theta', 0)).
double M0(const CylindricalIsometry& y0, const RelaxedQ2& rq);
std::vector<double> grad_M0(const CylindricalIsometry& y0, const RelaxedQ2& rq);

// Per cell of grid: K_y and K^eff at the cell's mid angle. grid.n1 must equal y0.nodes().
std::vector<EffectivePermittivity> cell_effective_permittivity(const CylindricalIsometry& y0, const Grid2& grid,
                                                               const Material& mat);

struct PoissonSystem2 {
    Grid2 grid;
    StencilMatrix stiffness;
    std::vector<double> load;
    std::vector<double> weights;
    std::vector<EffectivePermittivity> permittivity;
};

PoissonSystem2 assemble_poisson2(const CylindricalIsometry& y0, const Grid2& grid, const Material& mat);

struct PotentialSolution2 {
    Potential2 phi;
    int iterations = 0;
    std::vector<double> residuals;
};

// Throws SolverError if tol is not reached.
PotentialSolution2 solve_potential2(const CylindricalIsometry& y0, const Grid2& grid, const Material& mat,
                                    double tol = 1e-10);
PotentialSolution2 solve_potential2(const PoissonSystem2& sys, double tol = 1e-10);

double dielectric_term2(const CylindricalIsometry& y0, const Potential2& phi, const Material& mat);
double charge_term2(const Potential2& phi, const Material& mat);

// (beta/2) int K^eff grad phi . grad phi - gamma int nbar phi.
double E0(const CylindricalIsometry& y0, const Potential2& phi, const Material& mat);
double F0(const CylindricalIsometry& y0, const Potential2& phi, const Material& mat, const RelaxedQ2& rq);
// d/dtheta of F0 at fixed phi.
std::vector<double> grad_theta_F0(const CylindricalIsometry& y0, const Potential2& phi, const Material& mat,
                                  const RelaxedQ2& rq);

// |gamma int nbar phi - beta int K^eff grad phi . grad phi| / (1 + |gamma int nbar phi|).
double check_virial(const CylindricalIsometry& y0, const Potential2& phi, const Material& mat);

struct SaddleOptions {
    int outer_iters = 60;
    int inner_iters = 40;
    double tol = 1e-9;
    double poisson_tol = 1e-12;
};

struct SaddleHistoryEntry {
    int iteration;
    std::string phase;  // "phi" or "theta"
    double F0;
    double grad_norm;
};

struct SaddleResult2D {
    CylindricalIsometry y;
    Potential2 phi;
    std::vector<SaddleHistoryEntry> history;
    double grad_norm = 0.0;
    bool converged = false;
    bool line_search_failed = false;
};

// Alternates the exact potential solve with L-BFGS descent in theta at fixed potential.
SaddleResult2D saddle_iterate_2d(const CylindricalIsometry& initial, const Grid2& grid, const Material& mat,
                                 const RelaxedQ2& rq, const SaddleOptions& opt = {});

}  // namespace thinvolt
