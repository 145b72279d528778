#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "thinvolt/bending2d.hpp"
#include "thinvolt/elastic3d.hpp"
#include "thinvolt/electro3d.hpp"
#include "thinvolt/fields.hpp"
#include "thinvolt/relaxation.hpp"

namespace thinvolt {

// The in-plane vector potential is affine, g(x') = G x', so its symmetric
// gradient is the constant sym(G), which must equal the thickness mean of
// B_{2x2}, i.e. (B0)_{2x2}.
struct RecoveryInputs {
    CylindricalIsometry yhat;
    PrestrainModel prestrain;
    Mat2 g_gradient;

    Vec2 g(double x1, double x2) const { return g_gradient * Vec2{x1, x2}; }
    void validate() const;
};

// d(x', t) = R (L(X_sym) - ((grad'(grad' yhat g))^T nu, 0) + (2 B13, 2 B23, B33)) at every node,
// with X_sym = t Pi + sym(G) - B(t)_{2x2}.
VectorField3 optimal_corrector(const Grid3& grid, const RecoveryInputs& in, const RelaxedQ2& rq);

// yhat + eps (x3 nu + grad' yhat g) + eps^2 int_0^{x3} d, gauged to zero mean.
VectorField3 lift_deformation(const Grid3& grid, const RecoveryInputs& in, double eps, const VectorField3& d);

// The isometry itself sampled on the slab nodes, gauged like lift_deformation.
VectorField3 sample_isometry(const Grid3& grid, const CylindricalIsometry& yhat);

// phi0(x') + eps m(x') x3, gauged to zero mean. phi0 and m live on the in-plane grid of `grid`.
ScalarField3 lift_potential(const Grid3& grid, const Potential2& phi0, const ScalarField2& m, double eps);

// Nodal m = -Kv . grad' phi0 / kz (cell values averaged onto nodes).
ScalarField2 out_of_plane_field(const CylindricalIsometry& y0, const Potential2& phi0, const Material& mat);

struct MollifyResult {
    VectorField3 d;
    double energy_start = 0.0;
    double energy_final = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    double l2_distance = 0.0;     // ||d_eps - d||_{L2}
    double scaled_norm = 0.0;     // eps ||d_eps||_{W^{2,q}}
    double scaled_norm_ratio = 0.0;  // scaled_norm / eps^{1 - tau/q}
};

// I_eps(v) = int (eps^tau/q)(|grad^2 v|^q + |grad v|^q) + 1/2 int |v - d|^2.
double mollifier_energy(const VectorField3& v, const VectorField3& d, double eps, double tau, double q,
                        std::vector<Vec3>* grad = nullptr);

MollifyResult mollify_field(const VectorField3& d, double eps, double tau, double q_H, int iters);

struct SweepRow {
    double eps = 0.0;
    double Mel_scaled = 0.0;
    double hyper = 0.0;
    double M_eps = 0.0;
    double E_eps = 0.0;
    double F_eps = 0.0;
    double M0 = 0.0;
    double E0 = 0.0;
    double F0 = 0.0;
    double d2_ratio = 0.0;
    double pW_norm = 0.0;
    double min_det = 0.0;
    double pg0_res = 0.0;
    // extras
    double E_lift = 0.0;
    double F_lift = 0.0;
    double phi_probe = 0.0;
    double y_error = 0.0;
    double grad_error = 0.0;
    double d2 = 0.0;
    int cg_iterations = 0;
    bool feasible = true;
};

struct SweepSetup {
    Grid3 grid;
    Material mat;
    RecoveryInputs inputs;
    bool use_mollifier = false;
    int mollifier_iters = 200;
    double poisson_tol = 1e-10;
};

// Called after each feasible row with the lifted deformation and solved potential.
using RowHook = std::function<void(SweepRow&, const VectorField3& y, const ScalarField3& phi)>;

// Rows in the order of eps_list, which must be decreasing.
std::vector<SweepRow> recovery_sweep(const SweepSetup& setup, const std::vector<double>& eps_list,
                                     const RowHook& hook = {});

}  // namespace thinvolt
