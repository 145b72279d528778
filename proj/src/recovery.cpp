#include "thinvolt/recovery.hpp"

#include <limits>

#include "thinvolt/optimize.hpp"
#include "thinvolt/parallel.hpp"

namespace thinvolt {

namespace {

double curvature_at(const CylindricalIsometry& y, double x1) {
    const double s = x1 / y.h();
    const int i = static_cast<int>(std::lround(s));
    if (std::abs(s - i) < 1e-9) return y.node_curvature(i);
    const int seg = std::clamp(static_cast<int>(std::floor(s)), 0, y.nodes() - 2);
    return y.slope(seg);
}

// int_0^{x3} of nodal column values, exact for data linear in x3.
std::vector<Vec3> column_integral(const Grid3& g, const std::vector<Vec3>& d) {
    const int n = g.n3;
    std::vector<Vec3> out(n);
    int below = 0;
    while (below + 1 < n && g.x3(below + 1) <= 0.0) ++below;
    Vec3 d0;
    int start_up, start_down;
    if (std::abs(g.x3(below)) < 1e-14) {
        d0 = d[below];
        out[below] = Vec3{};
        start_up = below + 1;
        start_down = below - 1;
    } else {
        const double xa = g.x3(below), xb = g.x3(below + 1);
        const double w = -xa / (xb - xa);
        d0 = (1.0 - w) * d[below] + w * d[below + 1];
        out[below + 1] = (0.5 * xb) * (d0 + d[below + 1]);
        out[below] = (0.5 * xa) * (d0 + d[below]);
        start_up = below + 2;
        start_down = below - 1;
    }
    for (int k = start_up; k < n; ++k) out[k] = out[k - 1] + (0.5 * g.h3) * (d[k - 1] + d[k]);
    for (int k = start_down; k >= 0; --k) out[k] = out[k + 1] - (0.5 * g.h3) * (d[k + 1] + d[k]);
    return out;
}

}  // namespace

void RecoveryInputs::validate() const {
    prestrain.validate();
    const Mat2 target = block2(prestrain.B0);
    if (norm(sym(g_gradient) - sym(target)) > 1e-10)
        throw InvariantError("recovery: sym grad g must equal the thickness mean of B_{2x2}");
}

VectorField3 optimal_corrector(const Grid3& grid, const RecoveryInputs& in, const RelaxedQ2& rq) {
    in.validate();
    VectorField3 d(grid);
    const Mat2 gs = sym(in.g_gradient);
    parallel_for(grid.nodes(), [&](std::size_t a) {
        const Vec3 x = grid.node_position(a);
        const double t = x[2];
        const double kappa = curvature_at(in.yhat, x[0]);
        const Mat3 b = in.prestrain.at(t);
        const Mat2 xs = t * Mat2{kappa, 0.0, 0.0, 0.0} + gs - block2(b);
        const Vec3 z = rq.relax(sym(xs)).z;
        const double g1 = in.g(x[0], x[1])[0];
        const Vec3 local = z - Vec3{-kappa * g1, 0.0, 0.0} + Vec3{2.0 * b(0, 2), 2.0 * b(1, 2), b(2, 2)};
        d.v[a] = in.yhat.frame(x[0]) * local;
    });
    return d;
}

VectorField3 sample_isometry(const Grid3& grid, const CylindricalIsometry& yhat) {
    VectorField3 y(grid);
    for (std::size_t a = 0; a < grid.nodes(); ++a) {
        const Vec3 x = grid.node_position(a);
        y.v[a] = yhat.position(x[0], x[1]);
    }
    return zero_mean_project(y);
}

VectorField3 lift_deformation(const Grid3& grid, const RecoveryInputs& in, double eps, const VectorField3& d) {
    if (!(eps > 0.0)) throw DomainError("lift_deformation: eps must be positive");
    if (!(d.grid == grid)) throw InvariantError("lift_deformation: corrector lives on a different grid");
    VectorField3 y(grid);
    std::vector<Vec3> column(grid.n3);
    for (int i = 0; i < grid.n1; ++i)
        for (int j = 0; j < grid.n2; ++j) {
            for (int k = 0; k < grid.n3; ++k) column[k] = d.v[grid.node(i, j, k)];
            const std::vector<Vec3> big_d = column_integral(grid, column);
            const double x1 = grid.x1(i), x2 = grid.x2(j);
            const Mat3 r = in.yhat.frame(x1);
            const Vec2 gv = in.g(x1, x2);
            const Vec3 base = in.yhat.position(x1, x2);
            const Vec3 tangential = gv[0] * r.col(0) + gv[1] * r.col(1);
            for (int k = 0; k < grid.n3; ++k) {
                const double x3 = grid.x3(k);
                y.v[grid.node(i, j, k)] = base + eps * (x3 * r.col(2) + tangential) + (eps * eps) * big_d[k];
            }
        }
    return zero_mean_project(y);
}

ScalarField3 lift_potential(const Grid3& grid, const Potential2& phi0, const ScalarField2& m, double eps) {
    if (!(eps > 0.0)) throw DomainError("lift_potential: eps must be positive");
    if (phi0.grid.n1 != grid.n1 || phi0.grid.n2 != grid.n2 || !(m.grid == phi0.grid))
        throw InvariantError("lift_potential: in-plane grids do not match");
    ScalarField3 phi(grid);
    for (int i = 0; i < grid.n1; ++i)
        for (int j = 0; j < grid.n2; ++j) {
            const std::size_t p = phi0.grid.node(i, j);
            for (int k = 0; k < grid.n3; ++k) phi.v[grid.node(i, j, k)] = phi0.v[p] + eps * m.v[p] * grid.x3(k);
        }
    return zero_mean_project(phi);
}

ScalarField2 out_of_plane_field(const CylindricalIsometry& y0, const Potential2& phi0, const Material& mat) {
    const Grid2& g = phi0.grid;
    const auto perm = cell_effective_permittivity(y0, g, mat);
    const auto dn = shape_gradients2(g, Vec2{0.5, 0.5});
    ScalarField2 m(g);
    std::vector<double> count(g.nodes(), 0.0);
    for (std::size_t c = 0; c < g.cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        Vec2 grad;
        for (int a = 0; a < 4; ++a) grad += phi0.v[nodes[a]] * dn[a];
        const double mc = m_out_of_plane(perm[c].k, grad);
        for (int a = 0; a < 4; ++a) {
            m.v[nodes[a]] += mc;
            count[nodes[a]] += 1.0;
        }
    }
    for (std::size_t a = 0; a < g.nodes(); ++a) m.v[a] /= count[a];
    return m;
}

// ---- mollifier --------------------------------------------------------------

double mollifier_energy(const VectorField3& v, const VectorField3& d, double eps, double tau, double q,
                        std::vector<Vec3>* grad) {
    const Grid3& g = v.grid;
    const double c = std::pow(eps, tau) / q;
    const CellTensorField f = scaled_gradient(v, 1.0);
    const CellHessianField h = scaled_hessian(v, 1.0);
    std::vector<double> cell(g.cells());
    CellTensorField pf(grad ? g.cells() : 0);
    CellHessianField ph(grad ? g.cells() : 0);
    parallel_for(g.cells(), [&](std::size_t k) {
        const double nf = norm(f[k]);
        double nh2 = 0.0;
        for (double x : h[k]) nh2 += x * x;
        const double nh = std::sqrt(nh2);
        cell[k] = c * (std::pow(nh, q) + std::pow(nf, q));
        if (grad) {
            const double vol = g.cell_volume();
            pf[k] = (vol * c * q * std::pow(nf, q - 2.0)) * f[k];
            const double sh = vol * c * q * std::pow(nh, q - 2.0);
            for (int i = 0; i < 27; ++i) ph[k][i] = sh * h[k][i];
        }
    });
    double e = integrate3(g, cell);
    const std::vector<double> w = node_weights(g);
    for (std::size_t a = 0; a < g.nodes(); ++a) {
        const Vec3 diff = v.v[a] - d.v[a];
        e += 0.5 * w[a] * dot(diff, diff);
    }
    if (grad) {
        grad->assign(g.nodes(), Vec3{});
        scatter_gradient_adjoint(g, pf, 1.0, *grad);
        scatter_hessian_adjoint(g, ph, 1.0, *grad);
        for (std::size_t a = 0; a < g.nodes(); ++a) (*grad)[a] += w[a] * (v.v[a] - d.v[a]);
    }
    return e;
}

MollifyResult mollify_field(const VectorField3& d, double eps, double tau, double q_H, int iters) {
    if (!(tau > 0.0 && tau < q_H)) throw DomainError("mollify_field: need 0 < tau < q_H");
    if (!(eps > 0.0)) throw DomainError("mollify_field: eps must be positive");
    const Grid3& g = d.grid;
    const std::size_t n = g.nodes();
    auto unpack = [&](const std::vector<double>& x) {
        VectorField3 v(g);
        for (std::size_t a = 0; a < n; ++a) v.v[a] = Vec3{x[3 * a], x[3 * a + 1], x[3 * a + 2]};
        return v;
    };
    Objective obj = [&](const std::vector<double>& x, std::vector<double>* grad) {
        const VectorField3 v = unpack(x);
        std::vector<Vec3> gv;
        const double e = mollifier_energy(v, d, eps, tau, q_H, grad ? &gv : nullptr);
        if (grad) {
            grad->resize(3 * n);
            for (std::size_t a = 0; a < n; ++a)
                for (int k = 0; k < 3; ++k) (*grad)[3 * a + k] = gv[a][k];
        }
        return e;
    };
    std::vector<double> x0(3 * n);
    for (std::size_t a = 0; a < n; ++a)
        for (int k = 0; k < 3; ++k) x0[3 * a + k] = d.v[a][k];
    LbfgsOptions opt;
    opt.max_iters = iters;
    opt.grad_tol = 1e-8;
    opt.memory = 10;
    const LbfgsResult r = lbfgs_minimize(obj, x0, opt);

    MollifyResult out;
    out.d = unpack(r.x);
    out.energy_start = r.history.front();
    out.energy_final = r.f;
    out.grad_norm = r.grad_norm;
    out.iterations = r.iterations;
    out.converged = r.converged;
    const std::vector<double> w = node_weights(g);
    double l2 = 0.0, lq = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
        const Vec3 diff = out.d.v[a] - d.v[a];
        l2 += w[a] * dot(diff, diff);
        lq += w[a] * std::pow(norm(out.d.v[a]), q_H);
    }
    out.l2_distance = std::sqrt(l2);
    const CellTensorField f = scaled_gradient(out.d, 1.0);
    const CellHessianField h = scaled_hessian(out.d, 1.0);
    std::vector<double> cell(g.cells());
    for (std::size_t k = 0; k < g.cells(); ++k) {
        double nh2 = 0.0;
        for (double x : h[k]) nh2 += x * x;
        cell[k] = std::pow(norm(f[k]), q_H) + std::pow(std::sqrt(nh2), q_H);
    }
    out.scaled_norm = eps * std::pow(lq + integrate3(g, cell), 1.0 / q_H);
    out.scaled_norm_ratio = out.scaled_norm / std::pow(eps, 1.0 - tau / q_H);
    return out;
}

// ---- sweep ------------------------------------------------------------------

std::vector<SweepRow> recovery_sweep(const SweepSetup& setup, const std::vector<double>& eps_list,
                                     const RowHook& hook) {
    for (std::size_t i = 1; i < eps_list.size(); ++i)
        if (!(eps_list[i] < eps_list[i - 1])) throw InvariantError("recovery_sweep: eps list must be decreasing");
    const Grid3& grid = setup.grid;
    const Material& mat = setup.mat;
    const RelaxedQ2 rq(Q3_form(mat.elastic), mat.prestrain);
    RecoveryInputs inputs = setup.inputs;
    inputs.prestrain = mat.prestrain;
    inputs.validate();

    const Grid2 grid2(grid.n1, grid.n2);
    if (inputs.yhat.nodes() != grid.n1) throw InvariantError("recovery_sweep: isometry must use the x1 nodes of the grid");
    const Potential2 phi0 = solve_potential2(inputs.yhat, grid2, mat, setup.poisson_tol).phi;
    const double m0 = M0(inputs.yhat, rq);
    const double e0 = E0(inputs.yhat, phi0, mat);
    const ScalarField2 m = out_of_plane_field(inputs.yhat, phi0, mat);
    VectorField3 dbar = optimal_corrector(grid, inputs, rq);
    const VectorField3 yhat3 = sample_isometry(grid, inputs.yhat);
    const std::vector<double> w = node_weights(grid);

    std::vector<SweepRow> rows;
    for (double eps : eps_list) {
        SweepRow row;
        row.eps = eps;
        row.M0 = m0;
        row.E0 = e0;
        row.F0 = m0 - e0;
        VectorField3 d = dbar;
        if (setup.use_mollifier)
            d = mollify_field(dbar, eps, 0.5 * mat.hyper.q_H, mat.hyper.q_H, setup.mollifier_iters).d;
        const VectorField3 y = lift_deformation(grid, inputs, eps, d);
        const MechanicalParts mp = mechanical_parts(y, eps, mat);
        row.min_det = mp.min_det;
        row.hyper = mp.hyper;
        if (!mp.feasible) {
            row.feasible = false;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.Mel_scaled = row.M_eps = row.E_eps = row.F_eps = nan;
            row.d2_ratio = row.pW_norm = row.pg0_res = row.E_lift = row.F_lift = nan;
            rows.push_back(row);
            continue;
        }
        row.Mel_scaled = mp.elastic;
        row.M_eps = mp.total();
        const PotentialSolution3 sol = solve_potential3(assemble_poisson3(y, eps, mat), setup.poisson_tol);
        row.cg_iterations = sol.iterations;
        row.E_eps = E_eps(y, sol.phi, eps, mat);
        row.F_eps = row.M_eps - row.E_eps;
        row.pg0_res = check_pg0(y, sol.phi, eps, mat);
        const ScalarField3 phi_lift = lift_potential(grid, phi0, m, eps);
        row.E_lift = E_eps(y, phi_lift, eps, mat);
        row.F_lift = row.M_eps - row.E_lift;
        const AprioriReport ap = apriori_report(y, sol.phi, eps, mat);
        row.d2 = ap.d2;
        row.d2_ratio = ap.d2 / (eps * eps);
        row.pW_norm = ap.grad_phi_pW;

        double ye = 0.0;
        for (std::size_t a = 0; a < grid.nodes(); ++a) {
            const Vec3 diff = y.v[a] - yhat3.v[a];
            ye += w[a] * dot(diff, diff);
        }
        row.y_error = std::sqrt(ye);
        const CellTensorField f = scaled_gradient(y, eps);
        std::vector<double> ge(grid.cells());
        for (std::size_t c = 0; c < grid.cells(); ++c) {
            const Vec3 xc = grid.point_in_cell(c, Vec3{0.5, 0.5, 0.5});
            const Mat3 diff = f[c] - inputs.yhat.frame(xc[0]);
            ge[c] = ddot(diff, diff);
        }
        row.grad_error = std::sqrt(integrate3(grid, ge));
        if (hook) hook(row, y, sol.phi);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace thinvolt
