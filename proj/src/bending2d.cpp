#include "thinvolt/bending2d.hpp"

#include "thinvolt/optimize.hpp"

namespace thinvolt {

namespace {

// int_0^s cos(a + b tau) dtau and int_0^s sin(a + b tau) dtau.
double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }
double int_cos(double a, double b, double s) { return s * std::cos(a + 0.5 * b * s) * sinc(0.5 * b * s); }
double int_sin(double a, double b, double s) { return s * std::sin(a + 0.5 * b * s) * sinc(0.5 * b * s); }

void require_matching(const CylindricalIsometry& y0, const Grid2& grid) {
    if (grid.n1 != y0.nodes()) throw InvariantError("2D grid must share the x1 nodes of the isometry");
}

// dK^eff/dtheta for K_y = R(theta)^T k R(theta).
Mat2 keff_derivative(const Mat3& k, double theta) {
    const Mat3 r = CylindricalIsometry::frame_from_angle(theta);
    const Mat3 dr = CylindricalIsometry::frame_derivative(theta);
    const PartitionedSym3 p = PartitionedSym3::from_matrix(transpose(r) * k * r);
    const Mat3 dk = transpose(dr) * k * r + transpose(r) * k * dr;
    const Mat2 dbar = block2(dk);
    const Vec2 dv{dk(0, 2), dk(1, 2)};
    const double dz = dk(2, 2);
    return dbar - (1.0 / p.kz) * (outer(dv, p.kv) + outer(p.kv, dv)) + (dz / (p.kz * p.kz)) * outer(p.kv, p.kv);
}

double cell_angle(const CylindricalIsometry& y0, int i) { return 0.5 * (y0.theta()[i] + y0.theta()[i + 1]); }

}  // namespace

// ---- isometry ---------------------------------------------------------------

CylindricalIsometry::CylindricalIsometry(std::vector<double> theta) : theta_(std::move(theta)) {
    if (theta_.size() < 2) throw InvariantError("CylindricalIsometry: need at least 2 nodes");
    for (double t : theta_)
        if (!std::isfinite(t)) throw InvariantError("CylindricalIsometry: non-finite angle");
    h_ = 1.0 / (static_cast<double>(theta_.size()) - 1.0);
    x1_integral_.assign(theta_.size(), 0.0);
    x3_integral_.assign(theta_.size(), 0.0);
    for (std::size_t i = 0; i + 1 < theta_.size(); ++i) {
        const double b = (theta_[i + 1] - theta_[i]) / h_;
        x1_integral_[i + 1] = x1_integral_[i] + int_cos(theta_[i], b, h_);
        x3_integral_[i + 1] = x3_integral_[i] - int_sin(theta_[i], b, h_);
    }
}

CylindricalIsometry CylindricalIsometry::constant_curvature(int nodes, double theta0, double curvature) {
    std::vector<double> t(nodes);
    for (int i = 0; i < nodes; ++i) t[i] = theta0 + curvature * (static_cast<double>(i) / (nodes - 1) - 0.5);
    return CylindricalIsometry(std::move(t));
}

int CylindricalIsometry::segment_of(double x1) const {
    const int s = static_cast<int>(std::floor(x1 / h_));
    return std::clamp(s, 0, nodes() - 2);
}

double CylindricalIsometry::angle(double x1) const {
    const int s = segment_of(x1);
    return theta_[s] + slope(s) * (x1 - s * h_);
}

double CylindricalIsometry::node_curvature(int i) const {
    if (i == 0) return slope(0);
    if (i == nodes() - 1) return slope(nodes() - 2);
    return 0.5 * (slope(i - 1) + slope(i));
}

Mat3 CylindricalIsometry::frame_from_angle(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return Mat3{c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c};
}

Mat3 CylindricalIsometry::frame_derivative(double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    return Mat3{-s, 0.0, c, 0.0, 0.0, 0.0, -c, 0.0, -s};
}

Vec3 CylindricalIsometry::position(double x1, double x2) const {
    const int s = segment_of(x1);
    const double local = x1 - s * h_;
    const double b = slope(s);
    return Vec3{x1_integral_[s] + int_cos(theta_[s], b, local), x2, x3_integral_[s] - int_sin(theta_[s], b, local)};
}

Mat2 CylindricalIsometry::second_fundamental_form(int segment) const { return Mat2{slope(segment), 0.0, 0.0, 0.0}; }

// ---- bending energy ---------------------------------------------------------

double M0(const CylindricalIsometry& y0, const RelaxedQ2& rq) {
    double s = 0.0;
    for (int i = 0; i + 1 < y0.nodes(); ++i) s += rq.Qbar2(y0.second_fundamental_form(i)).value;
    return 0.5 * y0.h() * s;
}

std::vector<double> grad_M0(const CylindricalIsometry& y0, const RelaxedQ2& rq) {
    std::vector<double> g(y0.nodes(), 0.0);
    for (int i = 0; i + 1 < y0.nodes(); ++i) {
        const double d = 0.5 * rq.dQbar2(y0.second_fundamental_form(i))(0, 0);
        g[i] -= d;
        g[i + 1] += d;
    }
    return g;
}

// ---- effective electrostatics -----------------------------------------------

std::vector<EffectivePermittivity> cell_effective_permittivity(const CylindricalIsometry& y0, const Grid2& grid,
                                                               const Material& mat) {
    require_matching(y0, grid);
    std::vector<EffectivePermittivity> column(grid.n1 - 1);
    for (int i = 0; i + 1 < grid.n1; ++i)
        column[i] = effective_permittivity(mat.permittivity.k, CylindricalIsometry::frame_from_angle(cell_angle(y0, i)));
    std::vector<EffectivePermittivity> out(grid.cells());
    for (std::size_t c = 0; c < grid.cells(); ++c) out[c] = column[grid.cell_index(c)[0]];
    return out;
}

namespace {

struct Quadrature2 {
    std::array<Vec2, 4> xi;
    std::array<std::array<double, 4>, 4> n;
    std::array<std::array<Vec2, 4>, 4> dn;
};

Quadrature2 quadrature2(const Grid2& g) {
    Quadrature2 q;
    int p = 0;
    for (double a : kGauss2)
        for (double b : kGauss2) {
            q.xi[p] = Vec2{a, b};
            q.n[p] = shape_values2(q.xi[p]);
            q.dn[p] = shape_gradients2(g, q.xi[p]);
            ++p;
        }
    return q;
}

Vec2 cell_gradient2(const Potential2& phi, std::size_t c, const std::array<Vec2, 4>& dn) {
    const auto nodes = phi.grid.cell_nodes(c);
    Vec2 g;
    for (int a = 0; a < 4; ++a) g += phi.v[nodes[a]] * dn[a];
    return g;
}

}  // namespace

PoissonSystem2 assemble_poisson2(const CylindricalIsometry& y0, const Grid2& grid, const Material& mat) {
    PoissonSystem2 sys;
    sys.grid = grid;
    sys.permittivity = cell_effective_permittivity(y0, grid, mat);
    const Quadrature2 q = quadrature2(grid);
    const double scale = 0.25 * grid.cell_area();
    sys.stiffness = StencilMatrix(grid.n1, grid.n2, 1);
    sys.load.assign(grid.nodes(), 0.0);
    for (std::size_t c = 0; c < grid.cells(); ++c) {
        const auto nodes = grid.cell_nodes(c);
        const Mat2& k = sys.permittivity[c].keff;
        for (int p = 0; p < 4; ++p) {
            const Vec2 x = grid.point_in_cell(c, q.xi[p]);
            const double n = mat.charge.averaged(x[0], x[1]);
            for (int a = 0; a < 4; ++a) {
                sys.load[nodes[a]] += mat.coupling.gamma * scale * n * q.n[p][a];
                const Vec2 kd = k * q.dn[p][a];
                for (int b = 0; b < 4; ++b)
                    sys.stiffness.add(nodes[b], nodes[a], mat.coupling.beta * scale * dot(q.dn[p][b], kd));
            }
        }
    }
    sys.weights = node_weights2(grid);
    double bs = 0.0, ws = 0.0;
    for (std::size_t a = 0; a < sys.load.size(); ++a) {
        bs += sys.load[a];
        ws += sys.weights[a];
    }
    for (std::size_t a = 0; a < sys.load.size(); ++a) sys.load[a] -= (bs / ws) * sys.weights[a];
    return sys;
}

PotentialSolution2 solve_potential2(const PoissonSystem2& sys, double tol) {
    const int max_iters = static_cast<int>(4 * sys.grid.nodes() + 200);
    PcgResult r = projected_pcg(sys.stiffness, sys.load, sys.weights, tol, max_iters);
    if (!r.converged) throw SolverError("solve_potential2: CG did not reach tolerance", std::move(r.residuals));
    PotentialSolution2 out;
    out.phi = Potential2(sys.grid);
    out.phi.v = std::move(r.x);
    out.iterations = r.iterations;
    out.residuals = std::move(r.residuals);
    return out;
}

PotentialSolution2 solve_potential2(const CylindricalIsometry& y0, const Grid2& grid, const Material& mat,
                                    double tol) {
    return solve_potential2(assemble_poisson2(y0, grid, mat), tol);
}

double dielectric_term2(const CylindricalIsometry& y0, const Potential2& phi, const Material& mat) {
    const Grid2& g = phi.grid;
    const auto perm = cell_effective_permittivity(y0, g, mat);
    const Quadrature2 q = quadrature2(g);
    std::vector<double> cell(g.cells());
    for (std::size_t c = 0; c < g.cells(); ++c) {
        double s = 0.0;
        for (int p = 0; p < 4; ++p) {
            const Vec2 d = cell_gradient2(phi, c, q.dn[p]);
            s += 0.25 * dot(d, perm[c].keff * d);
        }
        cell[c] = s;
    }
    return integrate2(g, cell);
}

double charge_term2(const Potential2& phi, const Material& mat) {
    const Grid2& g = phi.grid;
    if (mat.charge.is_zero()) return 0.0;
    const Quadrature2 q = quadrature2(g);
    std::vector<double> cell(g.cells());
    for (std::size_t c = 0; c < g.cells(); ++c) {
        double s = 0.0;
        for (int p = 0; p < 4; ++p) {
            const Vec2 x = g.point_in_cell(c, q.xi[p]);
            s += 0.25 * mat.charge.averaged(x[0], x[1]) * interpolate(phi, c, q.xi[p]);
        }
        cell[c] = s;
    }
    return integrate2(g, cell);
}

double E0(const CylindricalIsometry& y0, const Potential2& phi, const Material& mat) {
    return 0.5 * mat.coupling.beta * dielectric_term2(y0, phi, mat) - mat.coupling.gamma * charge_term2(phi, mat);
}

double F0(const CylindricalIsometry& y0, const Potential2& phi, const Material& mat, const RelaxedQ2& rq) {
    return M0(y0, rq) - E0(y0, phi, mat);
}

std::vector<double> grad_theta_F0(const CylindricalIsometry& y0, const Potential2& phi, const Material& mat,
                                  const RelaxedQ2& rq) {
    const Grid2& g = phi.grid;
    require_matching(y0, g);
    std::vector<double> grad = grad_M0(y0, rq);
    const Quadrature2 q = quadrature2(g);
    std::vector<double> column(g.n1 - 1, 0.0);
    for (std::size_t c = 0; c < g.cells(); ++c) {
        const int i = g.cell_index(c)[0];
        const Mat2 dk = keff_derivative(mat.permittivity.k, cell_angle(y0, i));
        double s = 0.0;
        for (int p = 0; p < 4; ++p) {
            const Vec2 d = cell_gradient2(phi, c, q.dn[p]);
            s += 0.25 * dot(d, dk * d);
        }
        column[i] += s * g.cell_area();
    }
    for (int i = 0; i + 1 < g.n1; ++i) {
        const double d = -0.5 * mat.coupling.beta * column[i];
        grad[i] += 0.5 * d;
        grad[i + 1] += 0.5 * d;
    }
    return grad;
}

double check_virial(const CylindricalIsometry& y0, const Potential2& phi, const Material& mat) {
    const double work = mat.coupling.gamma * charge_term2(phi, mat);
    const double flux = mat.coupling.beta * dielectric_term2(y0, phi, mat);
    return std::abs(work - flux) / (1.0 + std::abs(work));
}

// ---- saddle iteration -------------------------------------------------------

SaddleResult2D saddle_iterate_2d(const CylindricalIsometry& initial, const Grid2& grid, const Material& mat,
                                 const RelaxedQ2& rq, const SaddleOptions& opt) {
    require_matching(initial, grid);
    SaddleResult2D res;
    res.y = initial;
    auto norm2 = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    };
    for (int it = 0; it < opt.outer_iters; ++it) {
        res.phi = solve_potential2(res.y, grid, mat, opt.poisson_tol).phi;
        res.grad_norm = norm2(grad_theta_F0(res.y, res.phi, mat, rq));
        res.history.push_back({it, "phi", F0(res.y, res.phi, mat, rq), res.grad_norm});
        if (res.grad_norm <= opt.tol) {
            res.converged = true;
            return res;
        }
        const Potential2 phi = res.phi;
        Objective obj = [&](const std::vector<double>& theta, std::vector<double>* grad) {
            const CylindricalIsometry y(theta);
            if (grad) *grad = grad_theta_F0(y, phi, mat, rq);
            return F0(y, phi, mat, rq);
        };
        LbfgsOptions lo;
        lo.max_iters = opt.inner_iters;
        lo.grad_tol = 0.1 * opt.tol;
        const LbfgsResult lr = lbfgs_minimize(obj, res.y.theta(), lo);
        res.y = CylindricalIsometry(lr.x);
        res.history.push_back({it, "theta", lr.f, lr.grad_norm});
        if (lr.line_search_failed && lr.iterations == 0) {
            res.line_search_failed = true;
            res.phi = solve_potential2(res.y, grid, mat, opt.poisson_tol).phi;
            res.grad_norm = norm2(grad_theta_F0(res.y, res.phi, mat, rq));
            res.converged = res.grad_norm <= opt.tol;
            return res;
        }
    }
    res.phi = solve_potential2(res.y, grid, mat, opt.poisson_tol).phi;
    res.grad_norm = norm2(grad_theta_F0(res.y, res.phi, mat, rq));
    res.history.push_back({opt.outer_iters, "phi", F0(res.y, res.phi, mat, rq), res.grad_norm});
    res.converged = res.grad_norm <= opt.tol;
    return res;
}

}  // namespace thinvolt
