#include "thinvolt/electro3d.hpp"

#include "thinvolt/parallel.hpp"

namespace thinvolt {

CellQuadrature3 cell_quadrature3(const Grid3& g, double eps) {
    CellQuadrature3 q;
    int p = 0;
    for (double a : kGauss2)
        for (double b : kGauss2)
            for (double c : kGauss2) {
                q.xi[p] = Vec3{a, b, c};
                q.n[p] = shape_values(q.xi[p]);
                q.dn[p] = shape_gradients(g, q.xi[p], eps);
                ++p;
            }
    return q;
}

std::vector<Mat3> cell_permittivity(const VectorField3& y, double eps, const Material& mat) {
    const CellTensorField f = scaled_gradient(y, eps);
    std::vector<Mat3> kappa(f.size());
    std::vector<char> bad(f.size(), 0);
    parallel_for(f.size(), [&](std::size_t c) {
        if (!(det3(f[c]) > 0.0)) {
            bad[c] = 1;
            return;
        }
        kappa[c] = kappa_pullback(f[c], mat.permittivity.k);
    });
    for (std::size_t c = 0; c < bad.size(); ++c)
        if (bad[c]) throw OrientationError("deformation not orientation-preserving at cell " + std::to_string(c), c);
    return kappa;
}

namespace {

std::vector<double> charge_load(const Grid3& g, const Material& mat) {
    const CellQuadrature3 q = cell_quadrature3(g, 1.0);
    std::vector<double> b(g.nodes(), 0.0);
    if (mat.charge.is_zero()) return b;
    const double scale = mat.coupling.gamma * q.weight * g.cell_volume();
    for (std::size_t c = 0; c < g.cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        for (int p = 0; p < 8; ++p) {
            const Vec3 x = g.point_in_cell(c, q.xi[p]);
            const double n = mat.charge(x[0], x[1], x[2]);
            for (int a = 0; a < 8; ++a) b[nodes[a]] += scale * n * q.n[p][a];
        }
    }
    return b;
}

}  // namespace

PoissonSystem3 assemble_poisson3(const VectorField3& y, double eps, const Material& mat) {
    if (!(eps > 0.0)) throw DomainError("assemble_poisson3: eps must be positive");
    const Grid3& g = y.grid;
    PoissonSystem3 sys;
    sys.grid = g;
    sys.eps = eps;
    sys.coefficient = cell_permittivity(y, eps, mat);
    const CellQuadrature3 q = cell_quadrature3(g, eps);
    const double scale = mat.coupling.beta * q.weight * g.cell_volume();

    std::vector<std::array<double, 64>> element(g.cells());
    parallel_for(g.cells(), [&](std::size_t c) {
        const Mat3& a = sys.coefficient[c];
        auto& ke = element[c];
        ke.fill(0.0);
        for (int p = 0; p < 8; ++p) {
            std::array<Vec3, 8> adn;
            for (int i = 0; i < 8; ++i) adn[i] = a * q.dn[p][i];
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) ke[i * 8 + j] += scale * dot(q.dn[p][i], adn[j]);
        }
    });
    sys.stiffness = StencilMatrix(g.n1, g.n2, g.n3);
    for (std::size_t c = 0; c < g.cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) sys.stiffness.add(nodes[i], nodes[j], element[c][i * 8 + j]);
    }

    sys.weights = node_weights(g);
    sys.load = charge_load(g, mat);
    double bs = 0.0, ws = 0.0;
    for (std::size_t a = 0; a < sys.load.size(); ++a) {
        bs += sys.load[a];
        ws += sys.weights[a];
    }
    for (std::size_t a = 0; a < sys.load.size(); ++a) sys.load[a] -= (bs / ws) * sys.weights[a];
    return sys;
}

PotentialSolution3 solve_potential3(const PoissonSystem3& sys, double tol, int max_iters,
                                    const ScalarField3* start) {
    if (max_iters <= 0) max_iters = static_cast<int>(4 * sys.grid.nodes() + 200);
    const std::vector<double>* x0 = start ? &start->v : nullptr;
    PcgResult r = projected_pcg(sys.stiffness, sys.load, sys.weights, tol, max_iters, x0);
    if (!r.converged)
        throw SolverError("solve_potential3: CG did not reach tolerance", std::move(r.residuals));
    PotentialSolution3 out;
    out.phi = ScalarField3(sys.grid);
    out.phi.v = std::move(r.x);
    out.iterations = r.iterations;
    out.residuals = std::move(r.residuals);
    return out;
}

double dielectric_term3(const VectorField3& y, const ScalarField3& phi, double eps, const Material& mat) {
    const Grid3& g = y.grid;
    const std::vector<Mat3> kappa = cell_permittivity(y, eps, mat);
    const CellQuadrature3 q = cell_quadrature3(g, eps);
    std::vector<double> cell(g.cells());
    parallel_for(g.cells(), [&](std::size_t c) {
        double s = 0.0;
        for (int p = 0; p < 8; ++p) {
            const Vec3 gp = cell_scalar_gradient(phi, c, q.dn[p]);
            s += q.weight * dot(gp, kappa[c] * gp);
        }
        cell[c] = s;
    });
    return integrate3(g, cell);
}

double charge_term3(const ScalarField3& phi, const Material& mat) {
    const Grid3& g = phi.grid;
    if (mat.charge.is_zero()) return 0.0;
    const CellQuadrature3 q = cell_quadrature3(g, 1.0);
    std::vector<double> cell(g.cells());
    parallel_for(g.cells(), [&](std::size_t c) {
        const auto nodes = g.cell_nodes(c);
        double s = 0.0;
        for (int p = 0; p < 8; ++p) {
            const Vec3 x = g.point_in_cell(c, q.xi[p]);
            double v = 0.0;
            for (int a = 0; a < 8; ++a) v += q.n[p][a] * phi.v[nodes[a]];
            s += q.weight * mat.charge(x[0], x[1], x[2]) * v;
        }
        cell[c] = s;
    });
    return integrate3(g, cell);
}

double E_eps(const VectorField3& y, const ScalarField3& phi, double eps, const Material& mat) {
    return 0.5 * mat.coupling.beta * dielectric_term3(y, phi, eps, mat) -
           mat.coupling.gamma * charge_term3(phi, mat);
}

double check_pg0(const VectorField3& y, const ScalarField3& phi, double eps, const Material& mat) {
    const Grid3& g = y.grid;
    const CellTensorField f = scaled_gradient(y, eps);
    const CellQuadrature3 q = cell_quadrature3(g, eps);
    std::vector<double> cell(g.cells());
    parallel_for(g.cells(), [&](std::size_t c) {
        const double d = det3(f[c]);
        if (!(d > 0.0)) throw OrientationError("check_pg0: det <= 0", c);
        const Mat3 fit = transpose(inverse3(f[c]));
        double s = 0.0;
        for (int p = 0; p < 8; ++p) {
            const Vec3 e = fit * cell_scalar_gradient(phi, c, q.dn[p]);
            s += q.weight * dot(mat.permittivity.k * e, e) * d;
        }
        cell[c] = s;
    });
    const double flux = mat.coupling.beta * integrate3(g, cell);
    const double work = mat.coupling.gamma * charge_term3(phi, mat);
    return std::abs(flux - work) / (1.0 + std::abs(work));
}

}  // namespace thinvolt
