#include "thinvolt/fields.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>

#include "thinvolt/parallel.hpp"

namespace thinvolt {

namespace {

void require_eps(double eps, const char* what) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError(std::string(what) + ": eps must be positive");
}

std::vector<double> trapezoid_weights(int n, double h) {
    std::vector<double> w(n, h);
    w.front() = w.back() = 0.5 * h;
    return w;
}

}  // namespace

Grid3::Grid3(int n1_, int n2_, int n3_) : n1(n1_), n2(n2_), n3(n3_) {
    if (n1 < 3 || n2 < 3 || n3 < 3) throw InvariantError("Grid3: need at least 3 nodes per axis");
    h1 = 1.0 / (n1 - 1);
    h2 = 1.0 / (n2 - 1);
    h3 = 1.0 / (n3 - 1);
}

std::array<int, 3> Grid3::node_index(std::size_t a) const {
    const int k = static_cast<int>(a % n3);
    const std::size_t r = a / n3;
    return {static_cast<int>(r / n2), static_cast<int>(r % n2), k};
}

std::array<int, 3> Grid3::cell_index(std::size_t c) const {
    const int m3 = n3 - 1, m2 = n2 - 1;
    const int k = static_cast<int>(c % m3);
    const std::size_t r = c / m3;
    return {static_cast<int>(r / m2), static_cast<int>(r % m2), k};
}

Vec3 Grid3::node_position(std::size_t a) const {
    const auto [i, j, k] = node_index(a);
    return Vec3{x1(i), x2(j), x3(k)};
}

Vec3 Grid3::point_in_cell(std::size_t c, const Vec3& xi) const {
    const auto [i, j, k] = cell_index(c);
    return Vec3{x1(i) + xi[0] * h1, x2(j) + xi[1] * h2, x3(k) + xi[2] * h3};
}

std::array<std::size_t, 8> Grid3::cell_nodes(std::size_t c) const {
    const auto [i, j, k] = cell_index(c);
    std::array<std::size_t, 8> out{};
    for (int d1 = 0; d1 < 2; ++d1)
        for (int d2 = 0; d2 < 2; ++d2)
            for (int d3 = 0; d3 < 2; ++d3) out[(d1 * 2 + d2) * 2 + d3] = node(i + d1, j + d2, k + d3);
    return out;
}

Grid2::Grid2(int n1_, int n2_) : n1(n1_), n2(n2_) {
    if (n1 < 3 || n2 < 3) throw InvariantError("Grid2: need at least 3 nodes per axis");
    h1 = 1.0 / (n1 - 1);
    h2 = 1.0 / (n2 - 1);
}

Vec2 Grid2::point_in_cell(std::size_t c, const Vec2& xi) const {
    const auto [i, j] = cell_index(c);
    return Vec2{x1(i) + xi[0] * h1, x2(j) + xi[1] * h2};
}

std::array<std::size_t, 4> Grid2::cell_nodes(std::size_t c) const {
    const auto [i, j] = cell_index(c);
    return {node(i, j), node(i, j + 1), node(i + 1, j), node(i + 1, j + 1)};
}

void ScalarField3::validate() const {
    if (v.size() != grid.nodes()) throw InvariantError("ScalarField3: length does not match grid");
    for (double x : v)
        if (!std::isfinite(x)) throw InvariantError("ScalarField3: non-finite value");
}

void VectorField3::validate() const {
    if (v.size() != grid.nodes()) throw InvariantError("VectorField3: length does not match grid");
    for (const auto& x : v) require_finite(x, "VectorField3");
}

void ScalarField2::validate() const {
    if (v.size() != grid.nodes()) throw InvariantError("ScalarField2: length does not match grid");
    for (double x : v)
        if (!std::isfinite(x)) throw InvariantError("ScalarField2: non-finite value");
}

// ---- shape functions --------------------------------------------------------

std::array<double, 8> shape_values(const Vec3& xi) {
    std::array<double, 8> n{};
    for (int d1 = 0; d1 < 2; ++d1)
        for (int d2 = 0; d2 < 2; ++d2)
            for (int d3 = 0; d3 < 2; ++d3) {
                const double l1 = d1 ? xi[0] : 1.0 - xi[0];
                const double l2 = d2 ? xi[1] : 1.0 - xi[1];
                const double l3 = d3 ? xi[2] : 1.0 - xi[2];
                n[(d1 * 2 + d2) * 2 + d3] = l1 * l2 * l3;
            }
    return n;
}

std::array<Vec3, 8> shape_gradients(const Grid3& g, const Vec3& xi, double eps) {
    require_eps(eps, "shape_gradients");
    std::array<Vec3, 8> dn{};
    for (int d1 = 0; d1 < 2; ++d1)
        for (int d2 = 0; d2 < 2; ++d2)
            for (int d3 = 0; d3 < 2; ++d3) {
                const double l1 = d1 ? xi[0] : 1.0 - xi[0];
                const double l2 = d2 ? xi[1] : 1.0 - xi[1];
                const double l3 = d3 ? xi[2] : 1.0 - xi[2];
                const double s1 = (d1 ? 1.0 : -1.0) / g.h1;
                const double s2 = (d2 ? 1.0 : -1.0) / g.h2;
                const double s3 = (d3 ? 1.0 : -1.0) / (g.h3 * eps);
                dn[(d1 * 2 + d2) * 2 + d3] = Vec3{s1 * l2 * l3, l1 * s2 * l3, l1 * l2 * s3};
            }
    return dn;
}

std::array<double, 4> shape_values2(const Vec2& xi) {
    return {(1.0 - xi[0]) * (1.0 - xi[1]), (1.0 - xi[0]) * xi[1], xi[0] * (1.0 - xi[1]), xi[0] * xi[1]};
}

std::array<Vec2, 4> shape_gradients2(const Grid2& g, const Vec2& xi) {
    const double a = 1.0 / g.h1, b = 1.0 / g.h2;
    return {Vec2{-a * (1.0 - xi[1]), -b * (1.0 - xi[0])}, Vec2{-a * xi[1], b * (1.0 - xi[0])},
            Vec2{a * (1.0 - xi[1]), -b * xi[0]}, Vec2{a * xi[1], b * xi[0]}};
}

// ---- first derivatives ------------------------------------------------------

Mat3 cell_gradient(const VectorField3& y, std::size_t c, const std::array<Vec3, 8>& dn) {
    const auto nodes = y.grid.cell_nodes(c);
    Mat3 f;
    for (int a = 0; a < 8; ++a) f += outer(y.v[nodes[a]], dn[a]);
    return f;
}

Vec3 cell_scalar_gradient(const ScalarField3& phi, std::size_t c, const std::array<Vec3, 8>& dn) {
    const auto nodes = phi.grid.cell_nodes(c);
    Vec3 g;
    for (int a = 0; a < 8; ++a) g += phi.v[nodes[a]] * dn[a];
    return g;
}

CellTensorField scaled_gradient(const VectorField3& y, double eps) {
    require_eps(eps, "scaled_gradient");
    const auto dn = shape_gradients(y.grid, Vec3{0.5, 0.5, 0.5}, eps);
    CellTensorField out(y.grid.cells());
    parallel_for(out.size(), [&](std::size_t c) { out[c] = cell_gradient(y, c, dn); });
    return out;
}

void scatter_gradient_adjoint(const Grid3& g, const CellTensorField& p, double eps, std::vector<Vec3>& out) {
    require_eps(eps, "scatter_gradient_adjoint");
    const auto dn = shape_gradients(g, Vec3{0.5, 0.5, 0.5}, eps);
    out.resize(g.nodes());
    for (std::size_t c = 0; c < g.cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        for (int a = 0; a < 8; ++a) out[nodes[a]] += p[c] * dn[a];
    }
}

// ---- second derivatives -----------------------------------------------------

HessianStencil hessian_stencil(const Grid3& g, std::size_t c, int a, int b) {
    const auto base = g.cell_index(c);
    HessianStencil s;
    if (a == b) {
        const double h = g.spacing(a);
        const double w = 1.0 / (8.0 * h * h);
        const int n = g.count(a);
        for (int d1 = 0; d1 < 2; ++d1)
            for (int d2 = 0; d2 < 2; ++d2)
                for (int d3 = 0; d3 < 2; ++d3) {
                    std::array<int, 3> idx{base[0] + d1, base[1] + d2, base[2] + d3};
                    idx[a] = std::clamp(idx[a], 1, n - 2);
                    for (int off = -1; off <= 1; ++off) {
                        std::array<int, 3> q = idx;
                        q[a] += off;
                        s.e[s.n++] = {g.node(q[0], q[1], q[2]), off == 0 ? -2.0 * w : w};
                    }
                }
        return s;
    }
    const int r = 3 - a - b;
    const double w = 0.5 / (g.spacing(a) * g.spacing(b));
    for (int dr = 0; dr < 2; ++dr)
        for (int da = 0; da < 2; ++da)
            for (int db = 0; db < 2; ++db) {
                std::array<int, 3> q = base;
                q[r] += dr;
                q[a] += da;
                q[b] += db;
                s.e[s.n++] = {g.node(q[0], q[1], q[2]), (da == db) ? w : -w};
            }
    return s;
}

double hessian_factor(int a, int b, double eps) {
    const int n3 = (a == 2) + (b == 2);
    return n3 == 0 ? 1.0 : (n3 == 1 ? 1.0 / eps : 1.0 / (eps * eps));
}

CellHessianField scaled_hessian(const VectorField3& y, double eps) {
    require_eps(eps, "scaled_hessian");
    const Grid3& g = y.grid;
    CellHessianField out(g.cells());
    parallel_for(out.size(), [&](std::size_t c) {
        Tensor3& t = out[c];
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) {
                const HessianStencil s = hessian_stencil(g, c, a, b);
                Vec3 d;
                for (int e = 0; e < s.n; ++e) d += s.e[e].w * y.v[s.e[e].node];
                d *= hessian_factor(a, b, eps);
                for (int k = 0; k < 3; ++k) {
                    t[t3(a, b, k)] = d[k];
                    t[t3(b, a, k)] = d[k];
                }
            }
    });
    return out;
}

void scatter_hessian_adjoint(const Grid3& g, const CellHessianField& p, double eps, std::vector<Vec3>& out) {
    require_eps(eps, "scatter_hessian_adjoint");
    out.resize(g.nodes());
    for (std::size_t c = 0; c < g.cells(); ++c) {
        const Tensor3& t = p[c];
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) {
                Vec3 coeff;
                for (int k = 0; k < 3; ++k) coeff[k] = (a == b) ? t[t3(a, a, k)] : t[t3(a, b, k)] + t[t3(b, a, k)];
                coeff *= hessian_factor(a, b, eps);
                const HessianStencil s = hessian_stencil(g, c, a, b);
                for (int e = 0; e < s.n; ++e) out[s.e[e].node] += s.e[e].w * coeff;
            }
    }
}

// ---- quadrature and gauges --------------------------------------------------

double integrate3(const Grid3& g, const std::vector<double>& cellwise) {
    if (cellwise.size() != g.cells()) throw InvariantError("integrate3: one value per cell expected");
    double s = 0.0;
    for (double x : cellwise) s += x;
    return s * g.cell_volume();
}

double integrate2(const Grid2& g, const std::vector<double>& cellwise) {
    if (cellwise.size() != g.cells()) throw InvariantError("integrate2: one value per cell expected");
    double s = 0.0;
    for (double x : cellwise) s += x;
    return s * g.cell_area();
}

std::vector<double> node_weights(const Grid3& g) {
    const auto w1 = trapezoid_weights(g.n1, g.h1);
    const auto w2 = trapezoid_weights(g.n2, g.h2);
    const auto w3 = trapezoid_weights(g.n3, g.h3);
    std::vector<double> w(g.nodes());
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j)
            for (int k = 0; k < g.n3; ++k) w[g.node(i, j, k)] = w1[i] * w2[j] * w3[k];
    return w;
}

std::vector<double> node_weights2(const Grid2& g) {
    const auto w1 = trapezoid_weights(g.n1, g.h1);
    const auto w2 = trapezoid_weights(g.n2, g.h2);
    std::vector<double> w(g.nodes());
    for (int i = 0; i < g.n1; ++i)
        for (int j = 0; j < g.n2; ++j) w[g.node(i, j)] = w1[i] * w2[j];
    return w;
}

namespace {

template <typename T>
T weighted_mean(const std::vector<T>& v, const std::vector<double>& w) {
    T s{};
    double ws = 0.0;
    for (std::size_t a = 0; a < v.size(); ++a) {
        s += w[a] * v[a];
        ws += w[a];
    }
    return (1.0 / ws) * s;
}

}  // namespace

double mean(const ScalarField3& f) { return weighted_mean(f.v, node_weights(f.grid)); }
double mean(const ScalarField2& f) { return weighted_mean(f.v, node_weights2(f.grid)); }
Vec3 mean(const VectorField3& f) { return weighted_mean(f.v, node_weights(f.grid)); }

ScalarField3 zero_mean_project(const ScalarField3& f) {
    ScalarField3 out = f;
    const double m = mean(f);
    for (double& x : out.v) x -= m;
    return out;
}

ScalarField2 zero_mean_project(const ScalarField2& f) {
    ScalarField2 out = f;
    const double m = mean(f);
    for (double& x : out.v) x -= m;
    return out;
}

VectorField3 zero_mean_project(const VectorField3& f) {
    VectorField3 out = f;
    const Vec3 m = mean(f);
    for (auto& x : out.v) x -= m;
    return out;
}

VectorField3 flat_reference(const Grid3& g, double eps) {
    require_eps(eps, "flat_reference");
    VectorField3 y(g);
    for (std::size_t a = 0; a < g.nodes(); ++a) {
        const Vec3 x = g.node_position(a);
        y.v[a] = Vec3{x[0] - 0.5, x[1] - 0.5, eps * x[2]};
    }
    return y;
}

double interpolate(const ScalarField3& f, std::size_t c, const Vec3& xi) {
    const auto nodes = f.grid.cell_nodes(c);
    const auto n = shape_values(xi);
    double s = 0.0;
    for (int a = 0; a < 8; ++a) s += n[a] * f.v[nodes[a]];
    return s;
}

double interpolate(const ScalarField2& f, std::size_t c, const Vec2& xi) {
    const auto nodes = f.grid.cell_nodes(c);
    const auto n = shape_values2(xi);
    double s = 0.0;
    for (int a = 0; a < 4; ++a) s += n[a] * f.v[nodes[a]];
    return s;
}

// ---- dumps ------------------------------------------------------------------

namespace {

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << std::setprecision(17);
    return out;
}

}  // namespace

void write_field_csv(const std::string& path, const ScalarField3& f) {
    auto out = open_csv(path);
    out << "index,x1,x2,x3,value\n";
    for (std::size_t a = 0; a < f.grid.nodes(); ++a) {
        const Vec3 x = f.grid.node_position(a);
        out << a << ',' << x[0] << ',' << x[1] << ',' << x[2] << ',' << f.v[a] << '\n';
    }
}

void write_field_csv(const std::string& path, const VectorField3& f) {
    auto out = open_csv(path);
    out << "index,x1,x2,x3,y1,y2,y3\n";
    for (std::size_t a = 0; a < f.grid.nodes(); ++a) {
        const Vec3 x = f.grid.node_position(a);
        out << a << ',' << x[0] << ',' << x[1] << ',' << x[2] << ',' << f.v[a][0] << ',' << f.v[a][1] << ','
            << f.v[a][2] << '\n';
    }
}

void write_field_csv(const std::string& path, const ScalarField2& f) {
    auto out = open_csv(path);
    out << "index,x1,x2,value\n";
    for (std::size_t a = 0; a < f.grid.nodes(); ++a) {
        const auto [i, j] = f.grid.node_index(a);
        out << a << ',' << f.grid.x1(i) << ',' << f.grid.x2(j) << ',' << f.v[a] << '\n';
    }
}

}  // namespace thinvolt
