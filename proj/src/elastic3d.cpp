#include "thinvolt/elastic3d.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "thinvolt/parallel.hpp"

namespace thinvolt {

namespace {

struct LayerPrestrain {
    Mat3 m_inv;
    double det_m;
};

LayerPrestrain prestrain_at(double t, double eps, const Material& mat) {
    const Mat3 m = Mat3::identity() + eps * mat.prestrain.at(t);
    LayerPrestrain out{Mat3{}, det3(m)};
    if (!(out.det_m > 0.0)) throw DomainError("prestrain: det M_eps <= 0");
    out.m_inv = inverse3(m);
    return out;
}

// Cell-centre value per layer, used by the diagnostics.
std::vector<LayerPrestrain> layer_prestrain(const Grid3& g, double eps, const Material& mat) {
    std::vector<LayerPrestrain> out(g.n3 - 1);
    for (int k = 0; k + 1 < g.n3; ++k) out[k] = prestrain_at(g.x3(k) + 0.5 * g.h3, eps, mat);
    return out;
}

// [layer][gauss index in x3]
std::vector<std::array<LayerPrestrain, 2>> gauss_prestrain(const Grid3& g, double eps, const Material& mat) {
    std::vector<std::array<LayerPrestrain, 2>> out(g.n3 - 1);
    for (int k = 0; k + 1 < g.n3; ++k)
        for (int z = 0; z < 2; ++z) out[k][z] = prestrain_at(g.x3(k) + kGauss2[z] * g.h3, eps, mat);
    return out;
}

// In-plane cell centre, two Gauss points across the thickness.
struct ThicknessQuadrature {
    std::array<std::array<Vec3, 8>, 2> dn;
    double weight = 0.5;
};

ThicknessQuadrature thickness_quadrature(const Grid3& g, double eps) {
    ThicknessQuadrature q;
    for (int z = 0; z < 2; ++z) q.dn[z] = shape_gradients(g, Vec3{0.5, 0.5, kGauss2[z]}, eps);
    return q;
}

void require_eps(double eps) {
    if (!(eps > 0.0)) throw DomainError("eps must be positive");
}

}  // namespace

double MechanicalParts::total() const {
    return feasible ? elastic + hyper : std::numeric_limits<double>::infinity();
}

MechanicalParts mechanical_parts(const DeformationField3& y, double eps, const Material& mat) {
    require_eps(eps);
    const Grid3& g = y.grid;
    const auto layers = gauss_prestrain(g, eps, mat);
    const ThicknessQuadrature q = thickness_quadrature(g, eps);
    const CellHessianField h = scaled_hessian(y, eps);
    std::vector<double> we(g.cells()), wh(g.cells()), dets(g.cells());
    parallel_for(g.cells(), [&](std::size_t c) {
        const auto& lp = layers[g.cell_index(c)[2]];
        double w = 0.0, dmin = std::numeric_limits<double>::infinity();
        for (int p = 0; p < 2; ++p) {
            const LayerPrestrain& l = lp[p];
            const Mat3 fe = cell_gradient(y, c, q.dn[p]) * l.m_inv;
            dmin = std::min(dmin, det3(fe));
            w += q.weight * W_el(mat.elastic, fe) * l.det_m;
        }
        dets[c] = dmin;
        we[c] = w;
        wh[c] = H_hyper(mat.hyper, h[c], eps);
    });
    MechanicalParts out;
    out.min_det = std::numeric_limits<double>::infinity();
    for (double d : dets) out.min_det = std::min(out.min_det, d);
    out.feasible = out.min_det > 0.0;
    const double inv = 1.0 / (eps * eps);
    out.elastic = out.feasible ? inv * integrate3(g, we) : std::numeric_limits<double>::infinity();
    out.hyper = inv * integrate3(g, wh);
    return out;
}

double M_eps(const DeformationField3& y, double eps, const Material& mat) {
    return mechanical_parts(y, eps, mat).total();
}

VectorField3 grad_M_eps(const DeformationField3& y, double eps, const Material& mat) {
    require_eps(eps);
    const Grid3& g = y.grid;
    const auto layers = gauss_prestrain(g, eps, mat);
    const ThicknessQuadrature q = thickness_quadrature(g, eps);
    const CellHessianField h = scaled_hessian(y, eps);
    const double scale = g.cell_volume() / (eps * eps);
    std::vector<std::array<Vec3, 8>> local(g.cells());
    CellHessianField ph(g.cells());
    std::vector<char> bad(g.cells(), 0);
    parallel_for(g.cells(), [&](std::size_t c) {
        const auto& lp = layers[g.cell_index(c)[2]];
        std::array<Vec3, 8> acc{};
        for (int p = 0; p < 2; ++p) {
            const LayerPrestrain& l = lp[p];
            const Mat3 fe = cell_gradient(y, c, q.dn[p]) * l.m_inv;
            if (!(det3(fe) > 0.0)) {
                bad[c] = 1;
                return;
            }
            const Mat3 pf = (scale * q.weight * l.det_m) * (dW_el(mat.elastic, fe) * transpose(l.m_inv));
            for (int a = 0; a < 8; ++a) acc[a] += pf * q.dn[p][a];
        }
        local[c] = acc;
        ph[c] = dH_hyper(mat.hyper, h[c], eps);
        for (double& x : ph[c]) x *= scale;
    });
    for (std::size_t c = 0; c < bad.size(); ++c)
        if (bad[c]) throw DomainError("grad_M_eps: infinite energy (det <= 0 at cell " + std::to_string(c) + ")");
    VectorField3 out(g);
    for (std::size_t c = 0; c < g.cells(); ++c) {
        const auto nodes = g.cell_nodes(c);
        for (int a = 0; a < 8; ++a) out.v[nodes[a]] += local[c][a];
    }
    scatter_hessian_adjoint(g, ph, eps, out.v);
    Vec3 m;
    for (const auto& v : out.v) m += v;
    m *= 1.0 / static_cast<double>(out.v.size());
    for (auto& v : out.v) v -= m;
    return out;
}

double F_eps(const DeformationField3& y, const ScalarField3& phi, double eps, const Material& mat) {
    const double m = M_eps(y, eps, mat);
    if (!std::isfinite(m)) return m;
    return m - E_eps(y, phi, eps, mat);
}

VectorField3 grad_y_F_eps(const DeformationField3& y, const ScalarField3& phi, double eps, const Material& mat) {
    VectorField3 out = grad_M_eps(y, eps, mat);
    const Grid3& g = y.grid;
    const CellTensorField f = scaled_gradient(y, eps);
    const CellQuadrature3 q = cell_quadrature3(g, eps);
    const double scale = mat.coupling.beta * q.weight * g.cell_volume();
    CellTensorField p(g.cells());
    parallel_for(g.cells(), [&](std::size_t c) {
        Mat3 s;
        for (int k = 0; k < 8; ++k) s += maxwell_stress(f[c], mat.permittivity.k, cell_scalar_gradient(phi, c, q.dn[k]));
        p[c] = scale * s;
    });
    std::vector<Vec3> extra(g.nodes());
    scatter_gradient_adjoint(g, p, eps, extra);
    Vec3 m;
    for (const auto& v : extra) m += v;
    m *= 1.0 / static_cast<double>(extra.size());
    for (std::size_t a = 0; a < extra.size(); ++a) out.v[a] += extra[a] - m;
    return out;
}

AprioriReport apriori_report(const DeformationField3& y, const ScalarField3& phi, double eps, const Material& mat) {
    require_eps(eps);
    const Grid3& g = y.grid;
    const auto layers = layer_prestrain(g, eps, mat);
    const CellTensorField f = scaled_gradient(y, eps);
    const CellQuadrature3 q = cell_quadrature3(g, eps);
    const double qw = mat.elastic.q_W;
    AprioriReport r;
    r.eps = eps;
    r.p_W = 2.0 / (1.0 + 4.0 / qw);
    const std::size_t nc = g.cells();
    std::vector<double> d2(nc), d2p(nc), gq(nc), idet(nc), flux(nc), gp(nc), dets(nc);
    parallel_for(nc, [&](std::size_t c) {
        const LayerPrestrain& lp = layers[g.cell_index(c)[2]];
        const double d = det3(f[c]);
        dets[c] = d;
        d2[c] = dist_SO3_sq(f[c]);
        d2p[c] = dist_SO3_sq(f[c] * lp.m_inv) * lp.det_m;
        gq[c] = std::pow(norm(f[c]), qw);
        idet[c] = d > 0.0 ? std::pow(d, -0.5 * qw) : std::numeric_limits<double>::infinity();
        double fl = 0.0, pw = 0.0;
        const Mat3 fit = d > 0.0 ? transpose(inverse3(f[c])) : Mat3{};
        for (int k = 0; k < 8; ++k) {
            const Vec3 grad = cell_scalar_gradient(phi, c, q.dn[k]);
            const Vec3 e = fit * grad;
            fl += q.weight * dot(e, e) * d;
            pw += q.weight * std::pow(norm(grad), r.p_W);
        }
        flux[c] = fl;
        gp[c] = pw;
    });
    r.d2 = integrate3(g, d2);
    r.d2_prestrain = integrate3(g, d2p);
    r.grad_qW = integrate3(g, gq);
    r.inv_det_qW2 = integrate3(g, idet);
    r.weighted_flux = integrate3(g, flux);
    r.grad_phi_pW = std::pow(integrate3(g, gp), 1.0 / r.p_W);
    r.min_det = *std::min_element(dets.begin(), dets.end());
    return r;
}

}  // namespace thinvolt
