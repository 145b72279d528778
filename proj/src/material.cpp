#include "thinvolt/material.hpp"

#include <limits>
#include <random>

namespace thinvolt {

namespace {

bool symmetric(const Mat3& m, double tol = 1e-12) { return norm(m - transpose(m)) <= tol * (1.0 + norm(m)); }

}  // namespace

// ---- parameter records ------------------------------------------------------

double ElasticParams::gamma_d() const { return lambda / barrier_d2_at_one(q_W); }

void ElasticParams::validate() const {
    if (!(mu > 0.0)) throw InvariantError("elastic: mu must be positive");
    if (!(lambda >= 0.0)) throw InvariantError("elastic: lambda must be non-negative");
    if (!(q_W > 6.0)) throw InvariantError("elastic: q_W must exceed 6");
    if (!std::isfinite(mu) || !std::isfinite(lambda) || !std::isfinite(q_W))
        throw InvariantError("elastic: non-finite parameter");
}

void HyperParams::validate() const {
    if (!(q_H > 3.0)) throw InvariantError("hyper: q_H must exceed 3");
    if (!(alpha_H > 2.0 + 2.0 * q_H)) throw InvariantError("hyper: alpha_H must exceed 2 + 2 q_H");
    if (!(c_H > 0.0)) throw InvariantError("hyper: c_H must be positive");
    if (!std::isfinite(alpha_H) || !std::isfinite(c_H)) throw InvariantError("hyper: non-finite parameter");
}

void PrestrainModel::validate() const {
    require_finite(B0, "prestrain B0");
    require_finite(B1, "prestrain B1");
    if (!symmetric(B0) || !symmetric(B1)) throw InvariantError("prestrain: B0 and B1 must be symmetric");
}

double PermittivityModel::min_eigenvalue() const { return sym_eigenvalues3(k)[0]; }
double PermittivityModel::max_eigenvalue() const { return sym_eigenvalues3(k)[2]; }

void PermittivityModel::validate() const {
    require_finite(k, "permittivity");
    if (!symmetric(k)) throw InvariantError("permittivity: k must be symmetric");
    if (!(min_eigenvalue() > 0.0)) throw InvariantError("permittivity: k must be positive definite");
}

double ChargeModel::operator()(double x1, double, double) const {
    return mode == Mode::constant ? amplitude : amplitude * std::cos(M_PI * x1);
}

void CouplingConstants::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvariantError("coupling: beta must be positive");
    if (!std::isfinite(gamma)) throw InvariantError("coupling: gamma must be finite");
}

void Material::validate() const {
    elastic.validate();
    hyper.validate();
    const double bound = 3.0 * hyper.q_H / (hyper.q_H - 3.0);
    if (!(elastic.q_W / 2.0 > bound))
        throw InvariantError("q_W/2 must exceed 3 q_H/(q_H - 3) = " + std::to_string(bound));
    prestrain.validate();
    permittivity.validate();
    coupling.validate();
    if (!std::isfinite(charge.amplitude)) throw InvariantError("charge: non-finite amplitude");
}

// ---- elastic density --------------------------------------------------------

double barrier(double d, double q) { return std::pow(d, -0.5 * q) - 1.0 + 0.5 * q * (d - 1.0); }

double barrier_d1(double d, double q) { return -0.5 * q * std::pow(d, -0.5 * q - 1.0) + 0.5 * q; }

double barrier_d2_at_one(double q) { return 0.5 * q * (0.5 * q + 1.0); }

double W_el(const ElasticParams& p, const Mat3& f) {
    const double d = det3(f);
    if (!(d > 0.0)) return std::numeric_limits<double>::infinity();
    const Mat3 e = transpose(f) * f - Mat3::identity();
    return 0.25 * p.mu * ddot(e, e) + p.gamma_d() * barrier(d, p.q_W);
}

Mat3 dW_el(const ElasticParams& p, const Mat3& f) {
    const double d = det3(f);
    if (!(d > 0.0)) throw DomainError("dW_el: det F <= 0");
    const Mat3 e = transpose(f) * f - Mat3::identity();
    return p.mu * (f * e) + (p.gamma_d() * barrier_d1(d, p.q_W)) * cofactor3(f);
}

QuadForm3 Q3_form(const ElasticParams& p) {
    std::array<double, 81> a{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    double v = p.mu * ((i == k && j == l) + (i == l && j == k));
                    if (i == j && k == l) v += p.lambda;
                    a[(i * 3 + j) * 9 + (k * 3 + l)] = v;
                }
    return QuadForm3(a);
}

std::vector<ExpansionSample> quadratic_expansion_check(const ElasticParams& p, int n_samples, std::uint64_t seed) {
    const QuadForm3 q = Q3_form(p);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::vector<ExpansionSample> out;
    for (double r : {1e-2, 1e-3, 1e-4}) {
        double worst = 0.0;
        for (int s = 0; s < n_samples; ++s) {
            Mat3 f;
            for (double& x : f.a) x = normal(rng);
            f *= r / norm(f);
            const double dev = std::abs(W_el(p, Mat3::identity() + f) - 0.5 * q(f)) / (r * r);
            worst = std::max(worst, dev);
        }
        out.push_back({r, worst});
    }
    return out;
}

// ---- hyperstress ------------------------------------------------------------

namespace {

double tensor_norm(const Tensor3& g) {
    double s = 0.0;
    for (double x : g) s += x * x;
    return std::sqrt(s);
}

}  // namespace

double H_hyper(const HyperParams& p, const Tensor3& g, double eps) {
    if (!(eps > 0.0)) throw DomainError("H_hyper: eps must be positive");
    return std::pow(eps, p.alpha_H) * (p.c_H / p.q_H) * std::pow(tensor_norm(g), p.q_H);
}

Tensor3 dH_hyper(const HyperParams& p, const Tensor3& g, double eps) {
    if (!(eps > 0.0)) throw DomainError("dH_hyper: eps must be positive");
    const double n = tensor_norm(g);
    Tensor3 out{};
    if (n == 0.0) return out;
    const double s = std::pow(eps, p.alpha_H) * p.c_H * std::pow(n, p.q_H - 2.0);
    for (int i = 0; i < 27; ++i) out[i] = s * g[i];
    return out;
}

// ---- electrostatic constitutive maps ----------------------------------------

Mat3 kappa_pullback(const Mat3& f, const Mat3& k) {
    const double d = det3(f);
    if (!(d > 0.0)) throw DomainError("kappa_pullback: det F <= 0");
    const Mat3 fi = inverse3(f);
    return d * (fi * k * transpose(fi));
}

Mat3 maxwell_stress(const Mat3& f, const Mat3& k, const Vec3& grad_phi) {
    if (!(det3(f) > 0.0)) throw DomainError("maxwell_stress: det F <= 0");
    const Vec3 e = transpose(inverse3(f)) * grad_phi;
    const Vec3 ke = k * e;
    return (outer(e, ke) - (0.5 * dot(ke, e)) * Mat3::identity()) * cofactor3(f);
}

}  // namespace thinvolt
