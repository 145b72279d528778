#pragma once

#include <cstdint>
#include <vector>

#include "thinvolt/fields.hpp"
#include "thinvolt/smallmat.hpp"

namespace thinvolt {

struct ElasticParams {
    double mu = 1.0;
    double lambda = 1.0;
    double q_W = 26.0;

    // Barrier weight chosen so that D^2 W(I) has Lame constants (mu, lambda).
    double gamma_d() const;
    void validate() const;
};

struct HyperParams {
    double q_H = 4.0;
    double alpha_H = 10.5;
    double c_H = 1.0;

    void validate() const;
};

// B(t) = B0 + t B1; M_eps = I + eps B.
struct PrestrainModel {
    Mat3 B0;
    Mat3 B1;

    Mat3 at(double t) const { return B0 + t * B1; }
    void validate() const;
};

struct PermittivityModel {
    Mat3 k = Mat3::diag(Vec3{1.0, 1.0, 4.0});

    double min_eigenvalue() const;
    double max_eigenvalue() const;
    void validate() const;
};

struct ChargeModel {
    enum class Mode { constant, cosine };
    Mode mode = Mode::cosine;
    double amplitude = 1.0;

    double operator()(double x1, double x2, double x3) const;
    // Thickness average; the modes do not depend on x3.
    double averaged(double x1, double x2) const { return (*this)(x1, x2, 0.0); }
    bool is_zero() const { return amplitude == 0.0; }
};

struct CouplingConstants {
    double beta = 1.0;
    double gamma = 1.0;

    void validate() const;
};

struct Material {
    ElasticParams elastic;
    HyperParams hyper;
    PrestrainModel prestrain;
    PermittivityModel permittivity;
    ChargeModel charge;
    CouplingConstants coupling;

    // Rejects parameters violating the growth and exponent inequalities.
    void validate() const;
};

// h(d) = d^{-q/2} - 1 + (q/2)(d - 1).
double barrier(double d, double q);
double barrier_d1(double d, double q);
double barrier_d2_at_one(double q);

// (mu/4)|F^T F - I|^2 + gamma_d h(det F); +inf when det F <= 0.
double W_el(const ElasticParams& p, const Mat3& f);
// Throws DomainError when det F <= 0.
Mat3 dW_el(const ElasticParams& p, const Mat3& f);

// 2 mu |H_sym|^2 + lambda (tr H)^2.
QuadForm3 Q3_form(const ElasticParams& p);

struct ExpansionSample {
    double norm;
    double deviation;
};

// sup |W(I+F) - Q3(F)/2| / |F|^2 over random F at each of |F| = 1e-2, 1e-3, 1e-4.
std::vector<ExpansionSample> quadratic_expansion_check(const ElasticParams& p, int n_samples,
                                                       std::uint64_t seed = 1);

// eps^{alpha_H} (c_H/q_H) |G|^{q_H}.
double H_hyper(const HyperParams& p, const Tensor3& g, double eps);
Tensor3 dH_hyper(const HyperParams& p, const Tensor3& g, double eps);

// det(F) F^{-1} k F^{-T}.
Mat3 kappa_pullback(const Mat3& f, const Mat3& k);

// (e (x) k e - (k e . e)/2 I) Cof F with e = F^{-T} grad phi. The F-derivative of
// (1/2) kappa(F) grad phi . grad phi is the negative of this.
Mat3 maxwell_stress(const Mat3& f, const Mat3& k, const Vec3& grad_phi);

}  // namespace thinvolt
