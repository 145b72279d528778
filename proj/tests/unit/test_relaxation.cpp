#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "thinvolt/relaxation.hpp"

using namespace thinvolt;

namespace {

const ElasticParams kIso{1.3, 0.9, 26.0};

RelaxedQ2 relaxed(const PrestrainModel& b = {}) { return RelaxedQ2(Q3_form(kIso), b); }

Mat3 with_column(const Mat2& x, const Vec3& z) {
    Mat3 h = embed2(x);
    for (int i = 0; i < 3; ++i) h(i, 2) += z[i];
    return h;
}

double quad_value(const PartitionedSym3& k, const Vec2& g, double m) {
    const Vec3 v{g[0], g[1], m};
    return dot(k.assemble() * v, v);
}

}  // namespace

TEST_CASE("relax_over_z examples") {
    const QuadForm3 q = Q3_form(kIso);
    const ZRelaxation zero = relax_over_z(q, Mat2{});
    CHECK(norm(zero.z) == 0.0);
    CHECK(zero.value == 0.0);

    const double mu = kIso.mu, la = kIso.lambda;
    const ZRelaxation id = relax_over_z(q, Mat2::identity());
    CHECK(norm(id.z - Vec3{0, 0, -2 * la / (2 * mu + la)}) <= 1e-14);
    CHECK(id.value == doctest::Approx(4 * mu + 8 * mu * la / (2 * mu + la)).epsilon(1e-13));
    // grid search over z3 as an independent cross check
    const double z3 = oracle::golden_min(
        [&](double t) { return oracle::isotropic_Q3(mu, la, with_column(Mat2::identity(), Vec3{0, 0, t})); }, -3, 3);
    CHECK(z3 == doctest::Approx(id.z[2]).epsilon(1e-6));

    oracle::Rng rng(1);
    for (int s = 0; s < 10; ++s) {
        const Mat2 x = rng.mat2();
        const ZRelaxation r = relax_over_z(q, x);
        CHECK(r.value == doctest::Approx(q(with_column(x, r.z))).epsilon(1e-13));
        for (int k = 0; k < 100; ++k) CHECK(r.value <= q(with_column(x, rng.vec3(3.0))) + 1e-13);
    }
    CHECK_THROWS_WITH_AS(relax_over_z(QuadForm3{}, Mat2::identity()),
                         doctest::Contains("Q3 degenerate on coupling subspace"), DegeneracyError);
}

TEST_CASE("Q2 closed form") {
    const RelaxedQ2 rq = relaxed();
    oracle::Rng rng(2);
    for (int s = 0; s < 100; ++s) {
        const Mat2 x = rng.mat2(2.0);
        CHECK(std::abs(rq.Q2(0.1, x) - oracle::isotropic_Q2(kIso.mu, kIso.lambda, x)) <= 1e-10);
        CHECK(rq.Q2(0.0, x) <= rq.q3()(embed2(x)) + 1e-12);
        CHECK(rq.Q2(0.0, x) >= 0.0);
        const Mat2 w{0, 1, -1, 0};
        CHECK(std::abs(rq.Q2(0.2, rng.uniform() * w)) <= 1e-14);
    }
    CHECK(rq.q2().min_sym_eigenvalue() > 0.0);
    CHECK_THROWS_AS(rq.Q2(0.6, Mat2::identity()), DomainError);
    CHECK_NOTHROW(rq.Q2(-0.5, Mat2::identity()));
}

TEST_CASE("Qbar2 without prestrain") {
    const RelaxedQ2 rq = relaxed();
    oracle::Rng rng(3);
    for (int s = 0; s < 50; ++s) {
        const Mat2 g = rng.mat2();
        const Qbar2Value v = rq.Qbar2(g);
        CHECK(std::abs(v.value - rq.Q2(0.0, g) / 12.0) <= 1e-10);
        CHECK(norm(v.s) <= 1e-12);
    }
}

TEST_CASE("Qbar2 with linear prestrain") {
    PrestrainModel b;
    b.B1 = Mat3{0.4, 0.1, 0.2, 0.1, -0.3, 0.0, 0.2, 0.0, 0.5};
    const RelaxedQ2 rq = relaxed(b);
    oracle::Rng rng(4);
    // Qbar2(G) = Q2(G - B1_{2x2}) / 12, up to the G-independent part the 2x2 block misses
    const double base = rq.Qbar2(block2(b.B1)).value;
    for (int s = 0; s < 20; ++s) {
        const Mat2 g = rng.mat2();
        const Qbar2Value v = rq.Qbar2(g);
        CHECK(std::abs(v.value - base - rq.Q2(0.0, g - block2(b.B1)) / 12.0) <= 1e-10);
        CHECK(norm(v.s) <= 1e-12);
    }
}

TEST_CASE("Qbar2 with constant prestrain") {
    PrestrainModel b;
    b.B0 = Mat3{0.3, 0.2, 0.0, 0.2, -0.1, 0.1, 0.0, 0.1, 0.2};
    const RelaxedQ2 rq = relaxed(b);
    oracle::Rng rng(5);
    for (int s = 0; s < 10; ++s) {
        const Qbar2Value v = rq.Qbar2(rng.mat2());
        CHECK(norm(sym(v.s) - sym(block2(b.B0))) <= 1e-12);
    }
}

TEST_CASE("Qbar2 minimality, skew decoupling and quadraticity") {
    PrestrainModel b;
    b.B0 = Mat3{0.1, 0.0, 0.0, 0.0, 0.2, 0.0, 0.0, 0.0, 0.0};
    b.B1 = Mat3{0.5, 0.1, 0.0, 0.1, 0.0, 0.0, 0.0, 0.0, 0.3};
    const RelaxedQ2 rq = relaxed(b);
    oracle::Rng rng(6);
    const Mat2 g = rng.mat2();
    const Qbar2Value v = rq.Qbar2(g);
    CHECK(v.value == doctest::Approx(rq.thickness_integral(g, v.s)).epsilon(1e-13));
    for (int s = 0; s < 50; ++s) CHECK(v.value <= rq.thickness_integral(g, v.s + rng.mat2(0.5)) + 1e-13);
    const Mat2 w{0, 0.7, -0.7, 0};
    CHECK(rq.thickness_integral(g, v.s + w) == doctest::Approx(v.value).epsilon(1e-13));

    // finite-difference Hessian does not depend on G
    auto hessian = [&](const Mat2& at) {
        std::array<double, 16> h{};
        const double d = 1e-3;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                auto val = [&](double si, double sj) {
                    Mat2 x = at;
                    x.a[i] += si;
                    x.a[j] += sj;
                    return rq.Qbar2(x).value;
                };
                h[i * 4 + j] = (val(d, d) - val(d, -d) - val(-d, d) + val(-d, -d)) / (4 * d * d);
            }
        return h;
    };
    const auto h1 = hessian(Mat2{});
    const auto h2 = hessian(rng.mat2(3.0));
    for (int i = 0; i < 16; ++i) CHECK(std::abs(h1[i] - h2[i]) <= 1e-8);

    const Mat2 d = rq.dQbar2(g);
    for (int i = 0; i < 4; ++i) {
        Mat2 p = g, m = g;
        p.a[i] += 1e-6;
        m.a[i] -= 1e-6;
        CHECK((rq.Qbar2(p).value - rq.Qbar2(m).value) / 2e-6 == doctest::Approx(d.a[i]).epsilon(1e-7));
    }
}

TEST_CASE("thickness quadrature") {
    double w = 0.0, t2 = 0.0, t6 = 0.0;
    for (int i = 0; i < 4; ++i) {
        w += kThicknessWeights[i];
        t2 += kThicknessWeights[i] * kThicknessNodes[i] * kThicknessNodes[i];
        t6 += kThicknessWeights[i] * std::pow(kThicknessNodes[i], 6);
    }
    CHECK(w == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(t2 == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK(t6 == doctest::Approx(1.0 / 448.0).epsilon(1e-14));
}

TEST_CASE("effective permittivity examples") {
    oracle::Rng rng(7);
    for (int s = 0; s < 20; ++s) {
        const EffectivePermittivity e = effective_permittivity(2.5 * Mat3::identity(), rng.rotation());
        CHECK(norm(e.keff - 2.5 * Mat2::identity()) <= 1e-12);
    }
    const EffectivePermittivity d = effective_permittivity(Mat3::diag(Vec3{1, 2, 3}), Mat3::identity());
    CHECK(norm(d.keff - Mat2{1, 0, 0, 2}) <= 1e-15);

    const Mat3 k = Mat3::diag(Vec3{1, 1, 4});
    for (double theta : {0.0, 0.3, 1.0, 2.0}) {
        const Mat3 r = axis_angle(Vec3{0, 1, 0}, theta);
        const EffectivePermittivity e = effective_permittivity(k, r);
        CHECK(norm(e.k.assemble() - transpose(r) * k * r) <= 1e-14);
        for (int dir = 0; dir < 2; ++dir) {
            const Vec2 xi = dir == 0 ? Vec2{1, 0} : Vec2{0, 1};
            const double m = oracle::golden_min([&](double t) { return quad_value(e.k, xi, t); }, -10, 10);
            CHECK(dot(e.keff * xi, xi) == doctest::Approx(quad_value(e.k, xi, m)).epsilon(1e-10));
        }
        const double c = std::cos(theta), s = std::sin(theta);
        CHECK(e.keff(0, 0) == doctest::Approx(4.0 / (s * s + 4 * c * c)).epsilon(1e-13));
    }
    Mat3 bad = Mat3::identity();
    bad(0, 0) = 1.01;
    CHECK_THROWS_WITH_AS(effective_permittivity(k, bad), doctest::Contains("frame not orthonormal"), InvariantError);
}

TEST_CASE("out-of-plane minimizer") {
    oracle::Rng rng(8);
    for (int s = 0; s < 20; ++s) {
        const EffectivePermittivity e = effective_permittivity(3.0 * Mat3::identity(), rng.rotation());
        CHECK(std::abs(m_out_of_plane(e.k, rng.vec2())) <= 1e-12);
    }
    PartitionedSym3 k;
    k.kbar = Mat2::identity();
    k.kv = Vec2{1, 0};
    k.kz = 2.0;
    CHECK(m_out_of_plane(k, Vec2{4, 0}) == doctest::Approx(-2.0));

    const Mat3 kk = rng.spd3();
    const PartitionedSym3 p = PartitionedSym3::from_matrix(kk);
    const Vec2 g = rng.vec2();
    const double m = m_out_of_plane(p, g);
    for (int s = 0; s < 100; ++s) CHECK(quad_value(p, g, m) <= quad_value(p, g, rng.uniform(-5, 5)) + 1e-14);
    const double kmax = oracle::dense_sym_eigenvalues(oracle::to_dense(kk))[2];
    const double kmin = oracle::dense_sym_eigenvalues(oracle::to_dense(kk))[0];
    CHECK(std::abs(m) <= kmax / kmin * norm(g));
}

TEST_CASE("Schur energy identity and eigenvalue bounds") {
    oracle::Rng rng(9);
    for (int s = 0; s < 100; ++s) {
        const Mat3 kk = rng.spd3();
        const EffectivePermittivity e = effective_permittivity(kk, rng.rotation());
        const Vec2 g = rng.vec2();
        const double m = m_out_of_plane(e.k, g);
        CHECK(std::abs(dot(e.keff * g, g) - quad_value(e.k, g, m)) <= 1e-12 * (1.0 + dot(g, g)));
        const auto full = oracle::dense_sym_eigenvalues(oracle::to_dense(kk));
        const auto red = oracle::dense_sym_eigenvalues(oracle::to_dense(e.keff));
        CHECK(red[0] >= full[0] - 1e-12);
        CHECK(red[1] <= full[2] + 1e-12);
        // ellipticity of K_y
        const auto ky = oracle::dense_sym_eigenvalues(oracle::to_dense(e.k.assemble()));
        CHECK(ky[0] >= full[0] - 1e-12);
        CHECK(ky[2] <= full[2] + 1e-12);
    }
}
