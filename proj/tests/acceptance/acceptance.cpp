// One PASS/FAIL line per acceptance criterion; exit status 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "thinvolt/harness.hpp"

using namespace thinvolt;

#ifndef THINVOLT_CONFIG_DIR
#define THINVOLT_CONFIG_DIR "configs"
#endif

namespace {

int failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int id, bool pass, const std::string& what, const std::ostringstream& detail, const Timer& t) {
    if (!pass) ++failures;
    std::printf("%s criterion %2d: %s | %s | %.2fs\n", pass ? "PASS" : "FAIL", id, what.c_str(),
                detail.str().c_str(), t.seconds());
    std::fflush(stdout);
}

RunConfig config(const std::string& name) {
    RunConfig c = load_config(std::string(THINVOLT_CONFIG_DIR) + "/" + name);
    c.out_dir = "acceptance_out";
    std::filesystem::create_directories(c.out_dir);
    return c;
}

VectorField3 random_feasible(const Grid3& g, double eps, oracle::Rng& rng) {
    VectorField3 y = flat_reference(g, eps);
    const double a = rng.uniform(0.02, 0.08), b = rng.uniform(1, 3), c = rng.uniform(1, 3);
    const Mat3 r = rng.rotation();
    for (std::size_t n = 0; n < g.nodes(); ++n) {
        const Vec3 x = g.node_position(n);
        Vec3 v = y.v[n];
        v[0] += a * std::sin(b * x[1]) * std::cos(c * x[0]);
        v[1] += a * x[0] * x[1];
        v[2] += a * eps * (std::sin(c * x[0]) + b * x[2] * x[1]);
        y.v[n] = r * v;
    }
    return y;
}

double l2_error_3d(int cells) {
    const Grid3 g(cells + 1, cells + 1, cells + 1);
    Material m;
    m.permittivity.k = Mat3::identity();
    const PoissonSystem3 sys = assemble_poisson3(flat_reference(g, 1.0), 1.0, m);
    const ScalarField3 phi = solve_potential3(sys, 1e-12).phi;
    const std::vector<double> w = node_weights(g);
    const double c = m.coupling.gamma / (m.coupling.beta * M_PI * M_PI);
    double e = 0.0;
    for (std::size_t a = 0; a < g.nodes(); ++a) {
        const double d = phi.v[a] - c * std::cos(M_PI * g.node_position(a)[0]);
        e += w[a] * d * d;
    }
    return std::sqrt(e);
}

double l2_error_2d(int cells, double& virial) {
    Material m;  // k = diag(1,1,4) seen by a vertical strip: K^eff = diag(4, 1)
    const CylindricalIsometry y = CylindricalIsometry::constant_curvature(cells + 1, M_PI / 2, 0.0);
    const Grid2 g(cells + 1, cells + 1);
    const Potential2 phi = solve_potential2(y, g, m, 1e-12).phi;
    virial = check_virial(y, phi, m);
    const double c = m.coupling.gamma / (4.0 * m.coupling.beta * M_PI * M_PI);
    const std::vector<double> w = node_weights2(g);
    double e = 0.0;
    for (std::size_t a = 0; a < g.nodes(); ++a) {
        const double d = phi.v[a] - c * std::cos(M_PI * g.x1(g.node_index(a)[0]));
        e += w[a] * d * d;
    }
    return std::sqrt(e);
}

void criterion1() {
    Timer t;
    oracle::Rng rng(101);
    double worst_k = 0.0, worst_m = 0.0;
    for (int s = 0; s < 100; ++s) {
        const double ks = rng.uniform(0.1, 10.0);
        const EffectivePermittivity e = effective_permittivity(ks * Mat3::identity(), rng.rotation());
        worst_k = std::max(worst_k, norm(e.keff - ks * Mat2::identity()));
        worst_m = std::max(worst_m, std::abs(m_out_of_plane(e.k, rng.vec2(5.0))));
    }
    std::ostringstream d;
    d << "max|Keff - k I| = " << worst_k << ", max|m| = " << worst_m;
    report(1, worst_k <= 1e-12 && worst_m <= 1e-12 && t.seconds() < 1.0, "isotropic decoupling", d, t);
}

void criterion2() {
    Timer t;
    oracle::Rng rng(102);
    const ElasticParams p{1.3, 0.8, 26.0};
    const RelaxedQ2 rq(Q3_form(p), PrestrainModel{});
    double worst = 0.0, worst_bar = 0.0;
    for (int s = 0; s < 100; ++s) {
        const Mat2 x = rng.mat2(2.0);
        worst = std::max(worst, std::abs(rq.Q2(0.0, x) - oracle::isotropic_Q2(p.mu, p.lambda, x)));
        worst_bar = std::max(worst_bar, std::abs(rq.Qbar2(x).value - rq.Q2(0.0, x) / 12.0));
    }
    std::ostringstream d;
    d << "max|Q2 - closed form| = " << worst << ", max|Qbar2 - Q2/12| = " << worst_bar;
    report(2, worst <= 1e-10 && worst_bar <= 1e-10 && t.seconds() < 1.0, "closed-form relaxation", d, t);
}

void criterion3() {
    Timer t;
    const double e16 = l2_error_3d(16), e32 = l2_error_3d(32);
    double v32 = 0.0, v64 = 0.0;
    const double f32 = l2_error_2d(32, v32), f64 = l2_error_2d(64, v64);
    const double p3 = oracle::observed_order(e16, e32), p2 = oracle::observed_order(f32, f64);

    // residuals after solves on deformed and curved configurations
    double worst_pg0 = 0.0, worst_virial = std::max(v32, v64);
    oracle::Rng rng(103);
    const Material m;
    for (int s = 0; s < 3; ++s) {
        const double eps = 0.25;
        const Grid3 g(12, 12, 8);
        const VectorField3 y = random_feasible(g, eps, rng);
        const ScalarField3 phi = solve_potential3(assemble_poisson3(y, eps, m), 1e-10).phi;
        worst_pg0 = std::max(worst_pg0, check_pg0(y, phi, eps, m));
        const CylindricalIsometry c = CylindricalIsometry::constant_curvature(33, rng.uniform(), rng.uniform(-2, 2));
        const Grid2 g2(33, 33);
        worst_virial = std::max(worst_virial, check_virial(c, solve_potential2(c, g2, m, 1e-12).phi, m));
    }
    std::ostringstream d;
    d << "order3D = " << p3 << ", order2D = " << p2 << ", max pg0 = " << worst_pg0 << ", max virial = "
      << worst_virial;
    report(3, p3 >= 1.8 && p2 >= 1.8 && worst_pg0 <= 1e-8 && worst_virial <= 1e-8 && t.seconds() < 120,
           "Poisson solvers", d, t);
}

void criterion4() {
    Timer t;
    oracle::Rng rng(104);
    Material m;
    m.prestrain.B1 = Mat3::diag(Vec3{0.4, -0.1, 0.0});
    const Grid3 g(12, 12, 12);
    double worst = 0.0;
    for (int s = 0; s < 5; ++s) {
        const double eps = rng.uniform(0.1, 0.5);
        const VectorField3 y = random_feasible(g, eps, rng);
        const ScalarField3 phi = solve_potential3(assemble_poisson3(y, eps, m), 1e-12).phi;
        const double f = F_eps(y, phi, eps, m);
        const double r = std::abs(f - M_eps(y, eps, m) - 0.5 * m.coupling.gamma * charge_term3(phi, m)) /
                         (1.0 + std::abs(f));
        worst = std::max(worst, r);
    }
    std::ostringstream d;
    d << "max relative residual = " << worst;
    report(4, worst <= 1e-8 && t.seconds() < 60, "energy rewrite", d, t);
}

void criterion5() {
    Timer t;
    oracle::Rng rng(105);
    Material m;
    m.prestrain.B1 = Mat3{0.4, 0.1, 0, 0.1, -0.2, 0, 0, 0, 0.2};
    const Grid3 g(10, 10, 10);
    const double eps = 0.5;
    const VectorField3 y = random_feasible(g, eps, rng);
    const ScalarField3 phi = solve_potential3(assemble_poisson3(y, eps, m), 1e-10).phi;
    const VectorField3 gm = grad_M_eps(y, eps, m);
    const VectorField3 gf = grad_y_F_eps(y, phi, eps, m);
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        const std::size_t a = static_cast<std::size_t>(rng.integer(0, static_cast<int>(g.nodes()) - 1));
        for (int k = 0; k < 3; ++k) {
            const double h = 1e-6;
            VectorField3 p = y, q = y;
            p.v[a][k] += h;
            q.v[a][k] -= h;
            const double fm = (M_eps(p, eps, m) - M_eps(q, eps, m)) / (2 * h);
            const double ff = (F_eps(p, phi, eps, m) - F_eps(q, phi, eps, m)) / (2 * h);
            worst = std::max(worst, std::abs(fm - gm.v[a][k]) / std::max(std::abs(gm.v[a][k]), 1e-6));
            worst = std::max(worst, std::abs(ff - gf.v[a][k]) / std::max(std::abs(gf.v[a][k]), 1e-6));
        }
    }
    std::ostringstream d;
    d << "max relative FD mismatch = " << worst;
    report(5, worst <= 1e-5 && t.seconds() < 60, "gradient exactness", d, t);
}

void sweep_criteria() {
    Timer t;
    const RunConfig cfg = config("bending.json");
    const SweepOutcome o = run_sweep(cfg);
    const auto& rows = o.rows;
    const double shared = t.seconds();

    bool feasible = rows.size() == 4;
    for (const auto& r : rows) feasible = feasible && r.feasible;

    // 6: elastic energy ratio and hyperstress decay
    {
        std::ostringstream d;
        bool pass = feasible;
        std::vector<double> dev;
        for (const auto& r : rows) dev.push_back(std::abs(r.Mel_scaled / r.M0 - 1.0));
        for (std::size_t i = 1; i < dev.size(); ++i) pass = pass && dev[i] < dev[i - 1];
        pass = pass && !dev.empty() && dev.back() <= 0.1;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (const auto& r : rows) {
            const double x = std::log(r.eps), yv = std::log(r.hyper);
            sx += x;
            sy += yv;
            sxx += x * x;
            sxy += x * yv;
        }
        const double n = static_cast<double>(rows.size());
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        const double need = cfg.mat.hyper.alpha_H - 2.0 - 2.0 * cfg.mat.hyper.q_H - 0.5;
        pass = pass && slope >= need && shared < 300;
        d << "|Mel/M0 - 1| =";
        for (double v : dev) d << ' ' << v;
        d << ", hyper slope = " << slope << " (need >= " << need << ")";
        report(6, pass, "recovery convergence", d, t);
    }
    // 7: electrostatic limit
    {
        std::ostringstream d;
        bool pass = feasible;
        std::vector<double> dev;
        for (const auto& r : rows) dev.push_back(std::abs(r.E_eps - r.E0));
        for (std::size_t i = 1; i < dev.size(); ++i) pass = pass && dev[i] < dev[i - 1];
        const double rel = dev.empty() ? 1.0 : dev.back() / std::abs(rows.back().E0);
        pass = pass && rel <= 0.1 && shared < 600;
        d << "|E - E0| =";
        for (double v : dev) d << ' ' << v;
        d << ", last/|E0| = " << rel;
        report(7, pass, "electrostatic limit", d, t);
    }
    // 8: a priori scaling
    {
        std::ostringstream d;
        bool pass = feasible && rows.size() == 4;
        double min_det = std::numeric_limits<double>::infinity(), pmin = min_det, pmax = 0.0;
        for (const auto& r : rows) {
            min_det = std::min(min_det, r.min_det);
            pmin = std::min(pmin, r.pW_norm);
            pmax = std::max(pmax, r.pW_norm);
        }
        const double a = rows.size() == 4 ? rows[2].d2_ratio : 0.0, b = rows.size() == 4 ? rows[3].d2_ratio : 0.0;
        const double var = std::max(a, b) / std::min(a, b);
        pass = pass && var < 2.0 && min_det > 0.0 && pmax / pmin <= 3.0;
        d << "d2/eps^2 ratio = " << var << ", min det = " << min_det << ", pW max/min = " << pmax / pmin;
        report(8, pass, "a priori scaling", d, t);
    }
}

void criterion9() {
    Timer t;
    const RunConfig cfg = config("coupled.json");
    const Solve2DOutcome s2 = run_solve2d(cfg);
    const Solve3DOutcome s3 = run_solve3d(cfg, cfg.eps_list.front());
    double worst3 = -std::numeric_limits<double>::infinity();
    int steps = 0;
    for (const auto& h : s3.result.history)
        if (h.phase == "phi") {
            worst3 = std::max(worst3, h.phi_probe);
            ++steps;
        }
    std::ostringstream d;
    d << "2D phi-side = " << s2.probe.phi_side << ", 2D y-side = " << s2.probe.y_side << ", 3D phi-side max = "
      << worst3 << " over " << steps << " phi-steps";
    const bool pass = cfg.solver.probes >= 50 && s2.probe.phi_side <= 1e-10 && s2.probe.y_side <= 1e-8 &&
                      cfg.solver.probe_radius == 1e-3 && steps > 0 && worst3 <= 1e-8 && t.seconds() < 120;
    report(9, pass, "saddle certification", d, t);
}

void criterion10() {
    Timer t;
    const Grid3 g(9, 9, 9);
    VectorField3 d0(g);
    for (std::size_t a = 0; a < g.nodes(); ++a) {
        const Vec3 x = g.node_position(a);
        d0.v[a] = Vec3{std::sin(M_PI * x[0]) * std::cos(x[1]), x[0] * x[2], std::cos(2 * x[2]) + x[1] * x[1]};
    }
    const double q = 4.0, tau = 2.0;
    std::vector<double> dist;
    bool below = true;
    for (double eps : {0.25, 0.125, 0.0625}) {
        const MollifyResult r = mollify_field(d0, eps, tau, q, 300);
        dist.push_back(r.l2_distance);
        below = below && mollifier_energy(r.d, d0, eps, tau, q) <= mollifier_energy(d0, d0, eps, tau, q);
    }
    std::ostringstream d;
    d << "||d_eps - d|| =";
    for (double v : dist) d << ' ' << v;
    d << ", I(d_eps) <= I(d): " << (below ? "yes" : "no");
    report(10, below && dist[1] < dist[0] && dist[2] < dist[1] && t.seconds() < 60, "mollifier", d, t);
}

void criterion11() {
    Timer t;
    const RunConfig cfg = config("coupled.json");
    SweepRow r;
    std::vector<SweepRow> rows(3, r);
    rows[0].eps = 0.25;
    rows[1].eps = 0.125;
    rows[2].eps = 0.0625;
    for (auto& x : rows) x.M0 = x.M_eps = 0.5;
    const ConditionsReport good = check_conditions(rows, std::nullopt, 0.1);
    const ConditionsReport bad = check_conditions(rows, Targets{1.5, 0.0, 0.0}, 0.1);

    // non-optimal potential on the 2D problem
    const Grid2 g = cfg.grid2();
    const RelaxedQ2 rq(Q3_form(cfg.mat.elastic), cfg.mat.prestrain);
    const CylindricalIsometry y = cfg.isometry(g.n1);
    oracle::Rng rng(111);
    Potential2 wrong(g);
    for (double& v : wrong.v) v = rng.uniform();
    SaddleFunctional f = [&](const std::vector<double>& theta, const std::vector<double>& phi) {
        Potential2 p(g);
        p.v = phi;
        return F0(CylindricalIsometry(theta), p, cfg.mat, rq);
    };
    const std::vector<double> w = node_weights2(g);
    ProbeOptions po;
    po.n_probes = 50;
    po.radius = 1e-3;
    po.phi_weights = &w;
    po.probe_y = false;
    const ProbeResult pr = saddle_probe(f, y.theta(), wrong.v, po);
    std::ostringstream d;
    d << "control passes: " << (good.all_pass ? "yes" : "no") << ", M0+1 condition I: "
      << (bad.conditions[0].pass ? "pass" : "fail") << ", phi-side violation = " << pr.phi_side;
    report(11, good.all_pass && !bad.conditions[0].pass && pr.phi_side > 0.0 && t.seconds() < 10,
           "negative controls", d, t);
}

}  // namespace

int main() {
    try {
        criterion1();
        criterion2();
        criterion3();
        criterion4();
        criterion5();
        sweep_criteria();
        criterion9();
        criterion10();
        criterion11();
    } catch (const std::exception& e) {
        std::printf("FAIL acceptance aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
