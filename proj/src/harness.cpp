#include "thinvolt/harness.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "thinvolt/optimize.hpp"

namespace thinvolt {

using nlohmann::json;

// ---- configuration ----------------------------------------------------------

namespace {

class ConfigReader {
public:
    explicit ConfigReader(const json& root) : root_(root) {}

    template <typename T>
    void get(const char* section, const char* key, T& out) {
        if (!root_.contains(section)) return;
        const json& s = root_.at(section);
        if (!s.is_object()) {
            fail(std::string(section) + ": expected an object");
            return;
        }
        if (!s.contains(key)) return;
        try {
            out = s.at(key).get<T>();
        } catch (const std::exception&) {
            fail(std::string(section) + "." + key + ": wrong type");
        }
    }

    void mat3(const char* section, const char* key, Mat3& out) {
        if (!root_.contains(section) || !root_.at(section).contains(key)) return;
        const json& m = root_.at(section).at(key);
        if (!m.is_array() || m.size() != 3) {
            fail(std::string(section) + "." + key + ": expected a 3x3 array");
            return;
        }
        for (int i = 0; i < 3; ++i) {
            if (!m[i].is_array() || m[i].size() != 3) {
                fail(std::string(section) + "." + key + ": expected a 3x3 array");
                return;
            }
            for (int j = 0; j < 3; ++j) {
                if (!m[i][j].is_number()) {
                    fail(std::string(section) + "." + key + ": non-numeric entry");
                    return;
                }
                out(i, j) = m[i][j].get<double>();
            }
        }
    }

    void mat2(const char* section, const char* key, Mat2& out) {
        if (!root_.contains(section) || !root_.at(section).contains(key)) return;
        const json& m = root_.at(section).at(key);
        if (!m.is_array() || m.size() != 2 || !m[0].is_array() || !m[1].is_array() || m[0].size() != 2 ||
            m[1].size() != 2) {
            fail(std::string(section) + "." + key + ": expected a 2x2 array");
            return;
        }
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                if (!m[i][j].is_number()) {
                    fail(std::string(section) + "." + key + ": non-numeric entry");
                    return;
                }
                out(i, j) = m[i][j].get<double>();
            }
    }

    void fail(const std::string& msg) { errors_.push_back(msg); }
    const std::vector<std::string>& errors() const { return errors_; }

private:
    const json& root_;
    std::vector<std::string> errors_;
};

const std::vector<std::string> kSections = {"grid",     "eps",    "elastic",  "hyper",  "prestrain", "permittivity",
                                            "charge",   "coupling", "solver", "output", "isometry"};

json mat_to_json(const Mat3& m) {
    return json::array({{m(0, 0), m(0, 1), m(0, 2)}, {m(1, 0), m(1, 1), m(1, 2)}, {m(2, 0), m(2, 1), m(2, 2)}});
}

json mat_to_json(const Mat2& m) { return json::array({{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}); }

}  // namespace

RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    RunConfig cfg;
    ConfigReader r(j);
    for (const auto& item : j.items())
        if (std::find(kSections.begin(), kSections.end(), item.key()) == kSections.end())
            r.fail("unknown top-level key '" + item.key() + "'");

    r.get("grid", "n1", cfg.n1);
    r.get("grid", "n2", cfg.n2);
    r.get("grid", "n3", cfg.n3);
    r.get("grid", "n1_2d", cfg.n1_2d);
    r.get("grid", "n2_2d", cfg.n2_2d);
    if (j.contains("eps")) {
        try {
            cfg.eps_list = j.at("eps").get<std::vector<double>>();
        } catch (const std::exception&) {
            r.fail("eps: expected an array of numbers");
        }
    }
    r.get("elastic", "mu", cfg.mat.elastic.mu);
    r.get("elastic", "lambda", cfg.mat.elastic.lambda);
    r.get("elastic", "q_W", cfg.mat.elastic.q_W);
    r.get("hyper", "q_H", cfg.mat.hyper.q_H);
    r.get("hyper", "alpha_H", cfg.mat.hyper.alpha_H);
    r.get("hyper", "c_H", cfg.mat.hyper.c_H);
    r.mat3("prestrain", "B0", cfg.mat.prestrain.B0);
    r.mat3("prestrain", "B1", cfg.mat.prestrain.B1);
    r.mat2("prestrain", "g_gradient", cfg.g_gradient);
    if (j.contains("permittivity") && j.at("permittivity").contains("isotropic")) {
        double k = 1.0;
        r.get("permittivity", "isotropic", k);
        cfg.mat.permittivity.k = k * Mat3::identity();
    }
    r.mat3("permittivity", "k", cfg.mat.permittivity.k);
    std::string mode = "cosine";
    r.get("charge", "mode", mode);
    if (mode == "cosine")
        cfg.mat.charge.mode = ChargeModel::Mode::cosine;
    else if (mode == "constant")
        cfg.mat.charge.mode = ChargeModel::Mode::constant;
    else
        r.fail("charge.mode: expected 'cosine' or 'constant'");
    r.get("charge", "amplitude", cfg.mat.charge.amplitude);
    r.get("coupling", "beta", cfg.mat.coupling.beta);
    r.get("coupling", "gamma", cfg.mat.coupling.gamma);
    r.get("solver", "poisson_tol", cfg.solver.poisson_tol);
    r.get("solver", "grad_tol", cfg.solver.grad_tol);
    r.get("solver", "max_iters", cfg.solver.max_iters);
    r.get("solver", "inner_iters", cfg.solver.inner_iters);
    r.get("solver", "probes", cfg.solver.probes);
    r.get("solver", "probe_radius", cfg.solver.probe_radius);
    r.get("solver", "check_rel_tol", cfg.solver.check_rel_tol);
    r.get("solver", "use_mollifier", cfg.solver.use_mollifier);
    r.get("solver", "mollifier_iters", cfg.solver.mollifier_iters);
    r.get("solver", "seed", cfg.seed);
    r.get("output", "dir", cfg.out_dir);
    r.get("output", "prefix", cfg.prefix);
    r.get("isometry", "theta0", cfg.theta0);
    r.get("isometry", "curvature", cfg.curvature);

    if (cfg.n1 < 3 || cfg.n2 < 3 || cfg.n3 < 3 || cfg.n1_2d < 3 || cfg.n2_2d < 3)
        r.fail("grid: every node count must be at least 3");
    if (cfg.eps_list.empty()) r.fail("eps: at least one value required");
    for (std::size_t i = 0; i < cfg.eps_list.size(); ++i) {
        if (!(cfg.eps_list[i] > 0.0)) r.fail("eps: values must be positive");
        if (i > 0 && !(cfg.eps_list[i] < cfg.eps_list[i - 1])) r.fail("eps: values must be strictly decreasing");
    }
    if (!(cfg.solver.poisson_tol > 0.0) || !(cfg.solver.grad_tol > 0.0)) r.fail("solver: tolerances must be positive");
    if (cfg.solver.max_iters < 1 || cfg.solver.inner_iters < 1) r.fail("solver: iteration counts must be positive");
    if (cfg.solver.probes < 0 || !(cfg.solver.probe_radius > 0.0)) r.fail("solver: invalid probe settings");
    if (!(cfg.solver.check_rel_tol > 0.0)) r.fail("solver: check_rel_tol must be positive");
    try {
        cfg.mat.validate();
    } catch (const std::exception& e) {
        r.fail(e.what());
    }
    if (norm(sym(cfg.g_gradient) - sym(block2(cfg.mat.prestrain.B0))) > 1e-10)
        r.fail("prestrain: sym(g_gradient) must equal the in-plane block of B0");

    if (!r.errors().empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& e : r.errors()) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

json config_to_json(const RunConfig& c) {
    const Material& m = c.mat;
    return json{
        {"grid", {{"n1", c.n1}, {"n2", c.n2}, {"n3", c.n3}, {"n1_2d", c.n1_2d}, {"n2_2d", c.n2_2d}}},
        {"eps", c.eps_list},
        {"elastic", {{"mu", m.elastic.mu}, {"lambda", m.elastic.lambda}, {"q_W", m.elastic.q_W}}},
        {"hyper", {{"q_H", m.hyper.q_H}, {"alpha_H", m.hyper.alpha_H}, {"c_H", m.hyper.c_H}}},
        {"prestrain",
         {{"B0", mat_to_json(m.prestrain.B0)}, {"B1", mat_to_json(m.prestrain.B1)}, {"g_gradient", mat_to_json(c.g_gradient)}}},
        {"permittivity", {{"k", mat_to_json(m.permittivity.k)}}},
        {"charge",
         {{"mode", m.charge.mode == ChargeModel::Mode::cosine ? "cosine" : "constant"}, {"amplitude", m.charge.amplitude}}},
        {"coupling", {{"beta", m.coupling.beta}, {"gamma", m.coupling.gamma}}},
        {"solver",
         {{"poisson_tol", c.solver.poisson_tol},
          {"grad_tol", c.solver.grad_tol},
          {"max_iters", c.solver.max_iters},
          {"inner_iters", c.solver.inner_iters},
          {"probes", c.solver.probes},
          {"probe_radius", c.solver.probe_radius},
          {"check_rel_tol", c.solver.check_rel_tol},
          {"use_mollifier", c.solver.use_mollifier},
          {"mollifier_iters", c.solver.mollifier_iters},
          {"seed", c.seed}}},
        {"output", {{"dir", c.out_dir}, {"prefix", c.prefix}}},
        {"isometry", {{"theta0", c.theta0}, {"curvature", c.curvature}}},
    };
}

// ---- 3D alternating solver --------------------------------------------------

namespace {

std::vector<double> flatten(const VectorField3& y) {
    std::vector<double> x(3 * y.v.size());
    for (std::size_t a = 0; a < y.v.size(); ++a)
        for (int k = 0; k < 3; ++k) x[3 * a + k] = y.v[a][k];
    return x;
}

VectorField3 unflatten(const Grid3& g, const std::vector<double>& x) {
    VectorField3 y(g);
    for (std::size_t a = 0; a < y.v.size(); ++a) y.v[a] = Vec3{x[3 * a], x[3 * a + 1], x[3 * a + 2]};
    return y;
}

double norm_of(const VectorField3& f) {
    double s = 0.0;
    for (const auto& v : f.v) s += dot(v, v);
    return std::sqrt(s);
}

}  // namespace

Solve3DResult solve3d_alternating(const Material& mat, double eps, const VectorField3& y_init,
                                  const Solve3DOptions& opt) {
    const Grid3& g = y_init.grid;
    if (!std::isfinite(M_eps(y_init, eps, mat)))
        throw DomainError("solve3d_alternating: infeasible initial deformation");
    Solve3DResult res;
    res.y = zero_mean_project(y_init);
    const std::vector<double> w = node_weights(g);
    ScalarField3 warm(g);
    auto phi_step = [&](int it) {
        const PoissonSystem3 sys = assemble_poisson3(res.y, eps, mat);
        res.phi = solve_potential3(sys, opt.poisson_tol, 0, &warm).phi;
        warm = res.phi;
        Solve3DHistoryEntry e{it, "phi", F_eps(res.y, res.phi, eps, mat), 0.0, 0.0, 0.0};
        e.grad_norm = norm_of(grad_y_F_eps(res.y, res.phi, eps, mat));
        e.pg0 = check_pg0(res.y, res.phi, eps, mat);
        if (opt.probes > 0) {
            const double m = M_eps(res.y, eps, mat);
            const VectorField3 yfix = res.y;
            SaddleFunctional f = [&](const std::vector<double>&, const std::vector<double>& phi) {
                ScalarField3 p(g);
                p.v = phi;
                return m - E_eps(yfix, p, eps, mat);
            };
            ProbeOptions po;
            po.n_probes = opt.probes;
            po.radius = opt.probe_radius;
            po.seed = opt.seed + static_cast<std::uint64_t>(it);
            po.phi_weights = &w;
            po.probe_y = false;
            e.phi_probe = saddle_probe(f, {}, res.phi.v, po).phi_side;
        }
        res.history.push_back(e);
        return e;
    };
    for (int it = 0; it < opt.max_iters; ++it) {
        const Solve3DHistoryEntry e = phi_step(it);
        if (e.grad_norm <= opt.grad_tol) {
            res.converged = true;
            return res;
        }
        const ScalarField3 phi = res.phi;
        Objective obj = [&](const std::vector<double>& x, std::vector<double>* grad) {
            const VectorField3 y = unflatten(g, x);
            const double f = F_eps(y, phi, eps, mat);
            if (grad && std::isfinite(f)) *grad = flatten(grad_y_F_eps(y, phi, eps, mat));
            return f;
        };
        LbfgsOptions lo;
        lo.max_iters = opt.inner_iters;
        lo.grad_tol = opt.grad_tol;
        auto recenter = [&](std::vector<double>& x) {
            VectorField3 y = unflatten(g, x);
            x = flatten(zero_mean_project(y));
        };
        const LbfgsResult lr = lbfgs_minimize(obj, flatten(res.y), lo, recenter);
        res.y = unflatten(g, lr.x);
        res.history.push_back({it, "y", lr.f, lr.grad_norm, 0.0, 0.0});
        if (lr.line_search_failed && lr.iterations == 0) {
            res.stalled = true;
            break;
        }
    }
    res.converged = phi_step(opt.max_iters).grad_norm <= opt.grad_tol;
    return res;
}

// ---- certification ----------------------------------------------------------

ConditionsReport check_conditions(const std::vector<SweepRow>& rows, const std::optional<Targets>& targets,
                                  double rel_tol) {
    std::vector<const SweepRow*> ok;
    for (const auto& r : rows)
        if (r.feasible) ok.push_back(&r);
    if (ok.size() < 3) throw InvariantError("check_conditions: need at least 3 feasible rows");
    ConditionsReport rep;
    const char* names[4] = {"I: M_eps >= M0", "II: E_eps(lifted) <= E0", "III: F_eps <= F0", "IV: E_eps >= E0"};
    rep.all_pass = true;
    for (int c = 0; c < 4; ++c) {
        ConditionMargin& m = rep.conditions[c];
        m.name = names[c];
        std::vector<double> v;
        double target = 0.0;
        for (const SweepRow* r : ok) {
            const double M0 = targets ? targets->M0 : r->M0;
            const double E0 = targets ? targets->E0 : r->E0;
            const double F0 = targets ? targets->F0 : r->F0;
            switch (c) {
                case 0: v.push_back(M0 - r->M_eps); target = M0; break;
                case 1: v.push_back(r->E_lift - E0); target = E0; break;
                case 2: v.push_back(r->F_eps - F0); target = F0; break;
                default: v.push_back(E0 - r->E_eps); target = E0; break;
            }
            m.trend.push_back(std::abs(v.back()));
        }
        const double slack = 1e-12 * (1.0 + std::abs(target));
        const double last = std::max(v.back(), 0.0);
        const double prev = std::max(v[v.size() - 2], 0.0);
        m.value = v.back();
        m.allowed = rel_tol * (1.0 + std::abs(target));
        m.shrinking = last <= prev + slack;
        m.pass = last <= m.allowed && (m.shrinking || last <= 0.1 * m.allowed);
        rep.all_pass = rep.all_pass && m.pass;
    }
    return rep;
}

ProbeResult saddle_probe(const SaddleFunctional& f, const std::vector<double>& y, const std::vector<double>& phi,
                         const ProbeOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ProbeResult out;
    const double f0 = f(y, phi);
    if (!std::isfinite(f0)) throw DomainError("saddle_probe: F is not finite at the probed point");
    auto random_direction = [&](std::size_t n, const std::vector<double>* w) {
        std::vector<double> d(n);
        for (double& x : d) x = uni(rng);
        double mean = 0.0, ws = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double wi = w ? (*w)[i] : 1.0;
            mean += wi * d[i];
            ws += wi;
        }
        mean /= ws;
        double mx = 0.0;
        for (double& x : d) {
            x -= mean;
            mx = std::max(mx, std::abs(x));
        }
        for (double& x : d) x /= mx;
        return d;
    };
    if (opt.probe_phi)
        for (int p = 0; p < opt.n_probes; ++p) {
            std::vector<double> q = random_direction(phi.size(), opt.phi_weights);
            for (std::size_t i = 0; i < q.size(); ++i) q[i] = phi[i] + opt.radius * q[i];
            out.phi_side = std::max(out.phi_side, f(y, q) - f0);
        }
    if (opt.probe_y)
        for (int p = 0; p < opt.n_probes; ++p) {
            std::vector<double> q = random_direction(y.size(), nullptr);
            for (std::size_t i = 0; i < q.size(); ++i) q[i] = y[i] + opt.radius * q[i];
            out.y_side = std::max(out.y_side, f0 - f(q, phi));
        }
    return out;
}

// ---- drivers ----------------------------------------------------------------

namespace {

json margin_json(const ConditionMargin& m) {
    return json{{"name", m.name}, {"value", m.value}, {"allowed", m.allowed}, {"trend", m.trend},
                {"shrinking", m.shrinking}, {"pass", m.pass}};
}

json row_json(const SweepRow& r) {
    return json{{"eps", r.eps},           {"Mel_scaled", r.Mel_scaled}, {"hyper", r.hyper},
                {"M_eps", r.M_eps},       {"E_eps", r.E_eps},           {"F_eps", r.F_eps},
                {"M0", r.M0},             {"E0", r.E0},                 {"F0", r.F0},
                {"d2_ratio", r.d2_ratio}, {"pW_norm", r.pW_norm},       {"min_det", r.min_det},
                {"pg0_res", r.pg0_res},   {"E_lift", r.E_lift},         {"F_lift", r.F_lift},
                {"phi_probe", r.phi_probe}, {"y_error", r.y_error},     {"grad_error", r.grad_error},
                {"d2", r.d2},             {"cg_iterations", r.cg_iterations}, {"feasible", r.feasible}};
}

std::string out_path(const std::string& dir, const std::string& prefix, const std::string& name) {
    return (std::filesystem::path(dir) / (prefix + name)).string();
}

}  // namespace

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << std::setprecision(17);
    out << "eps,Mel_scaled,hyper,M_eps,E_eps,F_eps,M0,E0,F0,d2_ratio,pW_norm,min_det,pg0_res\n";
    for (const auto& r : rows)
        out << r.eps << ',' << r.Mel_scaled << ',' << r.hyper << ',' << r.M_eps << ',' << r.E_eps << ',' << r.F_eps
            << ',' << r.M0 << ',' << r.E0 << ',' << r.F0 << ',' << r.d2_ratio << ',' << r.pW_norm << ','
            << r.min_det << ',' << r.pg0_res << '\n';
}

SweepOutcome run_sweep(const RunConfig& cfg) {
    SweepSetup setup;
    setup.grid = cfg.grid();
    setup.mat = cfg.mat;
    setup.inputs.yhat = cfg.isometry(cfg.n1);
    setup.inputs.prestrain = cfg.mat.prestrain;
    setup.inputs.g_gradient = cfg.g_gradient;
    setup.use_mollifier = cfg.solver.use_mollifier;
    setup.mollifier_iters = cfg.solver.mollifier_iters;
    setup.poisson_tol = cfg.solver.poisson_tol;
    const std::vector<double> w = node_weights(setup.grid);
    std::uint64_t row_seed = cfg.seed;
    RowHook hook = [&](SweepRow& row, const VectorField3& y, const ScalarField3& phi) {
        if (cfg.solver.probes <= 0) return;
        const double m = row.M_eps;
        SaddleFunctional f = [&](const std::vector<double>&, const std::vector<double>& p) {
            ScalarField3 q(y.grid);
            q.v = p;
            return m - E_eps(y, q, row.eps, cfg.mat);
        };
        ProbeOptions po;
        po.n_probes = cfg.solver.probes;
        po.radius = cfg.solver.probe_radius;
        po.seed = row_seed++;
        po.phi_weights = &w;
        po.probe_y = false;
        row.phi_probe = saddle_probe(f, {}, phi.v, po).phi_side;
    };
    SweepOutcome out;
    out.rows = recovery_sweep(setup, cfg.eps_list, hook);
    out.rows_certified = true;
    for (const auto& r : out.rows)
        out.rows_certified = out.rows_certified && r.feasible && std::isfinite(r.F_eps) &&
                             (cfg.solver.probes <= 0 || r.phi_probe <= 1e-8);
    json rows = json::array();
    for (const auto& r : out.rows) rows.push_back(row_json(r));
    out.summary = json{{"config", config_to_json(cfg)}, {"seed", cfg.seed}, {"rows", rows},
                       {"rows_certified", out.rows_certified},
                       {"scope", "conditions certified only for the configured isometry and its recovery sequence"}};
    if (out.rows.size() >= 3) {
        out.conditions = check_conditions(out.rows, std::nullopt, cfg.solver.check_rel_tol);
        json cj = json::array();
        for (const auto& m : out.conditions.conditions) cj.push_back(margin_json(m));
        out.summary["conditions"] = cj;
        out.summary["conditions_pass"] = out.conditions.all_pass;
    } else {
        out.conditions.all_pass = true;
        out.summary["conditions"] = "skipped: fewer than 3 rows";
    }
    return out;
}

Solve2DOutcome run_solve2d(const RunConfig& cfg) {
    const Grid2 g = cfg.grid2();
    const RelaxedQ2 rq(Q3_form(cfg.mat.elastic), cfg.mat.prestrain);
    SaddleOptions so;
    so.outer_iters = cfg.solver.max_iters;
    so.inner_iters = cfg.solver.inner_iters * 5;
    so.tol = cfg.solver.grad_tol;
    so.poisson_tol = std::min(cfg.solver.poisson_tol, 1e-12);
    Solve2DOutcome out;
    out.result = saddle_iterate_2d(cfg.isometry(g.n1), g, cfg.mat, rq, so);
    out.virial = check_virial(out.result.y, out.result.phi, cfg.mat);
    SaddleFunctional f = [&](const std::vector<double>& theta, const std::vector<double>& phi) {
        Potential2 p(g);
        p.v = phi;
        return F0(CylindricalIsometry(theta), p, cfg.mat, rq);
    };
    const std::vector<double> w = node_weights2(g);
    ProbeOptions po;
    po.n_probes = cfg.solver.probes;
    po.radius = cfg.solver.probe_radius;
    po.seed = cfg.seed;
    po.phi_weights = &w;
    out.probe = saddle_probe(f, out.result.y.theta(), out.result.phi.v, po);
    bool monotone = true;
    for (std::size_t i = 1; i < out.result.history.size(); ++i) {
        const auto& a = out.result.history[i - 1];
        const auto& b = out.result.history[i];
        const double slack = 1e-12 * (1.0 + std::abs(a.F0));
        if (b.phase == "phi" && b.F0 < a.F0 - slack) monotone = false;
        if (b.phase == "theta" && b.F0 > a.F0 + slack) monotone = false;
    }
    out.pass = out.probe.phi_side <= 1e-10 && out.probe.y_side <= 1e-8 && out.virial <= 1e-7 && monotone;
    json hist = json::array();
    for (const auto& h : out.result.history)
        hist.push_back({{"iteration", h.iteration}, {"phase", h.phase}, {"F0", h.F0}, {"grad_norm", h.grad_norm}});
    out.summary = json{{"config", config_to_json(cfg)},
                       {"seed", cfg.seed},
                       {"converged", out.result.converged},
                       {"line_search_failed", out.result.line_search_failed},
                       {"grad_norm", out.result.grad_norm},
                       {"M0", M0(out.result.y, rq)},
                       {"E0", E0(out.result.y, out.result.phi, cfg.mat)},
                       {"F0", F0(out.result.y, out.result.phi, cfg.mat, rq)},
                       {"virial_residual", out.virial},
                       {"phi_side_violation", out.probe.phi_side},
                       {"y_side_violation", out.probe.y_side},
                       {"history_monotone", monotone},
                       {"history", hist},
                       {"pass", out.pass}};
    return out;
}

Solve3DOutcome run_solve3d(const RunConfig& cfg, double eps) {
    const Grid3 g = cfg.grid();
    const RelaxedQ2 rq(Q3_form(cfg.mat.elastic), cfg.mat.prestrain);
    RecoveryInputs in;
    in.yhat = cfg.isometry(g.n1);
    in.prestrain = cfg.mat.prestrain;
    in.g_gradient = cfg.g_gradient;
    const VectorField3 y0 = lift_deformation(g, in, eps, optimal_corrector(g, in, rq));
    Solve3DOptions so;
    so.max_iters = cfg.solver.max_iters;
    so.inner_iters = cfg.solver.inner_iters;
    so.grad_tol = cfg.solver.grad_tol;
    so.poisson_tol = cfg.solver.poisson_tol;
    so.probes = cfg.solver.probes;
    so.probe_radius = cfg.solver.probe_radius;
    so.seed = cfg.seed;
    Solve3DOutcome out;
    out.result = solve3d_alternating(cfg.mat, eps, y0, so);
    bool ok = !out.result.stalled;
    json hist = json::array();
    double last_y_f = std::numeric_limits<double>::infinity();
    bool y_monotone = true;
    for (const auto& h : out.result.history) {
        hist.push_back({{"iteration", h.iteration}, {"phase", h.phase}, {"F", h.F}, {"grad_norm", h.grad_norm},
                        {"pg0", h.pg0}, {"phi_probe", h.phi_probe}});
        if (h.phase == "phi") ok = ok && h.pg0 <= 1e-8 && h.phi_probe <= 1e-8 && std::isfinite(h.F);
        if (h.phase == "y") {
            if (cfg.mat.charge.is_zero() && h.F > last_y_f + 1e-12 * (1.0 + std::abs(last_y_f))) y_monotone = false;
            last_y_f = h.F;
        }
    }
    out.pass = ok && y_monotone;
    out.summary = json{{"config", config_to_json(cfg)}, {"eps", eps},          {"seed", cfg.seed},
                       {"converged", out.result.converged}, {"stalled", out.result.stalled},
                       {"y_steps_monotone", y_monotone},    {"history", hist}, {"pass", out.pass}};
    return out;
}

json run_relax(const RunConfig& cfg, const std::string& out_dir) {
    const ElasticParams& p = cfg.mat.elastic;
    const RelaxedQ2 rq(Q3_form(p), cfg.mat.prestrain);
    const double lam2 = 2.0 * p.mu * p.lambda / (2.0 * p.mu + p.lambda);
    double worst = 0.0;
    {
        std::ofstream out(out_path(out_dir, cfg.prefix, "relax_q2.csv"));
        out << std::setprecision(17) << "p,q,Q2,closed_form\n";
        const int ij[4][2] = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                const int i = ij[a][0], j = ij[a][1], k = ij[b][0], l = ij[b][1];
                const double cf = p.mu * ((i == k && j == l) + (i == l && j == k)) + ((i == j && k == l) ? lam2 : 0.0);
                const double v = rq.q2().coeff(a, b);
                worst = std::max(worst, std::abs(v - cf));
                out << a << ',' << b << ',' << v << ',' << cf << '\n';
            }
    }
    {
        std::ofstream out(out_path(out_dir, cfg.prefix, "relax_qbar2.csv"));
        out << std::setprecision(17) << "G11,G12,G21,G22,Qbar2,s11,s12,s21,s22\n";
        const Mat2 samples[] = {Mat2{}, Mat2{1, 0, 0, 0}, Mat2{0, 0, 0, 1}, Mat2{0, 1, 1, 0}, Mat2{1, 0, 0, 1},
                                Mat2{1, 0.5, 0.5, -1}};
        for (const Mat2& gm : samples) {
            const Qbar2Value v = rq.Qbar2(gm);
            out << gm(0, 0) << ',' << gm(0, 1) << ',' << gm(1, 0) << ',' << gm(1, 1) << ',' << v.value << ','
                << v.s(0, 0) << ',' << v.s(0, 1) << ',' << v.s(1, 0) << ',' << v.s(1, 1) << '\n';
        }
    }
    {
        std::ofstream out(out_path(out_dir, cfg.prefix, "relax_keff.csv"));
        out << std::setprecision(17) << "theta,Keff11,Keff12,Keff22,Kv1,Kv2,kz\n";
        for (int s = 0; s <= 24; ++s) {
            const double th = M_PI * s / 24.0;
            const EffectivePermittivity e =
                effective_permittivity(cfg.mat.permittivity.k, CylindricalIsometry::frame_from_angle(th));
            out << th << ',' << e.keff(0, 0) << ',' << e.keff(0, 1) << ',' << e.keff(1, 1) << ',' << e.k.kv[0] << ','
                << e.k.kv[1] << ',' << e.k.kz << '\n';
        }
    }
    return json{{"config", config_to_json(cfg)},
                {"q2_closed_form_max_deviation", worst},
                {"q2_min_sym_eigenvalue", rq.q2().min_sym_eigenvalue()},
                {"q3_min_sym_eigenvalue", rq.q3().min_sym_eigenvalue()},
                {"pass", worst <= 1e-10}};
}

}  // namespace thinvolt
