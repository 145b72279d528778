#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "thinvolt/harness.hpp"

namespace thinvolt {

namespace {

struct CommonArgs {
    std::string config;
    std::string out;
    std::string eps;
    std::int64_t seed = -1;
};

void add_common(CLI::App* sub, CommonArgs& a) {
    sub->add_option("--config", a.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", a.out, "output directory (overrides output.dir)");
    sub->add_option("--eps", a.eps, "comma separated eps values (overrides eps)");
    sub->add_option("--seed", a.seed, "probe seed (overrides solver.seed)");
}

RunConfig resolve(const CommonArgs& a) {
    nlohmann::json j;
    {
        std::ifstream in(a.config);
        if (!in) throw ConfigError("cannot open config file '" + a.config + "'");
        try {
            in >> j;
        } catch (const std::exception& e) {
            throw ConfigError("config '" + a.config + "' is not valid JSON: " + e.what());
        }
    }
    if (!a.eps.empty()) {
        std::vector<double> list;
        std::stringstream ss(a.eps);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                std::size_t used = 0;
                list.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw ConfigError("--eps: cannot parse '" + item + "'");
            }
        }
        j["eps"] = list;
    }
    if (!a.out.empty()) j["output"]["dir"] = a.out;
    if (a.seed >= 0) j["solver"]["seed"] = static_cast<std::uint64_t>(a.seed);
    RunConfig cfg = parse_config(j);
    std::filesystem::create_directories(cfg.out_dir);
    return cfg;
}

std::string path_in(const RunConfig& cfg, const std::string& name) {
    return (std::filesystem::path(cfg.out_dir) / (cfg.prefix + name)).string();
}

void dump(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

void print_conditions(const ConditionsReport& rep) {
    for (const auto& m : rep.conditions)
        std::cout << (m.pass ? "PASS " : "FAIL ") << m.name << "  violation=" << m.value << " allowed=" << m.allowed
                  << (m.shrinking ? "" : " (not shrinking)") << '\n';
}

int do_sweep(const RunConfig& cfg, bool check_only) {
    const SweepOutcome o = run_sweep(cfg);
    write_sweep_csv(path_in(cfg, "sweep.csv"), o.rows);
    dump(path_in(cfg, "sweep.json"), o.summary);
    std::cout << std::setprecision(10);
    if (!check_only)
        for (const auto& r : o.rows)
            std::cout << "eps=" << r.eps << " M=" << r.M_eps << " E=" << r.E_eps << " F=" << r.F_eps
                      << " F0=" << r.F0 << (r.feasible ? "" : " infeasible") << '\n';
    if (o.rows.size() >= 3) print_conditions(o.conditions);
    std::cout << "certified rows: " << (o.rows_certified ? "yes" : "no") << '\n';
    return (o.rows_certified && o.conditions.all_pass) ? 0 : 1;
}

int do_solve2d(const RunConfig& cfg) {
    const Solve2DOutcome o = run_solve2d(cfg);
    {
        std::ofstream out(path_in(cfg, "solve2d_history.csv"));
        out << std::setprecision(17) << "iteration,phase,F0,grad_norm\n";
        for (const auto& h : o.result.history)
            out << h.iteration << ',' << h.phase << ',' << h.F0 << ',' << h.grad_norm << '\n';
    }
    {
        std::ofstream out(path_in(cfg, "solve2d_theta.csv"));
        out << std::setprecision(17) << "x1,theta\n";
        const auto& th = o.result.y.theta();
        for (std::size_t i = 0; i < th.size(); ++i) out << i * o.result.y.h() << ',' << th[i] << '\n';
    }
    write_field_csv(path_in(cfg, "solve2d_phi.csv"), o.result.phi);
    dump(path_in(cfg, "solve2d.json"), o.summary);
    std::cout << std::setprecision(10) << "F0=" << o.summary["F0"].get<double>()
              << " virial=" << o.virial << " phi_side=" << o.probe.phi_side << " y_side=" << o.probe.y_side
              << (o.pass ? "  PASS" : "  FAIL") << '\n';
    return o.pass ? 0 : 1;
}

int do_solve3d(const RunConfig& cfg) {
    bool all = true;
    for (double eps : cfg.eps_list) {
        std::ostringstream tag;
        tag << "solve3d_eps" << eps;
        const Solve3DOutcome o = run_solve3d(cfg, eps);
        {
            std::ofstream out(path_in(cfg, tag.str() + "_history.csv"));
            out << std::setprecision(17) << "iteration,phase,F,grad_norm,pg0,phi_probe\n";
            for (const auto& h : o.result.history)
                out << h.iteration << ',' << h.phase << ',' << h.F << ',' << h.grad_norm << ',' << h.pg0 << ','
                    << h.phi_probe << '\n';
        }
        write_field_csv(path_in(cfg, tag.str() + "_y.csv"), o.result.y);
        write_field_csv(path_in(cfg, tag.str() + "_phi.csv"), o.result.phi);
        dump(path_in(cfg, tag.str() + ".json"), o.summary);
        std::cout << "eps=" << eps << " F=" << o.result.history.back().F << (o.pass ? "  PASS" : "  FAIL") << '\n';
        all = all && o.pass;
    }
    return all ? 0 : 1;
}

int do_relax(const RunConfig& cfg) {
    const nlohmann::json j = run_relax(cfg, cfg.out_dir);
    dump(path_in(cfg, "relax.json"), j);
    std::cout << "Q2 closed-form deviation " << j["q2_closed_form_max_deviation"].get<double>()
              << (j["pass"].get<bool>() ? "  PASS" : "  FAIL") << '\n';
    return j["pass"].get<bool>() ? 0 : 1;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"thinvolt: thin electro-elastic plate solver"};
    app.require_subcommand(1);
    CommonArgs sweep_a, s3_a, s2_a, relax_a, check_a;
    auto* sweep = app.add_subcommand("sweep", "recovery sweep over eps; writes sweep.csv and sweep.json");
    add_common(sweep, sweep_a);
    auto* s3 = app.add_subcommand("solve3d", "alternating 3D saddle solve at each eps");
    add_common(s3, s3_a);
    auto* s2 = app.add_subcommand("solve2d", "2D limit saddle solve");
    add_common(s2, s2_a);
    auto* relax = app.add_subcommand("relax", "tabulate the relaxed forms");
    add_common(relax, relax_a);
    auto* check = app.add_subcommand("check", "run the sweep and report only the condition checks");
    add_common(check, check_a);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        if (*sweep) return do_sweep(resolve(sweep_a), false);
        if (*s3) return do_solve3d(resolve(s3_a));
        if (*s2) return do_solve2d(resolve(s2_a));
        if (*relax) return do_relax(resolve(relax_a));
        if (*check) return do_sweep(resolve(check_a), true);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace thinvolt
