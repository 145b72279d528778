#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "thinvolt/bending2d.hpp"
#include "thinvolt/recovery.hpp"

namespace thinvolt {

struct SolverSettings {
    double poisson_tol = 1e-10;
    double grad_tol = 1e-8;
    int max_iters = 30;
    int inner_iters = 20;
    int probes = 50;
    double probe_radius = 1e-3;
    double check_rel_tol = 0.1;
    bool use_mollifier = false;
    int mollifier_iters = 200;
};

struct RunConfig {
    int n1 = 32, n2 = 32, n3 = 16;
    int n1_2d = 33, n2_2d = 33;
    std::vector<double> eps_list{0.25, 0.125, 0.0625, 0.03125};
    Material mat;
    Mat2 g_gradient;
    double theta0 = 0.0;
    double curvature = 1.0;
    SolverSettings solver;
    std::string out_dir = "out";
    std::string prefix;
    std::uint64_t seed = 1;

    Grid3 grid() const { return Grid3(n1, n2, n3); }
    Grid2 grid2() const { return Grid2(n1_2d, n2_2d); }
    CylindricalIsometry isometry(int nodes) const {
        return CylindricalIsometry::constant_curvature(nodes, theta0, curvature);
    }
};

// Applies defaults, validates every parameter inequality, and throws ConfigError
// listing all problems found.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);
nlohmann::json config_to_json(const RunConfig& cfg);

// ---- 3D alternating solver --------------------------------------------------

struct Solve3DOptions {
    int max_iters = 30;
    int inner_iters = 20;
    double grad_tol = 1e-8;
    double poisson_tol = 1e-10;
    int probes = 0;  // phi-side probes after each potential solve
    double probe_radius = 1e-3;
    std::uint64_t seed = 1;
};

struct Solve3DHistoryEntry {
    int iteration;
    std::string phase;  // "phi" or "y"
    double F;
    double grad_norm;
    double pg0;        // after phi-steps
    double phi_probe;  // after phi-steps
};

struct Solve3DResult {
    VectorField3 y;
    ScalarField3 phi;
    std::vector<Solve3DHistoryEntry> history;
    bool converged = false;
    bool stalled = false;
};

// Throws DomainError if y_init has infinite energy.
Solve3DResult solve3d_alternating(const Material& mat, double eps, const VectorField3& y_init,
                                  const Solve3DOptions& opt);

// ---- certification ----------------------------------------------------------

struct Targets {
    double M0, E0, F0;
};

struct ConditionMargin {
    std::string name;
    double value = 0.0;          // signed violation at the last row; > 0 is on the wrong side
    double allowed = 0.0;
    std::vector<double> trend;   // |violation| per row
    bool shrinking = false;
    bool pass = false;
};

struct ConditionsReport {
    std::array<ConditionMargin, 4> conditions;
    bool all_pass = false;
};

// Finite-eps surrogates of conditions (I)-(IV). Targets default to the rows' own.
ConditionsReport check_conditions(const std::vector<SweepRow>& rows, const std::optional<Targets>& targets,
                                  double rel_tol);

using SaddleFunctional = std::function<double(const std::vector<double>& y, const std::vector<double>& phi)>;

struct ProbeOptions {
    int n_probes = 50;
    double radius = 1e-3;
    std::uint64_t seed = 1;
    const std::vector<double>* phi_weights = nullptr;  // zero-mean gauge of phi probes
    bool probe_phi = true;
    bool probe_y = true;
};

struct ProbeResult {
    double phi_side = -std::numeric_limits<double>::infinity();  // max F(y*, phi) - F(y*, phi*)
    double y_side = -std::numeric_limits<double>::infinity();    // max F(y*, phi*) - F(y, phi*)
};

ProbeResult saddle_probe(const SaddleFunctional& f, const std::vector<double>& y, const std::vector<double>& phi,
                         const ProbeOptions& opt);

// ---- drivers ----------------------------------------------------------------

struct SweepOutcome {
    std::vector<SweepRow> rows;
    ConditionsReport conditions;
    bool rows_certified = false;
    nlohmann::json summary;
};
SweepOutcome run_sweep(const RunConfig& cfg);

struct Solve2DOutcome {
    SaddleResult2D result;
    ProbeResult probe;
    double virial = 0.0;
    nlohmann::json summary;
    bool pass = false;
};
Solve2DOutcome run_solve2d(const RunConfig& cfg);

struct Solve3DOutcome {
    Solve3DResult result;
    nlohmann::json summary;
    bool pass = false;
};
Solve3DOutcome run_solve3d(const RunConfig& cfg, double eps);

nlohmann::json run_relax(const RunConfig& cfg, const std::string& out_dir);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

// Exit codes: 0 all checks pass, 1 a numerical check failed, 2 bad configuration or usage.
int cli_main(int argc, char** argv);

}  // namespace thinvolt
