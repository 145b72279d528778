#pragma once

#include <functional>
#include <vector>

namespace thinvolt {

// Returns f(x) and, when the value is finite and grad is non-null, fills grad.
// Infeasible points report +inf.
using Objective = std::function<double(const std::vector<double>& x, std::vector<double>* grad)>;

struct LbfgsOptions {
    int max_iters = 200;
    int memory = 8;
    double grad_tol = 1e-8;
    double armijo = 1e-4;
    int max_backtracks = 60;
};

struct LbfgsResult {
    std::vector<double> x;
    double f = 0.0;
    double grad_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    bool line_search_failed = false;
    std::vector<double> history;  // f after every accepted step, starting with f(x0)
};

// Limited-memory BFGS with Armijo backtracking; steps landing on +inf are
// shortened. `recenter` (optional) maps an accepted iterate to an equivalent one
// with the same objective value, e.g. a translation gauge.
LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double> x0, const LbfgsOptions& opt,
                           const std::function<void(std::vector<double>&)>& recenter = {});

}  // namespace thinvolt
