#include "thinvolt/optimize.hpp"

#include <cmath>
#include <deque>

#include "thinvolt/errors.hpp"

namespace thinvolt {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, std::vector<double> x0, const LbfgsOptions& opt,
                           const std::function<void(std::vector<double>&)>& recenter) {
    const std::size_t n = x0.size();
    LbfgsResult out;
    out.x = std::move(x0);
    std::vector<double> g(n);
    out.f = f(out.x, &g);
    if (!std::isfinite(out.f)) throw DomainError("lbfgs_minimize: infeasible starting point");
    out.history.push_back(out.f);
    out.grad_norm = std::sqrt(dot(g, g));

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;
    std::vector<double> d(n), x_new(n), g_new(n);
    for (int it = 0; it < opt.max_iters; ++it) {
        if (out.grad_norm <= opt.grad_tol) {
            out.converged = true;
            return out;
        }
        // two-loop recursion
        d = g;
        std::vector<double> alpha(s_hist.size());
        for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
            alpha[k] = rho_hist[k] * dot(s_hist[k], d);
            for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * y_hist[k][i];
        }
        double gamma = 1.0;
        if (!s_hist.empty()) gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
        for (double& v : d) v *= gamma;
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double beta = rho_hist[k] * dot(y_hist[k], d);
            for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - beta) * s_hist[k][i];
        }
        for (double& v : d) v = -v;
        double slope = dot(g, d);
        if (!(slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            slope = -dot(g, g);
        }
        double step = 1.0;
        if (s_hist.empty()) step = std::min(1.0, 1.0 / std::max(out.grad_norm, 1e-300));

        bool accepted = false;
        double f_new = 0.0;
        for (int bt = 0; bt < opt.max_backtracks; ++bt) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = out.x[i] + step * d[i];
            f_new = f(x_new, &g_new);
            if (std::isfinite(f_new) && f_new <= out.f + opt.armijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            out.line_search_failed = true;
            return out;
        }
        std::vector<double> s(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - out.x[i];
            y[i] = g_new[i] - g[i];
        }
        const double sy = dot(s, y);
        if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opt.memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        out.x = x_new;
        if (recenter) recenter(out.x);
        g = g_new;
        out.f = f_new;
        out.grad_norm = std::sqrt(dot(g, g));
        out.iterations = it + 1;
        out.history.push_back(out.f);
    }
    out.converged = out.grad_norm <= opt.grad_tol;
    return out;
}

}  // namespace thinvolt
