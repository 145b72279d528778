#include "thinvolt/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace thinvolt {

StencilMatrix::StencilMatrix(int n1, int n2, int n3) : n1_(n1), n2_(n2), n3_(n3) {
    slots_ = (n3 == 1) ? 9 : 27;
    rows_ = static_cast<std::size_t>(n1) * n2 * n3;
    nbr_.assign(rows_ * slots_, -1);
    val_.assign(rows_ * slots_, 0.0);
    const int r3 = (n3 == 1) ? 0 : 1;
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j)
            for (int k = 0; k < n3; ++k) {
                const std::size_t row = (static_cast<std::size_t>(i) * n2 + j) * n3 + k;
                int s = 0;
                for (int di = -1; di <= 1; ++di)
                    for (int dj = -1; dj <= 1; ++dj)
                        for (int dk = -r3; dk <= r3; ++dk, ++s) {
                            const int a = i + di, b = j + dj, c = k + dk;
                            if (a < 0 || b < 0 || c < 0 || a >= n1 || b >= n2 || c >= n3) continue;
                            nbr_[row * slots_ + s] = static_cast<long long>((static_cast<std::size_t>(a) * n2 + b) * n3 + c);
                        }
            }
}

int StencilMatrix::slot_of(std::size_t row, std::size_t col) const {
    const long long n23 = static_cast<long long>(n2_) * n3_;
    const long long r = static_cast<long long>(row), c = static_cast<long long>(col);
    const long long di = c / n23 - r / n23;
    const long long dj = (c / n3_) % n2_ - (r / n3_) % n2_;
    const long long dk = c % n3_ - r % n3_;
    if (std::abs(di) > 1 || std::abs(dj) > 1 || std::abs(dk) > 1) return -1;
    if (slots_ == 9) return static_cast<int>((di + 1) * 3 + (dj + 1));
    return static_cast<int>(((di + 1) * 3 + (dj + 1)) * 3 + (dk + 1));
}

void StencilMatrix::add(std::size_t row, std::size_t col, double v) {
    const int s = slot_of(row, col);
    if (s < 0) throw std::logic_error("StencilMatrix::add: entry outside the stencil");
    val_[row * slots_ + s] += v;
}

double StencilMatrix::at(std::size_t row, std::size_t col) const {
    const int s = slot_of(row, col);
    return s < 0 ? 0.0 : val_[row * slots_ + s];
}

void StencilMatrix::apply(const std::vector<double>& x, std::vector<double>& y) const {
    y.assign(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
        const long long* nb = &nbr_[r * slots_];
        const double* v = &val_[r * slots_];
        double s = 0.0;
        for (int k = 0; k < slots_; ++k)
            if (nb[k] >= 0) s += v[k] * x[static_cast<std::size_t>(nb[k])];
        y[r] = s;
    }
}

std::vector<double> StencilMatrix::diagonal() const {
    std::vector<double> d(rows_);
    const int centre = slots_ / 2;
    for (std::size_t r = 0; r < rows_; ++r) d[r] = val_[r * slots_ + centre];
    return d;
}

double StencilMatrix::asymmetry() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < rows_; ++r)
        for (int k = 0; k < slots_; ++k) {
            const long long c = nbr_[r * slots_ + k];
            if (c < 0) continue;
            worst = std::max(worst, std::abs(val_[r * slots_ + k] - at(static_cast<std::size_t>(c), r)));
        }
    return worst;
}

double StencilMatrix::max_row_sum() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (int k = 0; k < slots_; ++k) s += val_[r * slots_ + k];
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void remove_mean(std::vector<double>& r) {
    double s = 0.0;
    for (double x : r) s += x;
    s /= static_cast<double>(r.size());
    for (double& x : r) x -= s;
}

void gauge(std::vector<double>& x, const std::vector<double>& w) {
    double s = 0.0, ws = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s += w[i] * x[i];
        ws += w[i];
    }
    s /= ws;
    for (double& v : x) v -= s;
}

}  // namespace

PcgResult projected_pcg(const StencilMatrix& a, const std::vector<double>& b, const std::vector<double>& w,
                        double tol, int max_iters, const std::vector<double>* x0) {
    const std::size_t n = a.rows();
    PcgResult out;
    out.x = x0 ? *x0 : std::vector<double>(n, 0.0);
    std::vector<double> rhs = b;
    remove_mean(rhs);
    const double bnorm = std::sqrt(dot(rhs, rhs));
    if (bnorm == 0.0) {
        out.x.assign(n, 0.0);
        out.converged = true;
        return out;
    }
    std::vector<double> inv_diag = a.diagonal();
    for (double& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

    std::vector<double> r(n), z(n), p(n), ap(n);
    a.apply(out.x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ap[i];
    remove_mean(r);
    double rel = std::sqrt(dot(r, r)) / bnorm;
    out.residuals.push_back(rel);
    if (rel <= tol) {
        out.converged = true;
        gauge(out.x, w);
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 1; it <= max_iters; ++it) {
        a.apply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break;
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            out.x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        remove_mean(r);
        rel = std::sqrt(dot(r, r)) / bnorm;
        out.residuals.push_back(rel);
        out.iterations = it;
        if (rel <= tol) {
            out.converged = true;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    gauge(out.x, w);
    return out;
}

}  // namespace thinvolt
