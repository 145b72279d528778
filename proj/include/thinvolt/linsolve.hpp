#pragma once

#include <cstddef>
#include <vector>

namespace thinvolt {

// Sparse symmetric operator on a structured grid: every row owns a fixed number
// of slots (27 in 3D, 9 in 2D) addressing its neighbours.
class StencilMatrix {
public:
    StencilMatrix() = default;
    // 3D node layout (n1, n2, n3); pass n3 = 1 for a 2D grid.
    StencilMatrix(int n1, int n2, int n3);

    std::size_t rows() const { return rows_; }
    int slots() const { return slots_; }

    // Slot of column `col` in row `row`, or -1 if not adjacent.
    int slot_of(std::size_t row, std::size_t col) const;
    void add(std::size_t row, std::size_t col, double v);
    double at(std::size_t row, std::size_t col) const;

    void apply(const std::vector<double>& x, std::vector<double>& y) const;
    std::vector<double> diagonal() const;
    // max |A_ij - A_ji|
    double asymmetry() const;
    // max |sum_j A_ij|
    double max_row_sum() const;

    const std::vector<long long>& neighbours() const { return nbr_; }
    const std::vector<double>& values() const { return val_; }

private:
    int n1_ = 0, n2_ = 0, n3_ = 0;
    int slots_ = 0;
    std::size_t rows_ = 0;
    std::vector<long long> nbr_;  // rows * slots, -1 for missing neighbours
    std::vector<double> val_;
};

struct PcgResult {
    std::vector<double> x;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residuals;  // relative residual per iteration
};

// Jacobi-preconditioned CG for a singular system whose kernel is the constants.
// The residual is kept orthogonal to the constants, and the result is shifted
// so that sum_a w_a x_a = 0. Does not throw: callers inspect `converged`.
PcgResult projected_pcg(const StencilMatrix& a, const std::vector<double>& b, const std::vector<double>& w,
                        double tol, int max_iters, const std::vector<double>* x0 = nullptr);

}  // namespace thinvolt
