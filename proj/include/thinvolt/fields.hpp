#pragma once

// Tensor-product grids on the unit slab (0,1)^2 x (-1/2, 1/2) and on the unit
// square, nodal fields, scaled differential operators and quadrature.
//
// Node order is x3 fastest, then x2, then x1. Cell c has corners
// a = (d1*2 + d2)*2 + d3, d_i in {0, 1}.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "thinvolt/smallmat.hpp"

namespace thinvolt {

// G[(i*3 + j)*3 + k] = alpha_ij d_i d_j y_k.
using Tensor3 = std::array<double, 27>;
constexpr int t3(int i, int j, int k) { return (i * 3 + j) * 3 + k; }

class Grid3 {
public:
    Grid3() : Grid3(3, 3, 3) {}
    Grid3(int n1, int n2, int n3);

    int n1, n2, n3;
    double h1, h2, h3;

    std::size_t nodes() const { return static_cast<std::size_t>(n1) * n2 * n3; }
    std::size_t cells() const { return static_cast<std::size_t>(n1 - 1) * (n2 - 1) * (n3 - 1); }
    std::size_t node(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n2 + j) * n3 + k;
    }
    std::size_t cell(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * (n2 - 1) + j) * (n3 - 1) + k;
    }
    std::array<int, 3> node_index(std::size_t a) const;
    std::array<int, 3> cell_index(std::size_t c) const;

    double x1(int i) const { return i * h1; }
    double x2(int j) const { return j * h2; }
    double x3(int k) const { return -0.5 + k * h3; }
    double spacing(int axis) const { return axis == 0 ? h1 : (axis == 1 ? h2 : h3); }
    int count(int axis) const { return axis == 0 ? n1 : (axis == 1 ? n2 : n3); }

    Vec3 node_position(std::size_t a) const;
    // Physical point of local coordinates xi in [0,1]^3 inside cell c.
    Vec3 point_in_cell(std::size_t c, const Vec3& xi) const;
    double cell_volume() const { return h1 * h2 * h3; }
    std::array<std::size_t, 8> cell_nodes(std::size_t c) const;

    bool operator==(const Grid3& o) const { return n1 == o.n1 && n2 == o.n2 && n3 == o.n3; }
};

class Grid2 {
public:
    Grid2() : Grid2(3, 3) {}
    Grid2(int n1, int n2);

    int n1, n2;
    double h1, h2;

    std::size_t nodes() const { return static_cast<std::size_t>(n1) * n2; }
    std::size_t cells() const { return static_cast<std::size_t>(n1 - 1) * (n2 - 1); }
    std::size_t node(int i, int j) const { return static_cast<std::size_t>(i) * n2 + j; }
    std::size_t cell(int i, int j) const { return static_cast<std::size_t>(i) * (n2 - 1) + j; }
    std::array<int, 2> node_index(std::size_t a) const { return {static_cast<int>(a / n2), static_cast<int>(a % n2)}; }
    std::array<int, 2> cell_index(std::size_t c) const {
        return {static_cast<int>(c / (n2 - 1)), static_cast<int>(c % (n2 - 1))};
    }
    double x1(int i) const { return i * h1; }
    double x2(int j) const { return j * h2; }
    Vec2 point_in_cell(std::size_t c, const Vec2& xi) const;
    double cell_area() const { return h1 * h2; }
    std::array<std::size_t, 4> cell_nodes(std::size_t c) const;

    bool operator==(const Grid2& o) const { return n1 == o.n1 && n2 == o.n2; }
};

struct ScalarField3 {
    Grid3 grid;
    std::vector<double> v;

    ScalarField3() = default;
    explicit ScalarField3(const Grid3& g, double value = 0.0) : grid(g), v(g.nodes(), value) {}
    void validate() const;
};

struct VectorField3 {
    Grid3 grid;
    std::vector<Vec3> v;

    VectorField3() = default;
    explicit VectorField3(const Grid3& g) : grid(g), v(g.nodes()) {}
    void validate() const;
};

struct ScalarField2 {
    Grid2 grid;
    std::vector<double> v;

    ScalarField2() = default;
    explicit ScalarField2(const Grid2& g, double value = 0.0) : grid(g), v(g.nodes(), value) {}
    void validate() const;
};

using CellTensorField = std::vector<Mat3>;
using CellHessianField = std::vector<Tensor3>;

// ---- shape functions --------------------------------------------------------

std::array<double, 8> shape_values(const Vec3& xi);
// dN_a/dx at local point xi; the x3 entry is divided by eps.
std::array<Vec3, 8> shape_gradients(const Grid3& g, const Vec3& xi, double eps);
std::array<double, 4> shape_values2(const Vec2& xi);
std::array<Vec2, 4> shape_gradients2(const Grid2& g, const Vec2& xi);

// Two-point Gauss rule on [0,1] (weights 1/2 each).
inline constexpr std::array<double, 2> kGauss2 = {0.21132486540518713, 0.78867513459481287};

// ---- scaled first derivatives ----------------------------------------------

Mat3 cell_gradient(const VectorField3& y, std::size_t c, const std::array<Vec3, 8>& dn);
Vec3 cell_scalar_gradient(const ScalarField3& phi, std::size_t c, const std::array<Vec3, 8>& dn);

// Per-cell nabla_eps y at cell centers.
CellTensorField scaled_gradient(const VectorField3& y, double eps);

// out_a += sum over cells of P_c dN_a: the adjoint of scaled_gradient.
void scatter_gradient_adjoint(const Grid3& g, const CellTensorField& p, double eps, std::vector<Vec3>& out);

// ---- scaled second derivatives ---------------------------------------------

struct StencilEntry {
    std::size_t node;
    double w;
};

struct HessianStencil {
    std::array<StencilEntry, 24> e;
    int n = 0;
};

// Unscaled d_a d_b at cell c: pure directions use clamped nodal 3-point
// differences averaged over the corners, mixed ones the cell cross difference.
HessianStencil hessian_stencil(const Grid3& g, std::size_t c, int a, int b);
double hessian_factor(int a, int b, double eps);

CellHessianField scaled_hessian(const VectorField3& y, double eps);
void scatter_hessian_adjoint(const Grid3& g, const CellHessianField& p, double eps, std::vector<Vec3>& out);

// ---- quadrature and gauges --------------------------------------------------

double integrate3(const Grid3& g, const std::vector<double>& cellwise);
double integrate2(const Grid2& g, const std::vector<double>& cellwise);

// Integrals of the nodal basis functions (products of trapezoid weights).
std::vector<double> node_weights(const Grid3& g);
std::vector<double> node_weights2(const Grid2& g);

double mean(const ScalarField3& f);
double mean(const ScalarField2& f);
Vec3 mean(const VectorField3& f);

ScalarField3 zero_mean_project(const ScalarField3& f);
ScalarField2 zero_mean_project(const ScalarField2& f);
VectorField3 zero_mean_project(const VectorField3& f);

// (x1 - 1/2, x2 - 1/2, eps x3): the gauged flat reference.
VectorField3 flat_reference(const Grid3& g, double eps);

double interpolate(const ScalarField3& f, std::size_t c, const Vec3& xi);
double interpolate(const ScalarField2& f, std::size_t c, const Vec2& xi);

// ---- dumps ------------------------------------------------------------------

void write_field_csv(const std::string& path, const ScalarField3& f);
void write_field_csv(const std::string& path, const VectorField3& f);
void write_field_csv(const std::string& path, const ScalarField2& f);

}  // namespace thinvolt
