#pragma once

// Bilinear (Q1) finite elements on a uniform rectangular grid with 2x2 Gauss
// quadrature, for vector displacements (Mandel strains) or a scalar
// anti-plane displacement (gradient 2-vectors).

#include <array>
#include <functional>
#include <vector>

#include "microlax/linalg.hpp"
#include "microlax/tensor.hpp"

namespace microlax::fem {

enum class FieldKind { Vector, Scalar };

int dofs_per_node(FieldKind k);
int strain_size(FieldKind k);

struct QuadMesh {
  int nx = 4;
  int ny = 4;
  double hx = 1.0;
  double hy = 1.0;

  int cells() const { return nx * ny; }
  int nodes() const { return (nx + 1) * (ny + 1); }
  int node(int i, int j) const { return j * (nx + 1) + i; }
};

constexpr int kQuadPoints = 4;

struct Q1Element {
  int ndof = 8;
  std::array<Eigen::MatrixXd, kQuadPoints> b;  // strain = b[q] * element dofs
  double weight = 0.0;                         // hx hy / 4
  std::array<std::array<double, 2>, kQuadPoints> xi{};  // quadrature points in [0,1]^2
};

Q1Element make_element(const QuadMesh& m, FieldKind k);

/// Global dof indices of cell (ex, ey) in element order.
void element_dofs(const QuadMesh& m, FieldKind k, int ex, int ey, int* out);

/// Strain at every quadrature point, indexed cell * 4 + q.
void strains(const QuadMesh& m, FieldKind k, const Field& u, std::vector<Vec>& out);

/// Work-equivalent nodal load of a uniform stress: sum_q w B^T sigma.
Field uniform_stress_load(const QuadMesh& m, FieldKind k, const Vec& sigma);

struct PointState {
  double energy = 0.0;
  Vec stress;
  Mat tangent;
  int tag = 0;
  // caller data carried along
  double d_d = 0.0;
  double beta = 0.0;
  Vec strain;  // filled by evaluate_points
};

/// Energy density, stress and tangent at quadrature point (cell, q).
using PointMaterial = std::function<PointState(int cell, int q, const Vec& strain)>;

struct EquilibriumOptions {
  double tol = 1e-10;
  int max_outer = 50;
  CgOptions cg{1e-13, 0.0, 100000};
  Exec exec = Exec::Parallel;
};

struct EquilibriumResult {
  int outer = 0;
  int cg_iterations = 0;
  /// sqrt(r^T K^{-1} r) with the last tangent.
  double residual = 0.0;
  /// sum_q w W(q) - f_ext . u
  double energy = 0.0;
};

/// Newton-type iteration with the material tangent. u carries the Dirichlet
/// values on fixed dofs. Converged when the energy-norm residual is below
/// tol and quadrature tags did not change in the last update. Throws
/// NewtonDivergence after max_outer iterations.
EquilibriumResult solve_equilibrium(const QuadMesh& m, FieldKind k, const PointMaterial& mat, Field& u,
                                    const std::vector<char>& fixed, const Field& f_ext,
                                    const EquilibriumOptions& opt, std::vector<PointState>* states = nullptr);

/// Evaluates the material at the current u without solving.
void evaluate_points(const QuadMesh& m, FieldKind k, const PointMaterial& mat, const Field& u,
                     std::vector<PointState>& states, Exec exec);

/// Residual f_ext - f_int with fixed dofs zeroed.
Field residual(const QuadMesh& m, FieldKind k, const std::vector<PointState>& states, const Field& f_ext,
               const std::vector<char>& fixed);

}  // namespace microlax::fem
