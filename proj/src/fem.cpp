#include "microlax/fem.hpp"

#include <cmath>

#include "microlax/kernels.hpp"

namespace microlax::fem {

int dofs_per_node(FieldKind k) { return k == FieldKind::Vector ? 2 : 1; }
int strain_size(FieldKind k) { return k == FieldKind::Vector ? 3 : 2; }

namespace {

// local node order: (0,0), (1,0), (1,1), (0,1)
constexpr int kCornerX[4] = {0, 1, 1, 0};
constexpr int kCornerY[4] = {0, 0, 1, 1};

}  // namespace

Q1Element make_element(const QuadMesh& m, FieldKind k) {
  Q1Element e;
  const int dpn = dofs_per_node(k);
  e.ndof = 4 * dpn;
  e.weight = 0.25 * m.hx * m.hy;
  const double g = 1.0 / std::sqrt(3.0);
  const double pts[2] = {-g, g};
  int q = 0;
  for (int qy = 0; qy < 2; ++qy) {
    for (int qx = 0; qx < 2; ++qx, ++q) {
      const double xi = pts[qx];
      const double eta = pts[qy];
      e.xi[q] = {0.5 * (1.0 + xi), 0.5 * (1.0 + eta)};
      Eigen::MatrixXd b = Eigen::MatrixXd::Zero(strain_size(k), e.ndof);
      for (int a = 0; a < 4; ++a) {
        const double sx = 2.0 * kCornerX[a] - 1.0;
        const double sy = 2.0 * kCornerY[a] - 1.0;
        const double dx = 0.25 * sx * (1.0 + sy * eta) * 2.0 / m.hx;
        const double dy = 0.25 * sy * (1.0 + sx * xi) * 2.0 / m.hy;
        if (k == FieldKind::Vector) {
          b(0, 2 * a) = dx;
          b(1, 2 * a + 1) = dy;
          b(2, 2 * a) = dy / kSqrt2;
          b(2, 2 * a + 1) = dx / kSqrt2;
        } else {
          b(0, a) = dx;
          b(1, a) = dy;
        }
      }
      e.b[q] = b;
    }
  }
  return e;
}

void element_dofs(const QuadMesh& m, FieldKind k, int ex, int ey, int* out) {
  const int dpn = dofs_per_node(k);
  for (int a = 0; a < 4; ++a) {
    const int n = m.node(ex + kCornerX[a], ey + kCornerY[a]);
    for (int c = 0; c < dpn; ++c) out[a * dpn + c] = n * dpn + c;
  }
}

void strains(const QuadMesh& m, FieldKind k, const Field& u, std::vector<Vec>& out) {
  const Q1Element el = make_element(m, k);
  out.resize(static_cast<std::size_t>(m.cells()) * kQuadPoints);
  const int cells = m.cells();
#pragma omp parallel for schedule(static)
  for (int c = 0; c < cells; ++c) {
    int dofs[8];
    element_dofs(m, k, c % m.nx, c / m.nx, dofs);
    Eigen::VectorXd ue(el.ndof);
    for (int i = 0; i < el.ndof; ++i) ue(i) = u[dofs[i]];
    for (int q = 0; q < kQuadPoints; ++q) out[c * kQuadPoints + q] = el.b[q] * ue;
  }
}

Field uniform_stress_load(const QuadMesh& m, FieldKind k, const Vec& sigma) {
  const Q1Element el = make_element(m, k);
  Field f(static_cast<std::size_t>(m.nodes()) * dofs_per_node(k), 0.0);
  Eigen::VectorXd fe = Eigen::VectorXd::Zero(el.ndof);
  for (int q = 0; q < kQuadPoints; ++q) fe += el.weight * el.b[q].transpose() * Eigen::VectorXd(sigma);
  for (int ey = 0; ey < m.ny; ++ey) {
    for (int ex = 0; ex < m.nx; ++ex) {
      int dofs[8];
      element_dofs(m, k, ex, ey, dofs);
      for (int i = 0; i < el.ndof; ++i) f[dofs[i]] += fe(i);
    }
  }
  return f;
}

void evaluate_points(const QuadMesh& m, FieldKind k, const PointMaterial& mat, const Field& u,
                     std::vector<PointState>& states, Exec exec) {
  std::vector<Vec> eps;
  strains(m, k, u, eps);
  states.resize(eps.size());
  const long n = static_cast<long>(eps.size());
  if (exec == Exec::Parallel) {
    // exceptions may not cross the parallel region; rethrow the first one
    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
      try {
        states[i] = mat(static_cast<int>(i / kQuadPoints), static_cast<int>(i % kQuadPoints), eps[i]);
        states[i].strain = eps[i];
      } catch (...) {
#pragma omp critical(microlax_fem_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (long i = 0; i < n; ++i) {
      states[i] = mat(static_cast<int>(i / kQuadPoints), static_cast<int>(i % kQuadPoints), eps[i]);
      states[i].strain = eps[i];
    }
  }
}

Field residual(const QuadMesh& m, FieldKind k, const std::vector<PointState>& states, const Field& f_ext,
               const std::vector<char>& fixed) {
  const Q1Element el = make_element(m, k);
  Field r = f_ext;
  for (int ey = 0; ey < m.ny; ++ey) {
    for (int ex = 0; ex < m.nx; ++ex) {
      const int c = ey * m.nx + ex;
      int dofs[8];
      element_dofs(m, k, ex, ey, dofs);
      Eigen::VectorXd fe = Eigen::VectorXd::Zero(el.ndof);
      for (int q = 0; q < kQuadPoints; ++q) {
        fe += el.weight * el.b[q].transpose() * Eigen::VectorXd(states[c * kQuadPoints + q].stress);
      }
      for (int i = 0; i < el.ndof; ++i) r[dofs[i]] -= fe(i);
    }
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (fixed[i]) r[i] = 0.0;
  }
  return r;
}

namespace {

SparseMatrix assemble(const QuadMesh& m, FieldKind k, const std::vector<PointState>& states,
                      const std::vector<char>& fixed) {
  const Q1Element el = make_element(m, k);
  const int n = m.nodes() * dofs_per_node(k);
  Triplets t;
  t.reserve(static_cast<std::size_t>(m.cells()) * el.ndof * el.ndof);
  for (int ey = 0; ey < m.ny; ++ey) {
    for (int ex = 0; ex < m.nx; ++ex) {
      const int c = ey * m.nx + ex;
      int dofs[8];
      element_dofs(m, k, ex, ey, dofs);
      Eigen::MatrixXd ke = Eigen::MatrixXd::Zero(el.ndof, el.ndof);
      for (int q = 0; q < kQuadPoints; ++q) {
        const Eigen::MatrixXd cq = states[c * kQuadPoints + q].tangent;
        ke += el.weight * el.b[q].transpose() * cq * el.b[q];
      }
      for (int i = 0; i < el.ndof; ++i)
        for (int j = 0; j < el.ndof; ++j) t.emplace_back(dofs[i], dofs[j], ke(i, j));
    }
  }
  SparseMatrix kmat = build_sparse(n, t);
  constrain(kmat, fixed);
  return kmat;
}

double total_energy(const QuadMesh& m, const std::vector<PointState>& states, const Field& f_ext, const Field& u) {
  const double w = 0.25 * m.hx * m.hy;
  double e = 0.0;
  for (const PointState& s : states) e += w * s.energy;
  return e - dot(f_ext, u);
}

}  // namespace

EquilibriumResult solve_equilibrium(const QuadMesh& m, FieldKind k, const PointMaterial& mat, Field& u,
                                    const std::vector<char>& fixed, const Field& f_ext,
                                    const EquilibriumOptions& opt, std::vector<PointState>* states_out) {
  std::vector<PointState> states;
  std::vector<int> prev_tags;
  EquilibriumResult res;
  Field delta;
  for (int it = 0;; ++it) {
    evaluate_points(m, k, mat, u, states, opt.exec);
    std::vector<int> tags(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) tags[i] = states[i].tag;
    const bool stationary = it == 0 || tags == prev_tags;
    prev_tags = std::move(tags);

    const Field r = residual(m, k, states, f_ext, fixed);
    const SparseMatrix kmat = assemble(m, k, states, fixed);
    Field inv_diag(r.size());
    const Eigen::VectorXd diag = kmat.diagonal();
    for (std::size_t i = 0; i < r.size(); ++i) inv_diag[i] = diag(i) > 0.0 ? 1.0 / diag(i) : 1.0;
    delta.assign(r.size(), 0.0);
    const CgResult cg = conjugate_gradient(
        [&](const Field& x, Field& y) { kernels::csr_matvec(kmat, x, y, opt.exec); }, r, delta, opt.cg,
        &inv_diag, opt.exec);
    res.cg_iterations += cg.iterations;
    res.residual = std::sqrt(std::max(0.0, dot(delta, r)));
    res.outer = it;
    if (res.residual <= opt.tol && stationary) {
      res.energy = total_energy(m, states, f_ext, u);
      if (states_out) *states_out = std::move(states);
      return res;
    }
    if (it + 1 >= opt.max_outer) {
      throw Error(ErrorCode::NewtonDivergence, "equilibrium iteration did not converge");
    }
    kernels::axpy(1.0, delta, u, opt.exec);
  }
}

}  // namespace microlax::fem
