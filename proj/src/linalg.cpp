#include "microlax/linalg.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "microlax/errors.hpp"
#include "microlax/kernels.hpp"

namespace microlax {

SparseMatrix build_sparse(int n, const Triplets& t) {
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

void constrain(SparseMatrix& k, const std::vector<char>& fixed) {
  for (int r = 0; r < k.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(k, r); it; ++it) {
      if (fixed[it.row()] || fixed[it.col()]) it.valueRef() = it.row() == it.col() ? 1.0 : 0.0;
    }
  }
}

int configure_threads() {
  if (const char* env = std::getenv("MICROLAX_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) omp_set_num_threads(n);
  }
  return omp_get_max_threads();
}

double dot(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Field& a) { return std::sqrt(dot(a, a)); }

CgResult conjugate_gradient(const LinearOp& a, const Field& b, Field& x, const CgOptions& opt,
                            const Field* inv_diag, Exec exec) {
  const std::size_t n = b.size();
  x.resize(n, 0.0);
  Field r(n), z(n), p(n), ap(n);
  a(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  auto precondition = [&]() {
    if (inv_diag) {
      for (std::size_t i = 0; i < n; ++i) z[i] = (*inv_diag)[i] * r[i];
    } else {
      z = r;
    }
  };
  const double target = std::max(opt.rel_tol * norm2(b), opt.abs_tol);
  CgResult res;
  res.residual = norm2(r);
  if (res.residual <= target) return res;
  precondition();
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= opt.max_iter; ++it) {
    a(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      // direction in the null space of a semidefinite operator
      res.iterations = it;
      res.residual = norm2(r);
      if (res.residual <= 1e3 * target) return res;
      throw Error(ErrorCode::SolverStall, "conjugate gradient breakdown");
    }
    const double alpha = rz / pap;
    kernels::axpy(alpha, p, x, exec);
    kernels::axpy(-alpha, ap, r, exec);
    res.iterations = it;
    res.residual = norm2(r);
    if (res.residual <= target) return res;
    precondition();
    const double rz_new = dot(r, z);
    kernels::xpby(z, rz_new / rz, p, exec);
    rz = rz_new;
  }
  throw Error(ErrorCode::SolverStall,
              "conjugate gradient did not converge in " + std::to_string(opt.max_iter) + " iterations");
}

}  // namespace microlax
