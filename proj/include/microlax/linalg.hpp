#pragma once

#include <functional>
#include <vector>

#include <Eigen/Sparse>

namespace microlax {

using Field = std::vector<double>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplets = std::vector<Eigen::Triplet<double, int>>;

SparseMatrix build_sparse(int n, const Triplets& t);

/// Zeroes rows and columns of fixed dofs and puts 1 on their diagonal.
void constrain(SparseMatrix& k, const std::vector<char>& fixed);

enum class Exec { Serial, Parallel };

/// Sets the OpenMP thread count from MICROLAX_THREADS (if set). Returns the
/// number of threads that parallel kernels will use.
int configure_threads();

using LinearOp = std::function<void(const Field& x, Field& y)>;

struct CgOptions {
  double rel_tol = 1e-12;
  double abs_tol = 0.0;
  int max_iter = 100000;
};

struct CgResult {
  int iterations = 0;
  double residual = 0.0;
};

/// Conjugate gradients on a symmetric positive (semi)definite operator. The
/// optional preconditioner is a diagonal (Jacobi). x holds the initial guess.
/// Throws SolverStall when max_iter is reached.
CgResult conjugate_gradient(const LinearOp& a, const Field& b, Field& x, const CgOptions& opt,
                            const Field* inv_diag = nullptr, Exec exec = Exec::Parallel);

double dot(const Field& a, const Field& b);
double norm2(const Field& a);

}  // namespace microlax
