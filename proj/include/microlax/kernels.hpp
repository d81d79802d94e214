#pragma once

// Hot loops in two flavours: plain serial reference versions and OpenMP
// versions. Both produce bitwise identical results (no parallel reductions).

#include "microlax/linalg.hpp"

namespace microlax::kernels {

void csr_matvec_serial(const SparseMatrix& a, const Field& x, Field& y);
void csr_matvec_parallel(const SparseMatrix& a, const Field& x, Field& y);
void csr_matvec(const SparseMatrix& a, const Field& x, Field& y, Exec exec);

/// y = a x + y
void axpy(double a, const Field& x, Field& y, Exec exec);
/// y = x + b y
void xpby(const Field& x, double b, Field& y, Exec exec);

/// Cell-centred five-point (three-point in 1D) Laplacian with mirrored
/// ghosts; ny == 1 means a 1D grid.
void laplacian_serial(const Field& f, Field& out, int nx, int ny, double hx, double hy);
void laplacian_parallel(const Field& f, Field& out, int nx, int ny, double hx, double hy);
void laplacian(const Field& f, Field& out, int nx, int ny, double hx, double hy, Exec exec);

}  // namespace microlax::kernels
