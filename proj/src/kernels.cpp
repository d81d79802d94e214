#include "microlax/kernels.hpp"

namespace microlax::kernels {

void csr_matvec_serial(const SparseMatrix& a, const Field& x, Field& y) {
  const int n = static_cast<int>(a.rows());
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  y.resize(n);
  for (int r = 0; r < n; ++r) {
    double s = 0.0;
    for (int k = outer[r]; k < outer[r + 1]; ++k) s += val[k] * x[inner[k]];
    y[r] = s;
  }
}

void csr_matvec_parallel(const SparseMatrix& a, const Field& x, Field& y) {
  const int n = static_cast<int>(a.rows());
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  y.resize(n);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < n; ++r) {
    double s = 0.0;
    for (int k = outer[r]; k < outer[r + 1]; ++k) s += val[k] * x[inner[k]];
    y[r] = s;
  }
}

void csr_matvec(const SparseMatrix& a, const Field& x, Field& y, Exec exec) {
  if (exec == Exec::Parallel) {
    csr_matvec_parallel(a, x, y);
  } else {
    csr_matvec_serial(a, x, y);
  }
}

void axpy(double a, const Field& x, Field& y, Exec exec) {
  const long n = static_cast<long>(y.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel && n > 4096)
  for (long i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpby(const Field& x, double b, Field& y, Exec exec) {
  const long n = static_cast<long>(y.size());
#pragma omp parallel for schedule(static) if (exec == Exec::Parallel && n > 4096)
  for (long i = 0; i < n; ++i) y[i] = x[i] + b * y[i];
}

namespace {

inline double lap_at(const Field& f, int i, int j, int nx, int ny, double cx, double cy) {
  const int c = j * nx + i;
  const double fc = f[c];
  double s = 0.0;
  if (i > 0) s += cx * (f[c - 1] - fc);
  if (i < nx - 1) s += cx * (f[c + 1] - fc);
  if (ny > 1) {
    if (j > 0) s += cy * (f[c - nx] - fc);
    if (j < ny - 1) s += cy * (f[c + nx] - fc);
  }
  return s;
}

}  // namespace

void laplacian_serial(const Field& f, Field& out, int nx, int ny, double hx, double hy) {
  out.resize(f.size());
  const double cx = 1.0 / (hx * hx);
  const double cy = ny > 1 ? 1.0 / (hy * hy) : 0.0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out[j * nx + i] = lap_at(f, i, j, nx, ny, cx, cy);
}

void laplacian_parallel(const Field& f, Field& out, int nx, int ny, double hx, double hy) {
  out.resize(f.size());
  const double cx = 1.0 / (hx * hx);
  const double cy = ny > 1 ? 1.0 / (hy * hy) : 0.0;
  if (ny == 1) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nx; ++i) out[i] = lap_at(f, i, 0, nx, 1, cx, cy);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) out[j * nx + i] = lap_at(f, i, j, nx, ny, cx, cy);
}

void laplacian(const Field& f, Field& out, int nx, int ny, double hx, double hy, Exec exec) {
  if (exec == Exec::Parallel) {
    laplacian_parallel(f, out, nx, ny, hx, hy);
  } else {
    laplacian_serial(f, out, nx, ny, hx, hy);
  }
}

}  // namespace microlax::kernels
