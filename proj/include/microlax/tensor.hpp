#pragma once

// Small symmetric-tensor algebra in Mandel (orthonormal) coordinates.
//
//   D = 1:  (e11)
//   D = 2:  (e11, e22, sqrt(2) e12)
//
// With this basis the Frobenius product A:B is the plain dot product of the
// coordinate vectors and fourth-order moduli become symmetric matrices.

#include <Eigen/Dense>

#include "microlax/errors.hpp"

namespace microlax {

/// Coordinate vector with at most three entries (stack storage).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
/// Square matrix with at most 3x3 entries (stack storage).
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

inline constexpr double kSqrt2 = 1.41421356237309504880;

int mandel_size(int dim);

class SymTensor {
 public:
  SymTensor() : SymTensor(2) {}
  explicit SymTensor(int dim);
  SymTensor(int dim, const Vec& mandel);

  static SymTensor scalar(double value);
  static SymTensor from_components(double e11, double e22, double e12);
  static SymTensor identity(int dim);

  int dim() const { return dim_; }
  const Vec& mandel() const { return v_; }
  Vec& mandel() { return v_; }

  /// Tensor component e_ij (not the Mandel coordinate).
  double component(int i, int j) const;

  double dot(const SymTensor& other) const;
  double norm() const { return v_.norm(); }

  SymTensor& operator+=(const SymTensor& o);
  SymTensor& operator-=(const SymTensor& o);
  SymTensor& operator*=(double s);

  friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
  friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
  friend SymTensor operator*(double s, SymTensor a) { return a *= s; }
  friend SymTensor operator*(SymTensor a, double s) { return a *= s; }

 private:
  int dim_;
  Vec v_;
};

/// Throws NotSymmetric when |m - m^T| exceeds rel_tol * |m|.
SymTensor to_mandel(const Eigen::MatrixXd& m, double rel_tol = 1e-12);
Eigen::MatrixXd from_mandel(const SymTensor& t);

/// Symmetric positive-definite modulus acting on symmetric tensors.
class ElasticModulus {
 public:
  ElasticModulus() : ElasticModulus(identity(2)) {}

  /// Validates symmetry (1e-14 relative) and positive definiteness.
  static ElasticModulus from_mandel(const Mat& m);
  static ElasticModulus identity(int dim, double scale = 1.0);
  static ElasticModulus scalar(double value);
  /// Cubic crystal from reduced Voigt constants; shear enters as 2*C44.
  static ElasticModulus cubic(double c11, double c12, double c44);
  static ElasticModulus isotropic(double lame, double shear);

  int dim() const { return dim_; }
  const Mat& mandel() const { return m_; }
  double min_eigenvalue() const;
  double max_eigenvalue() const;

 private:
  ElasticModulus(int dim, const Mat& m) : dim_(dim), m_(m) {}
  int dim_;
  Mat m_;
};

SymTensor apply_modulus(const ElasticModulus& c, const SymTensor& e);

/// Solves a x = rhs for symmetric a. Throws SingularModulus when the
/// spectral condition number exceeds 1e12.
SymTensor solve_modulus(const Mat& a, const SymTensor& rhs);

struct SymSolve {
  Vec x;
  double condition = 1.0;
  bool pseudo = false;
};

/// Spectral solve of a symmetric system. Above max_condition, directions
/// with |lambda| <= lambda_max / max_condition are dropped when allow_pseudo
/// is set and rhs lies in the range (to 1e-9 relative); otherwise `code` is
/// thrown.
SymSolve solve_symmetric(const Mat& a, const Vec& rhs, double max_condition, bool allow_pseudo,
                         ErrorCode code = ErrorCode::SingularModulus);

/// e11 e22 - e12^2 (dim 2) or the scalar itself (dim 1).
double det_sym(const SymTensor& t);
double det_mandel(const Vec& v);

/// Ascending eigenvalues of a symmetric matrix.
Vec sym_eigenvalues(const Mat& a);
Mat sym_sqrt(const Mat& a);
Mat sym_inv_sqrt(const Mat& a);

/// T e = e - tr(e) Id on 2x2 symmetric tensors.
struct TraceRemover {
  static Mat matrix();
  static SymTensor apply(const SymTensor& e);
};

/// |a b - b a| <= rel_tol * |a| |b|.
bool commutes(const Mat& a, const Mat& b, double rel_tol);

}  // namespace microlax
