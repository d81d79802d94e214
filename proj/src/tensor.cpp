#include "microlax/tensor.hpp"

#include <cmath>
#include <string>

namespace microlax {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::SingularModulus: return "SingularModulus";
    case ErrorCode::NonSPDModulus: return "NonSPDModulus";
    case ErrorCode::SingularAlpha: return "SingularAlpha";
    case ErrorCode::RootNotBracketed: return "RootNotBracketed";
    case ErrorCode::NonCommuting: return "NonCommuting";
    case ErrorCode::DegenerateLaminate: return "DegenerateLaminate";
    case ErrorCode::SolverStall: return "SolverStall";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

int mandel_size(int dim) {
  if (dim == 1) return 1;
  if (dim == 2) return 3;
  throw Error(ErrorCode::DimMismatch, "only dim 1 and 2 are supported, got " + std::to_string(dim));
}

SymTensor::SymTensor(int dim) : dim_(dim), v_(Vec::Zero(mandel_size(dim))) {}

SymTensor::SymTensor(int dim, const Vec& mandel) : dim_(dim), v_(mandel) {
  if (v_.size() != mandel_size(dim)) {
    throw Error(ErrorCode::DimMismatch, "Mandel vector length does not match dim");
  }
}

SymTensor SymTensor::scalar(double value) {
  Vec v(1);
  v(0) = value;
  return SymTensor(1, v);
}

SymTensor SymTensor::from_components(double e11, double e22, double e12) {
  Vec v(3);
  v << e11, e22, kSqrt2 * e12;
  return SymTensor(2, v);
}

SymTensor SymTensor::identity(int dim) {
  if (dim == 1) return scalar(1.0);
  return from_components(1.0, 1.0, 0.0);
}

double SymTensor::component(int i, int j) const {
  if (dim_ == 1) return v_(0);
  if (i == j) return v_(i);
  return v_(2) / kSqrt2;
}

double SymTensor::dot(const SymTensor& other) const {
  if (other.dim_ != dim_) throw Error(ErrorCode::DimMismatch, "dot of tensors with different dim");
  return v_.dot(other.v_);
}

SymTensor& SymTensor::operator+=(const SymTensor& o) {
  if (o.dim_ != dim_) throw Error(ErrorCode::DimMismatch, "sum of tensors with different dim");
  v_ += o.v_;
  return *this;
}

SymTensor& SymTensor::operator-=(const SymTensor& o) {
  if (o.dim_ != dim_) throw Error(ErrorCode::DimMismatch, "difference of tensors with different dim");
  v_ -= o.v_;
  return *this;
}

SymTensor& SymTensor::operator*=(double s) {
  v_ *= s;
  return *this;
}

SymTensor to_mandel(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols() || (m.rows() != 1 && m.rows() != 2)) {
    throw Error(ErrorCode::DimMismatch, "expected a 1x1 or 2x2 matrix");
  }
  const double scale = std::max(m.norm(), 1e-300);
  if ((m - m.transpose()).norm() > rel_tol * scale) {
    throw Error(ErrorCode::NotSymmetric, "matrix is not symmetric");
  }
  if (m.rows() == 1) return SymTensor::scalar(m(0, 0));
  return SymTensor::from_components(m(0, 0), m(1, 1), 0.5 * (m(0, 1) + m(1, 0)));
}

Eigen::MatrixXd from_mandel(const SymTensor& t) {
  Eigen::MatrixXd m(t.dim(), t.dim());
  for (int i = 0; i < t.dim(); ++i)
    for (int j = 0; j < t.dim(); ++j) m(i, j) = t.component(i, j);
  return m;
}

ElasticModulus ElasticModulus::from_mandel(const Mat& m) {
  if (m.rows() != m.cols() || (m.rows() != 1 && m.rows() != 3)) {
    throw Error(ErrorCode::DimMismatch, "modulus must be 1x1 or 3x3 in Mandel form");
  }
  if ((m - m.transpose()).norm() > 1e-14 * m.norm()) {
    throw Error(ErrorCode::NotSymmetric, "modulus is not symmetric");
  }
  const Mat sym = 0.5 * (m + m.transpose());
  if (sym_eigenvalues(sym)(0) <= 0.0) {
    throw Error(ErrorCode::NonSPDModulus, "modulus is not positive definite");
  }
  return ElasticModulus(m.rows() == 1 ? 1 : 2, sym);
}

ElasticModulus ElasticModulus::identity(int dim, double scale) {
  const int n = mandel_size(dim);
  return from_mandel(scale * Mat::Identity(n, n));
}

ElasticModulus ElasticModulus::scalar(double value) { return identity(1, value); }

ElasticModulus ElasticModulus::cubic(double c11, double c12, double c44) {
  Mat m(3, 3);
  m << c11, c12, 0.0,
       c12, c11, 0.0,
       0.0, 0.0, 2.0 * c44;
  return from_mandel(m);
}

ElasticModulus ElasticModulus::isotropic(double lame, double shear) {
  return cubic(lame + 2.0 * shear, lame, shear);
}

double ElasticModulus::min_eigenvalue() const { return sym_eigenvalues(m_)(0); }

double ElasticModulus::max_eigenvalue() const {
  const Vec ev = sym_eigenvalues(m_);
  return ev(ev.size() - 1);
}

SymTensor apply_modulus(const ElasticModulus& c, const SymTensor& e) {
  if (c.dim() != e.dim()) throw Error(ErrorCode::DimMismatch, "modulus and strain dims differ");
  return SymTensor(e.dim(), c.mandel() * e.mandel());
}

SymSolve solve_symmetric(const Mat& a, const Vec& rhs, double max_condition, bool allow_pseudo,
                         ErrorCode code) {
  if (a.rows() != rhs.size()) throw Error(ErrorCode::DimMismatch, "system size mismatch");
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  const Vec lam = es.eigenvalues();
  const double lmax = lam.cwiseAbs().maxCoeff();
  const double lmin = lam.cwiseAbs().minCoeff();
  SymSolve out;
  out.condition = lmin > 0.0 ? lmax / lmin : INFINITY;
  if (lmax == 0.0) throw Error(code, "zero matrix");
  const Vec coeffs = es.eigenvectors().transpose() * rhs;
  Vec y = Vec::Zero(rhs.size());
  if (out.condition <= max_condition) {
    for (Eigen::Index i = 0; i < lam.size(); ++i) y(i) = coeffs(i) / lam(i);
    out.x = es.eigenvectors() * y;
    return out;
  }
  if (!allow_pseudo) {
    throw Error(code, "condition number " + std::to_string(out.condition) + " exceeds limit");
  }
  const double cut = lmax / max_condition;
  double dropped = 0.0;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam(i)) > cut) {
      y(i) = coeffs(i) / lam(i);
    } else {
      dropped += coeffs(i) * coeffs(i);
    }
  }
  if (std::sqrt(dropped) > 1e-9 * std::max(rhs.norm(), 1e-300)) {
    throw Error(code, "singular system with right-hand side outside the range");
  }
  out.x = es.eigenvectors() * y;
  out.pseudo = true;
  return out;
}

SymTensor solve_modulus(const Mat& a, const SymTensor& rhs) {
  return SymTensor(rhs.dim(), solve_symmetric(a, rhs.mandel(), 1e12, false).x);
}

double det_mandel(const Vec& v) {
  if (v.size() == 1) return v(0);
  if (v.size() == 3) return v(0) * v(1) - 0.5 * v(2) * v(2);
  throw Error(ErrorCode::DimMismatch, "det of a non-Mandel vector");
}

double det_sym(const SymTensor& t) { return det_mandel(t.mandel()); }

Vec sym_eigenvalues(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Mat sym_sqrt(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  return es.operatorSqrt();
}

Mat sym_inv_sqrt(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  if (es.eigenvalues()(0) <= 0.0) throw Error(ErrorCode::NonSPDModulus, "inverse sqrt of non-SPD matrix");
  return es.operatorInverseSqrt();
}

Mat TraceRemover::matrix() {
  Mat t(3, 3);
  t << 0.0, -1.0, 0.0,
      -1.0, 0.0, 0.0,
       0.0, 0.0, 1.0;
  return t;
}

SymTensor TraceRemover::apply(const SymTensor& e) {
  if (e.dim() != 2) throw Error(ErrorCode::DimMismatch, "trace remover is defined for dim 2");
  return SymTensor(2, matrix() * e.mandel());
}

bool commutes(const Mat& a, const Mat& b, double rel_tol) {
  return (a * b - b * a).norm() <= rel_tol * a.norm() * b.norm();
}

}  // namespace microlax
