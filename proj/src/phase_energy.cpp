#include "microlax/phase_energy.hpp"

#include <algorithm>
#include <cmath>

namespace microlax {

PhaseParams PhaseParams::neutral(int dim) {
  PhaseParams p;
  p.alpha1 = ElasticModulus::identity(dim);
  p.alpha2 = ElasticModulus::identity(dim);
  p.eps_t1 = SymTensor(dim);
  p.eps_t2 = SymTensor(dim);
  p.sigma_ext = SymTensor(dim);
  return p;
}

void PhaseParams::validate() const {
  const int d = alpha1.dim();
  if (alpha2.dim() != d || eps_t1.dim() != d || eps_t2.dim() != d || sigma_ext.dim() != d) {
    throw Error(ErrorCode::DimMismatch, "phase parameters have inconsistent dimensions");
  }
  if (w1 < 0.0 || w2 < 0.0) throw Error(ErrorCode::InvalidArgument, "energy offsets must be >= 0");
}

void ChemParams::validate() const {
  if (!(theta > 0.0 && kappa1 > 0.0 && kappa2 > 0.0 && lambda > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "theta, kappa1, kappa2 and lambda must be positive");
  }
  if (!(g_delta > 0.0 && g_delta < 0.25)) {
    throw Error(ErrorCode::InvalidArgument, "g_delta must lie in (0, 0.25)");
  }
}

namespace {

const ElasticModulus& modulus(int phase, const PhaseParams& p) {
  return phase == 1 ? p.alpha1 : p.alpha2;
}

const SymTensor& eigenstrain(int phase, const PhaseParams& p) {
  return phase == 1 ? p.eps_t1 : p.eps_t2;
}

}  // namespace

double w_micro(int phase, const SymTensor& e, const PhaseParams& p) {
  const SymTensor r = e - eigenstrain(phase, p);
  const double offset = phase == 1 ? p.w1 : p.w2;
  return 0.5 * r.dot(apply_modulus(modulus(phase, p), r)) + offset;
}

SymTensor w_micro_stress(int phase, const SymTensor& e, const PhaseParams& p) {
  return apply_modulus(modulus(phase, p), e - eigenstrain(phase, p));
}

EnergyEval w_lin(double d, const SymTensor& e, const LinearTheoryParams& q) {
  const SymTensor r = e - d * q.eps_bar;
  Mat c = q.stiffness.mandel();
  Mat dc = Mat::Zero(c.rows(), c.cols());
  if (q.stiffness_other) {
    dc = q.stiffness.mandel() - q.stiffness_other->mandel();
    c = d * q.stiffness.mandel() + (1.0 - d) * q.stiffness_other->mandel();
  }
  const Vec sigma = c * r.mandel();
  EnergyEval out;
  out.value = 0.5 * r.mandel().dot(sigma);
  out.d_eps = sigma;
  out.d_d = -q.eps_bar.mandel().dot(sigma) + 0.5 * r.mandel().dot(dc * r.mandel());
  return out;
}

double w_lin_growth_constant(const LinearTheoryParams& q) {
  const double cnorm = q.stiffness.max_eigenvalue();
  const double m = std::max(1.0, q.eps_bar.norm());
  return cnorm * m * m;
}

double w_ext(const SymTensor& e, const SymTensor& sigma_ext) { return -e.dot(sigma_ext); }

namespace {

struct GExact {
  double v, d1, d2;
};

GExact g_exact(double s) {
  // s in (0,1); 0 ln 0 never reached because callers stay >= delta.
  return {s * std::log(s) + (1.0 - s) * std::log(1.0 - s), std::log(s / (1.0 - s)),
          1.0 / (s * (1.0 - s))};
}

}  // namespace

GEval g_reg(double s, double delta) {
  GEval out;
  if (s >= delta && s <= 1.0 - delta) {
    const GExact g = g_exact(s);
    out.value = g.v;
    out.first = g.d1;
    out.second = g.d2;
    return out;
  }
  const double s0 = s < delta ? delta : 1.0 - delta;
  const GExact g = g_exact(s0);
  const double h = s - s0;
  out.value = g.v + g.d1 * h + 0.5 * g.d2 * h * h;
  out.first = g.d1 + g.d2 * h;
  out.second = g.d2;
  out.regularized = true;
  return out;
}

PsiEval psi(double a, double b, const ChemParams& c) {
  const GEval gp = g_reg(a + b, c.g_delta);
  const GEval gm = g_reg(a - b, c.g_delta);
  PsiEval out;
  out.value = 0.5 * c.theta * (gp.value + gm.value) + c.kappa1 * a * (1.0 - a) - c.kappa2 * b * b;
  out.d_a = 0.5 * c.theta * (gp.first + gm.first) + c.kappa1 * (1.0 - 2.0 * a);
  out.d_b = 0.5 * c.theta * (gp.first - gm.first) - 2.0 * c.kappa2 * b;
  out.regularized = gp.regularized || gm.regularized;
  return out;
}

}  // namespace microlax
