#pragma once

#include <optional>

#include "microlax/tensor.hpp"

namespace microlax {

/// Material data of the two phases plus the applied dead load.
struct PhaseParams {
  ElasticModulus alpha1;
  ElasticModulus alpha2;
  SymTensor eps_t1;
  SymTensor eps_t2;
  double w1 = 0.0;
  double w2 = 0.0;
  SymTensor sigma_ext;

  int dim() const { return alpha1.dim(); }
  /// Throws DimMismatch / InvalidArgument on inconsistent data.
  void validate() const;

  /// Identity moduli, zero eigenstrains, zero load.
  static PhaseParams neutral(int dim);
};

struct ChemParams {
  double theta = 1.0;
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  double lambda = 1e-3;
  double g_delta = 1e-6;

  void validate() const;
};

struct LinearTheoryParams {
  ElasticModulus stiffness;
  SymTensor eps_bar;
  /// When set, C(d) = d * stiffness + (1 - d) * stiffness_other.
  std::optional<ElasticModulus> stiffness_other;

  int dim() const { return stiffness.dim(); }
};

/// Value and first derivatives of an energy density W(d, e).
struct EnergyEval {
  double value = 0.0;
  double d_d = 0.0;
  Vec d_eps;
};

/// W_i(e) = 1/2 alpha_i (e - eps_i^T):(e - eps_i^T) + w_i, phase in {1, 2}.
double w_micro(int phase, const SymTensor& e, const PhaseParams& p);
SymTensor w_micro_stress(int phase, const SymTensor& e, const PhaseParams& p);

EnergyEval w_lin(double d, const SymTensor& e, const LinearTheoryParams& q);

/// C1 such that |W_lin| and |d_d W_lin| <= C1 (d^2 + |e|^2 + 1) and
/// |d_eps W_lin| <= C1 (|d| + |e| + 1); only for d-independent stiffness.
double w_lin_growth_constant(const LinearTheoryParams& q);

double w_ext(const SymTensor& e, const SymTensor& sigma_ext);

struct GEval {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
  bool regularized = false;
};

/// s ln s + (1-s) ln(1-s) on [delta, 1-delta], continued by its second-order
/// Taylor polynomial about the nearer threshold outside.
GEval g_reg(double s, double delta = 1e-6);

struct PsiEval {
  double value = 0.0;
  double d_a = 0.0;
  double d_b = 0.0;
  bool regularized = false;
};

/// theta/2 (g(a+b) + g(a-b)) + kappa1 a (1-a) - kappa2 b^2.
PsiEval psi(double a, double b, const ChemParams& c);

}  // namespace microlax
