#pragma once

#include <cstdint>
#include <functional>

#include "microlax/phase_energy.hpp"

namespace microlax {

enum class Regime { Zero = 0, One = 1, Two = 2, Three = 3 };

const char* regime_name(Regime r);

/// Relaxed energy and its first derivatives at one point. Strain-like vectors
/// are Mandel coordinates (D = 1, 2) or plain 2-vectors (anti-plane case).
struct RelaxedEval {
  double value = 0.0;
  double d_d = 0.0;
  Vec d_eps;
  Regime regime = Regime::One;
  double beta_star = 0.0;
  Vec eps1_star;
  Vec eps2_star;
  double phi_at_beta = 0.0;
  /// Regime II only: derivatives of the root beta_II.
  double dbeta_dd = 0.0;
  Vec dbeta_deps;
  /// alpha(beta*, d) was singular and a range-restricted solve was used.
  bool pseudo = false;
};

EnergyEval to_energy_eval(const RelaxedEval& r);

struct GammaStar {
  double value = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
};

struct RelaxedOptions {
  /// Reject non-commuting moduli when beta* is gamma* or beta_II.
  bool check_commuting = true;
  double commute_tol = 1e-10;
  /// Add d(beta*)/d(eps) d1 d2 det(Delta) to the stress in Regime II.
  bool beta_eps_chain_rule = false;
  double max_condition = 1e12;
  int max_bisection = 200;
};

GammaStar gamma_star(const PhaseParams& p);

/// alpha(beta, d) = (1-d) alpha1 + d alpha2 - beta T.
Mat alpha_of(double beta, double d, const PhaseParams& p);
/// alpha2 (eps2^T - eps) - alpha1 (eps1^T - eps).
Vec misfit_of(const Vec& eps, const PhaseParams& p);

/// -det(alpha(beta,d)^{-1} e(eps)).
double phi(double beta, double d, const SymTensor& e, const PhaseParams& p);

struct Classification {
  Regime regime = Regime::Zero;
  double beta_star = 0.0;
  double gamma = 0.0;
};

Classification classify_regime(double d, const SymTensor& e, const PhaseParams& p,
                               const RelaxedOptions& opt = {});

/// Inner minimisation at a given translation beta. Value includes the
/// beta d1 d2 det(Delta) term; derivatives are those of this fixed-beta
/// function (the regime fields are left at One / beta).
RelaxedEval eval_2d_fixed_beta(double d, const SymTensor& e, const PhaseParams& p, double beta,
                               bool allow_pseudo = false);

RelaxedEval eval_2d(double d, const SymTensor& e, const PhaseParams& p,
                    const RelaxedOptions& opt = {});

/// Derivatives of beta_II(d, eps) from implicit differentiation of phi = 0.
/// Throws DegenerateLaminate when d(phi)/d(beta) vanishes.
double dbeta_dd(double d, const SymTensor& e, const PhaseParams& p, double beta);
Vec dbeta_deps(double d, const SymTensor& e, const PhaseParams& p, double beta);

/// Regime III stress including the extra gamma* term as printed in the
/// literature version of the derivative lemma. Diagnostic only: the
/// evaluators use the envelope stress, which matches finite differences.
Vec lemma_stress_regime3(double d, const SymTensor& e, const PhaseParams& p);

/// d(sigma_bar)/d(eps) with beta held fixed. Symmetric positive semidefinite.
Mat effective_tangent(double d, double beta, const PhaseParams& p);

RelaxedEval eval_1d(double d, double eps, const PhaseParams& p);

/// Anti-plane shear data: 2x2 SPD moduli and vector eigenstrains.
struct AntiPlaneParams {
  Eigen::Matrix2d alpha1 = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d alpha2 = Eigen::Matrix2d::Identity();
  Eigen::Vector2d f1 = Eigen::Vector2d::Zero();
  Eigen::Vector2d f2 = Eigen::Vector2d::Zero();
  double w1 = 0.0;
  double w2 = 0.0;
  Eigen::Vector2d sigma_ext = Eigen::Vector2d::Zero();

  void validate() const;
};

RelaxedEval eval_scalar3d(double d, const Eigen::Vector2d& f, const AntiPlaneParams& p);
Eigen::Matrix2d effective_tangent_scalar3d(double d, const AntiPlaneParams& p);

enum class EnergyKind { OneD, TwoD, AntiPlane };

/// Uniform front end over the three closed-form relaxed energies.
class RelaxedEnergy {
 public:
  static RelaxedEnergy one_d(const PhaseParams& p);
  static RelaxedEnergy two_d(const PhaseParams& p, const RelaxedOptions& opt = {});
  static RelaxedEnergy anti_plane(const AntiPlaneParams& p);

  EnergyKind kind() const { return kind_; }
  /// 1, 3 or 2 coordinates.
  int strain_size() const;
  const PhaseParams& phases() const { return phases_; }
  const AntiPlaneParams& anti_plane_params() const { return anti_; }
  const RelaxedOptions& options() const { return opt_; }

  /// d in [0, 1].
  RelaxedEval eval(double d, const Vec& e) const;
  /// Fixed translation beta (ignored outside D = 2).
  RelaxedEval eval_frozen(double d, const Vec& e, double beta) const;
  Mat tangent(double d, double beta) const;

 private:
  EnergyKind kind_ = EnergyKind::OneD;
  PhaseParams phases_;
  AntiPlaneParams anti_;
  RelaxedOptions opt_;
};

/// C^1 extension to all real d: linear growth beyond [-1, 2] and cubic
/// Hermite blends on (-1, 0) and (1, 2).
RelaxedEval eval_extended(double d, const Vec& e, const RelaxedEnergy& w);

using EnergyFn = std::function<EnergyEval(double, const Vec&)>;

struct ProbeConfig {
  std::size_t samples = 10000;
  std::uint64_t seed = 0x5EED;
  int strain_size = 1;
  double strain_radius = 5.0;
  double d_lo = 0.0;
  double d_hi = 1.0;
};

struct ProbeReport {
  double c1_hat = 0.0;
  double C1_hat = 0.0;
  std::size_t samples = 0;
  bool pass = false;
};

/// Samples (d, e1, e2) and reports the smallest monotonicity ratio of the
/// stress and the largest growth ratios of value and derivatives.
ProbeReport assumption_A_probe(const EnergyFn& w, const ProbeConfig& cfg);

}  // namespace microlax
