#include "microlax/relaxed_energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "microlax/rng.hpp"

namespace microlax {

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Zero: return "0";
    case Regime::One: return "I";
    case Regime::Two: return "II";
    case Regime::Three: return "III";
  }
  return "?";
}

EnergyEval to_energy_eval(const RelaxedEval& r) {
  EnergyEval out;
  out.value = r.value;
  out.d_d = r.d_d;
  out.d_eps = r.d_eps;
  return out;
}

namespace {

void require_dim2(const PhaseParams& p) {
  if (p.dim() != 2) throw Error(ErrorCode::DimMismatch, "two-dimensional evaluator needs dim 2 data");
}

void require_fraction(double d) {
  if (!(d >= 0.0 && d <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "volume fraction outside [0, 1]");
  }
}

double quad_energy(const Mat& alpha, const Vec& r, double w) { return 0.5 * r.dot(alpha * r) + w; }

}  // namespace

GammaStar gamma_star(const PhaseParams& p) {
  require_dim2(p);
  const Mat t = TraceRemover::matrix();
  auto gamma_i = [&](const ElasticModulus& a) {
    const Mat s = sym_inv_sqrt(a.mandel());
    const Vec ev = sym_eigenvalues(s * t * s);
    return 1.0 / ev(ev.size() - 1);
  };
  GammaStar g;
  g.gamma1 = gamma_i(p.alpha1);
  g.gamma2 = gamma_i(p.alpha2);
  g.value = std::min(g.gamma1, g.gamma2);
  return g;
}

Mat alpha_of(double beta, double d, const PhaseParams& p) {
  return (1.0 - d) * p.alpha1.mandel() + d * p.alpha2.mandel() - beta * TraceRemover::matrix();
}

Vec misfit_of(const Vec& eps, const PhaseParams& p) {
  return p.alpha2.mandel() * (p.eps_t2.mandel() - eps) - p.alpha1.mandel() * (p.eps_t1.mandel() - eps);
}

namespace {

constexpr double kMaxCondition = 1e12;

SymSolve solve_delta(double beta, double d, const Vec& e, const PhaseParams& p, bool allow_pseudo) {
  return solve_symmetric(alpha_of(beta, d, p), e, kMaxCondition, allow_pseudo, ErrorCode::SingularAlpha);
}

double phi_vec(double beta, double d, const Vec& eps, const PhaseParams& p) {
  return -det_mandel(solve_delta(beta, d, misfit_of(eps, p), p, true).x);
}

bool homogeneous(const Vec& e, const Vec& eps, const PhaseParams& p) {
  const double scale = (p.alpha1.mandel().norm() + p.alpha2.mandel().norm()) *
                       (eps.norm() + p.eps_t1.norm() + p.eps_t2.norm() + 1.0);
  return e.norm() <= 1e-12 * scale;
}

void check_commuting(const PhaseParams& p, double tol) {
  const Mat t = TraceRemover::matrix();
  for (const ElasticModulus* a : {&p.alpha1, &p.alpha2}) {
    const Mat& m = a->mandel();
    if ((m * t - t * m).norm() > tol * m.norm()) {
      throw Error(ErrorCode::NonCommuting, "moduli do not commute with the trace remover");
    }
  }
}

}  // namespace

double phi(double beta, double d, const SymTensor& e, const PhaseParams& p) {
  require_dim2(p);
  return phi_vec(beta, d, e.mandel(), p);
}

Classification classify_regime(double d, const SymTensor& e, const PhaseParams& p,
                               const RelaxedOptions& opt) {
  require_dim2(p);
  require_fraction(d);
  Classification c;
  c.gamma = gamma_star(p).value;
  const Vec eps = e.mandel();
  const Vec mis = misfit_of(eps, p);
  if (homogeneous(mis, eps, p)) {
    c.regime = Regime::Zero;
    return c;
  }
  const double phi0 = phi_vec(0.0, d, eps, p);
  if (phi0 > 0.0) {
    c.regime = Regime::One;
    return c;
  }
  const double top = c.gamma * (1.0 - 1e-8);
  const double phi_top = phi_vec(top, d, eps, p);
  if (!std::isfinite(phi0) || !std::isfinite(phi_top)) {
    throw Error(ErrorCode::RootNotBracketed, "phi is not finite on [0, gamma*]");
  }
  if (phi_top < 0.0) {
    c.regime = Regime::Three;
    c.beta_star = c.gamma;
    return c;
  }
  c.regime = Regime::Two;
  if (phi0 == 0.0) return c;
  double lo = 0.0;
  double hi = top;
  const double tol = std::max(1e-14, 1e-12 * c.gamma);
  for (int it = 0; it < opt.max_bisection && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = phi_vec(mid, d, eps, p);
    if (!std::isfinite(v)) throw Error(ErrorCode::RootNotBracketed, "phi is not finite inside the bracket");
    if (v <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  c.beta_star = 0.5 * (lo + hi);
  return c;
}

RelaxedEval eval_2d_fixed_beta(double d, const SymTensor& e, const PhaseParams& p, double beta,
                               bool allow_pseudo) {
  require_dim2(p);
  const Vec eps = e.mandel();
  const SymSolve s = solve_delta(beta, d, misfit_of(eps, p), p, allow_pseudo);
  const Vec& delta = s.x;
  const double d1 = d;
  const double d2 = 1.0 - d;
  RelaxedEval out;
  out.pseudo = s.pseudo;
  out.beta_star = beta;
  out.eps1_star = eps - d2 * delta;
  out.eps2_star = eps + d1 * delta;
  if (d1 == 1.0) out.eps1_star = eps;
  if (d2 == 1.0) out.eps2_star = eps;
  const Vec r1 = out.eps1_star - p.eps_t1.mandel();
  const Vec r2 = out.eps2_star - p.eps_t2.mandel();
  const double w1 = quad_energy(p.alpha1.mandel(), r1, p.w1);
  const double w2 = quad_energy(p.alpha2.mandel(), r2, p.w2);
  const double det = det_mandel(delta);
  const Vec sigma = d1 * (p.alpha1.mandel() * r1) + d2 * (p.alpha2.mandel() * r2);
  out.value = d1 * w1 + d2 * w2 + beta * d1 * d2 * det;
  out.d_eps = sigma;
  out.d_d = w1 - w2 + sigma.dot(delta) + beta * (d2 - d1) * det;
  out.phi_at_beta = -det;
  return out;
}

namespace {

struct RootSensitivity {
  Vec t_delta;
  Vec ainv_t_delta;
  double denom;
  Vec delta;
  Mat a;
};

RootSensitivity root_sensitivity(double d, const Vec& eps, const PhaseParams& p, double beta) {
  RootSensitivity r;
  r.a = alpha_of(beta, d, p);
  r.delta = solve_symmetric(r.a, misfit_of(eps, p), kMaxCondition, true, ErrorCode::SingularAlpha).x;
  r.t_delta = TraceRemover::matrix() * r.delta;
  r.ainv_t_delta = solve_symmetric(r.a, r.t_delta, kMaxCondition, true, ErrorCode::SingularAlpha).x;
  r.denom = r.t_delta.dot(r.ainv_t_delta);
  const double scale = r.t_delta.squaredNorm() / std::max(r.a.norm(), 1e-300);
  if (!(std::abs(r.denom) > 1e-14 * scale) || scale == 0.0) {
    throw Error(ErrorCode::DegenerateLaminate, "d(phi)/d(beta) vanishes at the Regime II root");
  }
  return r;
}

}  // namespace

double dbeta_dd(double d, const SymTensor& e, const PhaseParams& p, double beta) {
  require_dim2(p);
  const RootSensitivity r = root_sensitivity(d, e.mandel(), p, beta);
  const Mat da = p.alpha1.mandel() - p.alpha2.mandel();
  // d(Delta)/dd = alpha^{-1} (alpha1 - alpha2) Delta
  return -r.ainv_t_delta.dot(da * r.delta) / r.denom;
}

Vec dbeta_deps(double d, const SymTensor& e, const PhaseParams& p, double beta) {
  require_dim2(p);
  const RootSensitivity r = root_sensitivity(d, e.mandel(), p, beta);
  const Mat da = p.alpha1.mandel() - p.alpha2.mandel();
  return -(da * r.ainv_t_delta) / r.denom;
}

Vec lemma_stress_regime3(double d, const SymTensor& e, const PhaseParams& p) {
  const double g = gamma_star(p).value;
  const RelaxedEval base = eval_2d_fixed_beta(d, e, p, g, true);
  const Vec delta = base.eps2_star - base.eps1_star;
  const Mat da = p.alpha1.mandel() - p.alpha2.mandel();
  const Vec extra = solve_symmetric(alpha_of(g, d, p), da * TraceRemover::matrix() * delta,
                                    kMaxCondition, true, ErrorCode::SingularAlpha)
                        .x;
  return base.d_eps + g * d * (1.0 - d) * extra;
}

Mat effective_tangent(double d, double beta, const PhaseParams& p) {
  const Mat& a1 = p.alpha1.mandel();
  const Mat& a2 = p.alpha2.mandel();
  const Mat da = a1 - a2;
  const double d1 = d;
  const double d2 = 1.0 - d;
  const Mat a = alpha_of(beta, d, p);
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  const Vec lam = es.eigenvalues();
  const double cut = lam.cwiseAbs().maxCoeff() / kMaxCondition;
  Vec inv = Vec::Zero(lam.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (std::abs(lam(i)) > cut) inv(i) = 1.0 / lam(i);
  }
  const Mat ainv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  Mat c = d1 * a1 + d2 * a2 - d1 * d2 * da * ainv * da;
  return 0.5 * (c + c.transpose());
}

RelaxedEval eval_2d(double d, const SymTensor& e, const PhaseParams& p, const RelaxedOptions& opt) {
  require_dim2(p);
  require_fraction(d);
  const Classification c = classify_regime(d, e, p, opt);
  if (opt.check_commuting && (c.regime == Regime::Two || c.regime == Regime::Three)) {
    check_commuting(p, opt.commute_tol);
  }
  RelaxedEval out = eval_2d_fixed_beta(d, e, p, c.beta_star, c.regime == Regime::Three);
  out.regime = c.regime;
  out.beta_star = c.beta_star;
  if (c.regime == Regime::Zero) {
    out.eps1_star = e.mandel();
    out.eps2_star = e.mandel();
  }
  if (c.regime == Regime::Two) {
    out.dbeta_dd = dbeta_dd(d, e, p, c.beta_star);
    out.dbeta_deps = dbeta_deps(d, e, p, c.beta_star);
    if (opt.beta_eps_chain_rule) {
      const double det = -out.phi_at_beta;
      out.d_eps += out.dbeta_deps * d * (1.0 - d) * det;
    }
  }
  return out;
}

RelaxedEval eval_1d(double d, double eps, const PhaseParams& p) {
  if (p.dim() != 1) throw Error(ErrorCode::DimMismatch, "one-dimensional evaluator needs dim 1 data");
  require_fraction(d);
  const double a1 = p.alpha1.mandel()(0, 0);
  const double a2 = p.alpha2.mandel()(0, 0);
  const double t1 = p.eps_t1.mandel()(0);
  const double t2 = p.eps_t2.mandel()(0);
  const double d1 = d;
  const double d2 = 1.0 - d;
  const double den = d2 * a1 + d1 * a2;
  const double e1 = (a2 * (eps - d2 * t2) + d2 * a1 * t1) / den;
  const double e2 = (a1 * (eps - d1 * t1) + d1 * a2 * t2) / den;
  const double w1 = 0.5 * a1 * (e1 - t1) * (e1 - t1) + p.w1;
  const double w2 = 0.5 * a2 * (e2 - t2) * (e2 - t2) + p.w2;

  RelaxedEval out;
  out.regime = Regime::One;
  out.eps1_star = Vec::Constant(1, e1);
  out.eps2_star = Vec::Constant(1, e2);
  out.value = d1 * w1 + d2 * w2;
  out.d_eps = Vec::Constant(1, a1 * a2 * (d1 * (eps - t1) + d2 * (eps - t2)) / den);
  const double lin = a2 * t2 - a1 * t1 + (a2 - a1) * (d1 * t1 + d2 * t2);
  out.d_d = w1 - w2 +
            a1 * a2 / (den * den) *
                ((a1 - a2) * eps * eps + d1 * a1 * t1 * t1 - d2 * a2 * t2 * t2 + lin * eps +
                 (d2 * a1 - d1 * a2) * t1 * t2);
  return out;
}

void AntiPlaneParams::validate() const {
  for (const Eigen::Matrix2d* a : {&alpha1, &alpha2}) {
    if ((*a - a->transpose()).norm() > 1e-14 * a->norm()) {
      throw Error(ErrorCode::NotSymmetric, "anti-plane modulus is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(*a);
    if (es.eigenvalues()(0) <= 0.0) throw Error(ErrorCode::NonSPDModulus, "anti-plane modulus is not SPD");
  }
  if (w1 < 0.0 || w2 < 0.0) throw Error(ErrorCode::InvalidArgument, "energy offsets must be >= 0");
}

RelaxedEval eval_scalar3d(double d, const Eigen::Vector2d& f, const AntiPlaneParams& p) {
  require_fraction(d);
  const double d1 = d;
  const double d2 = 1.0 - d;
  const Eigen::Matrix2d a = d2 * p.alpha1 + d1 * p.alpha2;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a);
  if (es.eigenvalues()(1) > kMaxCondition * es.eigenvalues()(0)) {
    throw Error(ErrorCode::SingularAlpha, "averaged anti-plane modulus is singular");
  }
  const Eigen::Vector2d c = p.alpha2 * p.f2 - p.alpha1 * p.f1;
  const Eigen::LDLT<Eigen::Matrix2d> ldlt(a);
  Eigen::Vector2d g1 = ldlt.solve(p.alpha2 * f - d2 * c);
  Eigen::Vector2d g2 = ldlt.solve(p.alpha1 * f + d1 * c);
  if (d1 == 1.0) g1 = f;
  if (d2 == 1.0) g2 = f;
  const Eigen::Vector2d r1 = g1 - p.f1;
  const Eigen::Vector2d r2 = g2 - p.f2;
  const double w1 = 0.5 * r1.dot(p.alpha1 * r1) + p.w1;
  const double w2 = 0.5 * r2.dot(p.alpha2 * r2) + p.w2;
  const Eigen::Vector2d sigma = d1 * (p.alpha1 * r1) + d2 * (p.alpha2 * r2);

  RelaxedEval out;
  out.regime = Regime::One;
  out.value = d1 * w1 + d2 * w2;
  out.eps1_star = g1;
  out.eps2_star = g2;
  out.d_eps = sigma;
  out.d_d = w1 - w2 + sigma.dot(g2 - g1);
  return out;
}

Eigen::Matrix2d effective_tangent_scalar3d(double d, const AntiPlaneParams& p) {
  const double d1 = d;
  const double d2 = 1.0 - d;
  const Eigen::Matrix2d da = p.alpha1 - p.alpha2;
  const Eigen::Matrix2d a = d2 * p.alpha1 + d1 * p.alpha2;
  Eigen::Matrix2d c = d1 * p.alpha1 + d2 * p.alpha2 - d1 * d2 * da * a.ldlt().solve(da);
  return 0.5 * (c + c.transpose());
}

RelaxedEnergy RelaxedEnergy::one_d(const PhaseParams& p) {
  if (p.dim() != 1) throw Error(ErrorCode::DimMismatch, "one_d needs dim 1 data");
  p.validate();
  RelaxedEnergy w;
  w.kind_ = EnergyKind::OneD;
  w.phases_ = p;
  return w;
}

RelaxedEnergy RelaxedEnergy::two_d(const PhaseParams& p, const RelaxedOptions& opt) {
  require_dim2(p);
  p.validate();
  RelaxedEnergy w;
  w.kind_ = EnergyKind::TwoD;
  w.phases_ = p;
  w.opt_ = opt;
  return w;
}

RelaxedEnergy RelaxedEnergy::anti_plane(const AntiPlaneParams& p) {
  p.validate();
  RelaxedEnergy w;
  w.kind_ = EnergyKind::AntiPlane;
  w.anti_ = p;
  return w;
}

int RelaxedEnergy::strain_size() const {
  switch (kind_) {
    case EnergyKind::OneD: return 1;
    case EnergyKind::TwoD: return 3;
    case EnergyKind::AntiPlane: return 2;
  }
  return 0;
}

RelaxedEval RelaxedEnergy::eval(double d, const Vec& e) const {
  if (e.size() != strain_size()) throw Error(ErrorCode::DimMismatch, "strain size does not match energy");
  switch (kind_) {
    case EnergyKind::OneD: return eval_1d(d, e(0), phases_);
    case EnergyKind::TwoD: return eval_2d(d, SymTensor(2, e), phases_, opt_);
    case EnergyKind::AntiPlane: return eval_scalar3d(d, Eigen::Vector2d(e(0), e(1)), anti_);
  }
  return {};
}

RelaxedEval RelaxedEnergy::eval_frozen(double d, const Vec& e, double beta) const {
  if (kind_ != EnergyKind::TwoD) return eval(d, e);
  RelaxedEval r = eval_2d_fixed_beta(d, SymTensor(2, e), phases_, beta, true);
  return r;
}

Mat RelaxedEnergy::tangent(double d, double beta) const {
  switch (kind_) {
    case EnergyKind::OneD: {
      const double a1 = phases_.alpha1.mandel()(0, 0);
      const double a2 = phases_.alpha2.mandel()(0, 0);
      return Mat::Constant(1, 1, a1 * a2 / ((1.0 - d) * a1 + d * a2));
    }
    case EnergyKind::TwoD: return effective_tangent(d, beta, phases_);
    case EnergyKind::AntiPlane: return effective_tangent_scalar3d(d, anti_);
  }
  return {};
}

namespace {

struct Hermite {
  double h00, h10, h01, h11;
  double g00, g10, g01, g11;  // derivatives in s
};

Hermite hermite(double s) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return {2 * s3 - 3 * s2 + 1, s3 - 2 * s2 + s, -2 * s3 + 3 * s2, s3 - s2,
          6 * s2 - 6 * s,      3 * s2 - 4 * s + 1, -6 * s2 + 6 * s, 3 * s2 - 2 * s};
}

// Central differences of d_d in each strain coordinate.
Vec mixed_derivative(double d, const Vec& e, const RelaxedEnergy& w) {
  Vec g(e.size());
  const double h = 1e-6 * (1.0 + e.norm());
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    Vec ep = e;
    Vec em = e;
    ep(k) += h;
    em(k) -= h;
    g(k) = (w.eval(d, ep).d_d - w.eval(d, em).d_d) / (2.0 * h);
  }
  return g;
}

}  // namespace

RelaxedEval eval_extended(double d, const Vec& e, const RelaxedEnergy& w) {
  if (d >= 0.0 && d <= 1.0) return w.eval(d, e);
  if (d <= -1.0 || d >= 2.0) {
    const bool low = d <= -1.0;
    RelaxedEval r = w.eval(low ? 0.0 : 1.0, e);
    r.value += low ? 1.0 - d : d - 1.0;
    r.d_d = low ? -1.0 : 1.0;
    r.dbeta_dd = 0.0;
    return r;
  }
  const bool low = d < 0.0;
  const double anchor = low ? 0.0 : 1.0;
  RelaxedEval r = w.eval(anchor, e);
  const Vec cross = mixed_derivative(anchor, e, w);
  const Hermite h = hermite(low ? d + 1.0 : d - 1.0);
  const double wa = r.value;
  const double sa = r.d_d;
  const Vec sigma = r.d_eps;
  if (low) {
    // s = 0 at d = -1 (value wa + 2, slope -1), s = 1 at d = 0 (wa, sa)
    r.value = h.h00 * (wa + 2.0) - h.h10 + h.h01 * wa + h.h11 * sa;
    r.d_d = h.g00 * (wa + 2.0) - h.g10 + h.g01 * wa + h.g11 * sa;
    r.d_eps = (h.h00 + h.h01) * sigma + h.h11 * cross;
  } else {
    // s = 0 at d = 1 (wa, sa), s = 1 at d = 2 (wa + 1, slope 1)
    r.value = h.h00 * wa + h.h10 * sa + h.h01 * (wa + 1.0) + h.h11;
    r.d_d = h.g00 * wa + h.g10 * sa + h.g01 * (wa + 1.0) + h.g11;
    r.d_eps = (h.h00 + h.h01) * sigma + h.h10 * cross;
  }
  r.dbeta_dd = 0.0;
  return r;
}

ProbeReport assumption_A_probe(const EnergyFn& w, const ProbeConfig& cfg) {
  Rng rng(cfg.seed);
  ProbeReport rep;
  rep.c1_hat = std::numeric_limits<double>::infinity();
  rep.C1_hat = 0.0;
  const double rad = cfg.strain_radius;
  for (std::size_t i = 0; i < cfg.samples; ++i) {
    const double d = rng.uniform(cfg.d_lo, cfg.d_hi);
    Vec e1(cfg.strain_size);
    Vec e2(cfg.strain_size);
    for (int k = 0; k < cfg.strain_size; ++k) e1(k) = rng.uniform(-rad, rad);
    for (int k = 0; k < cfg.strain_size; ++k) e2(k) = rng.uniform(-rad, rad);
    const EnergyEval f1 = w(d, e1);
    const EnergyEval f2 = w(d, e2);
    const Vec de = e2 - e1;
    const double n2 = de.squaredNorm();
    if (n2 > 0.0) rep.c1_hat = std::min(rep.c1_hat, (f2.d_eps - f1.d_eps).dot(de) / n2);
    for (int j = 0; j < 2; ++j) {
      const EnergyEval& f = j == 0 ? f1 : f2;
      const Vec& e = j == 0 ? e1 : e2;
      const double quad = d * d + e.squaredNorm() + 1.0;
      const double lin = std::abs(d) + e.norm() + 1.0;
      rep.C1_hat = std::max({rep.C1_hat, std::abs(f.value) / quad, std::abs(f.d_d) / quad,
                             f.d_eps.norm() / lin});
    }
    ++rep.samples;
  }
  rep.pass = rep.c1_hat > 0.0 && std::isfinite(rep.C1_hat);
  return rep;
}

}  // namespace microlax
