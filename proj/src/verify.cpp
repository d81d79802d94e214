#include "microlax/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "microlax/field_solver.hpp"
#include "microlax/oracle.hpp"
#include "microlax/relaxed_energy.hpp"
#include "microlax/rng.hpp"
#include "microlax/simulation.hpp"

namespace microlax::verify {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Recorder {
  const Options& opt;
  std::string suite;
  std::vector<Check> out;

  void upper(const std::string& name, double measured, double threshold, const std::string& detail = "",
             double seconds = 0.0, bool overridable = true) {
    Check c{suite, name, measured, threshold, true, false, detail, seconds};
    if (overridable && opt.tol) c.threshold = *opt.tol;
    c.pass = std::isfinite(measured) && measured <= c.threshold;
    out.push_back(c);
  }
  void lower(const std::string& name, double measured, double threshold, const std::string& detail = "",
             double seconds = 0.0) {
    Check c{suite, name, measured, threshold, false, false, detail, seconds};
    c.pass = std::isfinite(measured) && measured >= threshold;
    out.push_back(c);
  }
  void runtime(const std::string& name, double seconds, double limit) {
    upper(name, seconds, limit, "wall seconds", seconds, false);
  }
};

// ---------------------------------------------------------------- instances

PhaseParams scalar_phases(double a1, double a2, double t1, double t2, double w1, double w2) {
  PhaseParams p;
  p.alpha1 = ElasticModulus::scalar(a1);
  p.alpha2 = ElasticModulus::scalar(a2);
  p.eps_t1 = SymTensor::scalar(t1);
  p.eps_t2 = SymTensor::scalar(t2);
  p.w1 = w1;
  p.w2 = w2;
  p.sigma_ext = SymTensor::scalar(0.0);
  return p;
}

PhaseParams planar(const ElasticModulus& a1, const ElasticModulus& a2, const SymTensor& t1, const SymTensor& t2,
                   double w1 = 0.0, double w2 = 0.0) {
  PhaseParams p;
  p.alpha1 = a1;
  p.alpha2 = a2;
  p.eps_t1 = t1;
  p.eps_t2 = t2;
  p.w1 = w1;
  p.w2 = w2;
  p.sigma_ext = SymTensor(2);
  return p;
}

SymTensor random_sym(Rng& rng, double r) {
  return SymTensor::from_components(rng.uniform(-r, r), rng.uniform(-r, r), rng.uniform(-r, r));
}

ElasticModulus random_cubic(Rng& rng) {
  const double c12 = rng.uniform(0.0, 2.0);
  const double c11 = c12 + rng.uniform(0.5, 3.0);
  return ElasticModulus::cubic(c11, c12, rng.uniform(0.3, 2.0));
}

ElasticModulus random_anisotropic(Rng& rng) {
  Mat b(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) b(i, j) = rng.uniform(-1, 1);
  return ElasticModulus::from_mandel(b * b.transpose() + 0.5 * Mat::Identity(3, 3));
}

Eigen::Matrix2d random_spd2(Rng& rng) {
  Eigen::Matrix2d b;
  b << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
  return b * b.transpose() + 0.3 * Eigen::Matrix2d::Identity();
}

AntiPlaneParams random_anti(Rng& rng) {
  AntiPlaneParams a;
  a.alpha1 = random_spd2(rng);
  a.alpha2 = random_spd2(rng);
  a.f1 = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  a.f2 = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  a.w1 = rng.uniform(0, 1);
  a.w2 = rng.uniform(0, 1);
  return a;
}

bool away_from_boundary(double d, const SymTensor& e, const PhaseParams& p) {
  const double g = gamma_star(p).value;
  return std::abs(phi(0.0, d, e, p)) > 1e-8 && std::abs(phi(g * (1 - 1e-8), d, e, p)) > 1e-8;
}

// ------------------------------------------------------------------- suites

// eval_1d against the brute-force strain scan
void suite_oracle1d(Recorder& r) {
  const auto t0 = Clock::now();
  Rng rng(r.opt.seed);
  double worst = 0.0;
  const int n = 1000;
  for (int k = 0; k < n; ++k) {
    const double a1 = rng.uniform(0.1, 10), a2 = rng.uniform(0.1, 10);
    const double w1 = rng.uniform(0.1, 10), w2 = rng.uniform(0.1, 10);
    const double t1 = rng.uniform(-5, 5), t2 = rng.uniform(-5, 5);
    const PhaseParams p = scalar_phases(a1, a2, t1, t2, w1, w2);
    const double e = rng.uniform(-5, 5);
    const double d = rng.uniform(0, 1);
    const double w = eval_1d(d, e, p).value;
    const double o = oracle::scan_1d(d, e, p);
    worst = std::max(worst, std::abs(w - o) / std::max(std::abs(o), 1e-300));
  }
  const double secs = since(t0);
  r.upper("1D closed form vs strain scan, max relative error", worst, 1e-6, std::to_string(n) + " instances", secs);
  r.runtime("1D oracle runtime", secs, 10.0);
  const RelaxedEval we = eval_1d(0.5, 0.5, scalar_phases(1, 2, 0, 1, 0, 0));
  r.upper("1D worked instance value", std::abs(we.value), 1e-15);
}

// eval_2d against rank-1 laminates (Regimes I/II) and rank-2 laminates (III)
void suite_oracle2d(Recorder& r) {
  const auto t0 = Clock::now();
  Rng rng(r.opt.seed + 2);
  const int fractions = 200;
  oracle::LaminateSearchOptions rank1;
  rank1.angles = 720;
  rank1.rank2 = false;
  int n1 = 0, n2 = 0, points = 0, pts_two = 0;
  double worst12 = 0.0;
  while (n1 + n2 < 100) {
    const PhaseParams p = planar(random_cubic(rng), random_cubic(rng), SymTensor(2), random_sym(rng, 0.1));
    const SymTensor e = random_sym(rng, 0.1);
    const Regime mid = classify_regime(0.5, e, p).regime;
    if (mid == Regime::One && n1 < 50) {
      ++n1;
    } else if (mid == Regime::Two && n2 < 50) {
      ++n2;
    } else {
      continue;
    }
    for (int k = 0; k < fractions; ++k) {
      const double d = (k + 0.5) / fractions;
      const RelaxedEval w = eval_2d(d, e, p);
      if (w.regime == Regime::Three) continue;
      const double o = oracle::laminate_search_2d(d, e, p, rank1).best;
      worst12 = std::max(worst12, std::abs(o - w.value) / std::abs(w.value));
      ++points;
      pts_two += w.regime == Regime::Two;
    }
  }
  r.upper("2D Regimes I/II vs rank-1 laminates, max relative error", worst12, 1e-3,
          "100 instances x 200 fractions, 720 angles; " + std::to_string(points) + " points, " +
              std::to_string(pts_two) + " in Regime II",
          since(t0));

  const auto t1 = Clock::now();
  oracle::LaminateSearchOptions rank2;
  rank2.angles = 720;
  double worst3 = 0.0;
  int n3 = 0;
  while (n3 < 20) {
    // near-dilatational misfit drives Regime III
    const double s = rng.uniform(0.05, 0.2);
    const SymTensor t2 = SymTensor::from_components(s, s, 0.0) + random_sym(rng, 0.2 * s);
    const PhaseParams p = planar(random_cubic(rng), random_cubic(rng), SymTensor(2), t2);
    const SymTensor e = random_sym(rng, 0.1);
    const double d = rng.uniform(0.2, 0.8);
    const RelaxedEval w = eval_2d(d, e, p);
    if (w.regime != Regime::Three) continue;
    ++n3;
    const double o = oracle::laminate_search_2d(d, e, p, rank2).best;
    worst3 = std::max(worst3, std::abs(o - w.value) / std::abs(w.value));
  }
  r.upper("2D Regime III vs rank-2 laminates, max relative error", worst3, 1e-2, "20 instances", since(t1));
  r.runtime("2D oracle runtime", since(t0), 300.0);
}

// discrete cell problem above the relaxed energy, gap shrinking with n
void suite_cell(Recorder& r) {
  const auto t0 = Clock::now();
  Rng rng(r.opt.seed + 3);
  double worst32 = 0.0, worst_ratio = 0.0, lowest = INFINITY;
  std::ostringstream gaps;
  int inst = 0, skipped = 0;
  while (inst < 10) {
    // equal moduli and a misfit compatible with the normal e1
    const ElasticModulus a = ElasticModulus::cubic(3 + rng.uniform(0, 1), 1, 1 + rng.uniform(0, 1));
    const SymTensor t2 = SymTensor::from_components(rng.uniform(-0.1, 0.1), 0.0, rng.uniform(0.05, 0.2));
    const PhaseParams p = planar(a, a, SymTensor(2), t2);
    const SymTensor e = random_sym(rng, 0.1);
    const double d = rng.uniform(0.3, 0.7);
    const RelaxedEval w = eval_2d(d, e, p);
    if (w.regime != Regime::One) continue;
    // the relative gap is only meaningful when W-hat is not a near-cancellation
    const double voigt = d * w_micro(1, e, p) + (1 - d) * w_micro(2, e, p);
    if (w.value < 0.5 * voigt) {
      ++skipped;
      continue;
    }
    ++inst;
    double gap[2];
    const int sizes[2] = {32, 48};
    for (int s = 0; s < 2; ++s) {
      const int n = sizes[s];
      double best = INFINITY;
      int best_m = 1;
      for (int m = 1; m <= n / 2; ++m) {
        const double en = oracle::cell_problem_min(oracle::make_laminate_cell(n, d, e, m, true), p).energy;
        if (en < best) {
          best = en;
          best_m = m;
        }
      }
      oracle::CellOptions co;
      co.anneal_moves = 20;
      co.seed = r.opt.seed;
      best = std::min(best, oracle::cell_problem_min(oracle::make_laminate_cell(n, d, e, best_m, true), p, co).energy);
      gap[s] = (best - w.value) / w.value;
      lowest = std::min(lowest, gap[s]);
    }
    worst32 = std::max(worst32, gap[0]);
    worst_ratio = std::max(worst_ratio, gap[1] / gap[0]);
    gaps << (inst > 1 ? " " : "") << gap[0] << "/" << gap[1];
  }
  r.upper("cell problem n=32 relative gap above the relaxed energy", worst32, 0.05, "gaps n32/n48: " + gaps.str() + "; skipped " + std::to_string(skipped) + " instances with W-hat < Voigt/2",
          since(t0));
  r.upper("cell problem gap ratio n=48 / n=32", worst_ratio, 1.0 - 1e-12);
  r.lower("cell problem never below the relaxed energy (min relative gap)", lowest, -1e-9);
}

// analytic derivatives against central differences
void suite_fd(Recorder& r) {
  const auto t0 = Clock::now();
  Rng rng(r.opt.seed + 4);
  const double h = 1e-5;
  std::map<std::string, double> worst;
  std::map<std::string, int> count;
  auto record = [&](const std::string& key, const oracle::FdReport& f) {
    worst[key] = std::max(worst[key], f.max_rel_error);
    ++count[key];
  };
  while (count["1D"] < 100) {
    const PhaseParams p = scalar_phases(rng.uniform(0.1, 10), rng.uniform(0.1, 10), rng.uniform(-2, 2),
                                        rng.uniform(-2, 2), rng.uniform(0, 1), rng.uniform(0, 1));
    const EnergyFn w = [p](double d, const Vec& e) { return to_energy_eval(eval_1d(d, e(0), p)); };
    record("1D", oracle::fd_check(w, rng.uniform(0.02, 0.98), Vec::Constant(1, rng.uniform(-2, 2)), h));
  }
  int guard = 0;
  while ((count["2D Regime I"] < 100 || count["2D Regime II"] < 100 || count["2D Regime III"] < 100) &&
         ++guard < 200000) {
    // half of the Regime I points use non-commuting moduli
    const bool aniso = rng.uniform() < 0.5;
    const PhaseParams p = aniso ? planar(random_anisotropic(rng), random_anisotropic(rng), random_sym(rng, 1),
                                         random_sym(rng, 1), rng.uniform(0, 0.5), rng.uniform(0, 0.5))
                                : planar(random_cubic(rng), random_cubic(rng), random_sym(rng, 1),
                                         random_sym(rng, 1), rng.uniform(0, 0.5), rng.uniform(0, 0.5));
    const SymTensor e = random_sym(rng, 1);
    const double d = rng.uniform(0.02, 0.98);
    if (!away_from_boundary(d, e, p)) continue;
    const Regime reg = classify_regime(d, e, p).regime;
    if (aniso && reg != Regime::One) continue;
    const std::string key = std::string("2D Regime ") + regime_name(reg);
    if (reg == Regime::Zero || count[key] >= 100) continue;
    const EnergyFn w = [p](double dd, const Vec& x) { return to_energy_eval(eval_2d(dd, SymTensor(2, x), p)); };
    record(key, oracle::fd_check(w, d, e.mandel(), h));
  }
  // zero misfit: phi vanishes identically, so these points bypass the screen
  while (count["2D Regime 0"] < 20) {
    const ElasticModulus a = random_anisotropic(rng);
    const SymTensor t = random_sym(rng, 1);
    const PhaseParams p = planar(a, a, t, t, rng.uniform(0, 0.5), rng.uniform(0, 0.5));
    const EnergyFn w = [p](double dd, const Vec& x) { return to_energy_eval(eval_2d(dd, SymTensor(2, x), p)); };
    record("2D Regime 0", oracle::fd_check(w, rng.uniform(0.02, 0.98), random_sym(rng, 1).mandel(), h));
  }
  while (count["anti-plane"] < 100) {
    const AntiPlaneParams a = random_anti(rng);
    const EnergyFn w = [a](double d, const Vec& x) {
      return to_energy_eval(eval_scalar3d(d, Eigen::Vector2d(x(0), x(1)), a));
    };
    Vec f(2);
    f << rng.uniform(-1, 1), rng.uniform(-1, 1);
    record("anti-plane", oracle::fd_check(w, rng.uniform(0.02, 0.98), f, h));
  }
  const double secs = since(t0);
  int total = 0;
  for (const auto& [key, n] : count) total += n;
  for (const auto& [key, n] : count) {
    const double tol = key == "2D Regime II" ? 1e-5 : 1e-6;
    r.upper("finite differences " + key + ", max relative error", worst[key], tol, std::to_string(n) + " points",
            secs);
  }
  r.lower("finite difference points checked", total, 500);
}

// strong monotonicity and growth
void suite_probe(Recorder& r) {
  const auto t0 = Clock::now();
  ProbeConfig cfg;
  cfg.samples = 10000;
  cfg.seed = r.opt.seed;

  LinearTheoryParams lin;
  lin.stiffness = ElasticModulus::cubic(3, 1, 1);
  lin.eps_bar = SymTensor::from_components(0.1, -0.05, 0.02);
  const PhaseParams p1 = scalar_phases(1, 2, 0, 1, 0, 0);
  const PhaseParams p2 = planar(ElasticModulus::cubic(3, 1, 1), ElasticModulus::cubic(4, 1.5, 1.2),
                                SymTensor::from_components(0.0, 0.0, 0.0), SymTensor::from_components(0.1, 0.05, 0.03),
                                0.1, 0.0);
  AntiPlaneParams anti;
  anti.alpha1 << 2.0, 0.3, 0.3, 1.0;
  anti.alpha2 << 1.0, -0.2, -0.2, 1.5;
  anti.f2 = {0.2, -0.1};

  struct Case {
    std::string name;
    EnergyFn w;
    int size;
  };
  const std::vector<Case> cases = {
      {"W_lin", [&](double d, const Vec& e) { return w_lin(d, SymTensor(2, e), lin); }, 3},
      {"1D relaxed", [&](double d, const Vec& e) { return to_energy_eval(eval_1d(d, e(0), p1)); }, 1},
      {"2D relaxed (cubic)", [&](double d, const Vec& e) { return to_energy_eval(eval_2d(d, SymTensor(2, e), p2)); },
       3},
      {"anti-plane",
       [&](double d, const Vec& e) { return to_energy_eval(eval_scalar3d(d, Eigen::Vector2d(e(0), e(1)), anti)); },
       2},
  };
  for (const Case& c : cases) {
    cfg.strain_size = c.size;
    const auto tc = Clock::now();
    const ProbeReport rep = assumption_A_probe(c.w, cfg);
    std::ostringstream det;
    det << "c1_hat=" << rep.c1_hat << " C1_hat=" << rep.C1_hat << " samples=" << rep.samples;
    r.lower("monotonicity constant " + c.name, rep.c1_hat, 1e-300, det.str(), since(tc));
    r.upper("growth constant " + c.name, rep.C1_hat, 1e300, det.str(), 0.0, false);
    if (c.name == "1D relaxed") {
      // the minimum over d of a1 a2 / ((1 - d) a1 + d a2) is 1 at d = 1
      r.upper("1D monotonicity deficit 1 - c1_hat", 1.0 - rep.c1_hat, 1e-9, det.str());
    }
  }
  (void)t0;
}

// the closed-form regime instances
void suite_regimes(Recorder& r) {
  const ElasticModulus id = ElasticModulus::identity(2);
  const SymTensor zero(2);
  const Classification c1 = classify_regime(0.5, zero, planar(id, id, zero, SymTensor::from_components(1, -1, 0)));
  const Classification c2 = classify_regime(0.5, zero, planar(id, id, zero, SymTensor::from_components(2, 1, 0)));
  const Classification c3 = classify_regime(0.5, zero, planar(id, id, zero, SymTensor::identity(2)));
  r.upper("diag(1,-1) misfit classified as Regime I", c1.regime == Regime::One ? std::abs(c1.beta_star) : 1.0, 0.0,
          regime_name(c1.regime));
  r.upper("diag(2,1) misfit classified as Regime II, |beta - 0.5|", c2.regime == Regime::Two ? std::abs(c2.beta_star - 0.5) : 1.0,
          1e-10, regime_name(c2.regime));
  r.upper("identity misfit classified as Regime III, |beta - gamma*|",
          c3.regime == Regime::Three ? std::abs(c3.beta_star - c3.gamma) + std::abs(c3.gamma - 1.0) : 1.0, 0.0,
          regime_name(c3.regime));
}

// anti-plane evaluator against the planar machinery at beta = 0
void suite_reduction(Recorder& r) {
  Rng rng(r.opt.seed + 7);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const AntiPlaneParams a = random_anti(rng);
    auto embed = [](const Eigen::Matrix2d& m) {
      Mat x = Mat::Zero(3, 3);
      x.topLeftCorner(2, 2) = m;
      x(2, 2) = 1.0;
      return ElasticModulus::from_mandel(x);
    };
    auto vec3 = [](const Eigen::Vector2d& v) {
      Vec x(3);
      x << v(0), v(1), 0.0;
      return SymTensor(2, x);
    };
    const PhaseParams p = planar(embed(a.alpha1), embed(a.alpha2), vec3(a.f1), vec3(a.f2), a.w1, a.w2);
    const Eigen::Vector2d f(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double d = rng.uniform(0, 1);
    const RelaxedEval s = eval_scalar3d(d, f, a);
    const RelaxedEval q = eval_2d_fixed_beta(d, vec3(f), p, 0.0);
    auto rel = [](double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); };
    worst = std::max({worst, rel(s.value, q.value), rel(s.d_d, q.d_d), rel(s.d_eps(0), q.d_eps(0)),
                      rel(s.d_eps(1), q.d_eps(1))});
  }
  r.upper("anti-plane vs planar beta = 0, max relative difference", worst, 1e-12, "1000 instances");
}

SimConfig spinodal_config() {
  SimConfig c;
  c.variant = Variant::Relaxed;
  c.grid.dim = 1;
  c.grid.nx = 256;
  c.grid.lx = 1.0;
  c.chem.theta = 0.5;
  c.chem.kappa1 = 2.0;
  c.chem.kappa2 = 0.1;
  c.chem.lambda = 1e-3;
  c.phases.alpha1 = ElasticModulus::scalar(1.0);
  c.phases.alpha2 = ElasticModulus::scalar(2.0);
  c.phases.eps_t1 = SymTensor::scalar(0.0);
  c.phases.eps_t2 = SymTensor::scalar(1.0);
  c.phases.sigma_ext = SymTensor::scalar(0.2);
  c.dt = 1e-4;
  c.t_end = 1e9;
  c.a0 = 0.5;
  c.b0 = 0.0;
  c.deterministic = true;
  return c;
}

// long 1D spinodal run
void suite_dynamics(Recorder& r) {
  const auto t0 = Clock::now();
  SimConfig c = spinodal_config();
  c.seed = r.opt.seed;
  const FieldSolver fs(c);
  SimState s = fs.initial_state();
  const double m0 = fs.mass(s.a);
  double max_inc = -INFINITY, max_res = s.elastic_residual, max_drift = 0.0;
  int halvings = 0;
  const long steps = 10000;
  for (long k = 0; k < steps; ++k) {
    const StepReport rep = fs.step(s);
    halvings += rep.halvings;
    max_inc = std::max(max_inc, (rep.energy_after - rep.energy_before) / (1.0 + std::abs(rep.energy_before)));
    max_res = std::max(max_res, s.elastic_residual);
    max_drift = std::max(max_drift, std::abs(fs.mass(s.a) - m0) / std::abs(m0));
  }
  const double secs = since(t0);
  const Diagnostics d = fs.diagnostics(s);
  std::ostringstream det;
  det << steps << " accepted steps, " << halvings << " halvings, t=" << s.time << ", F=" << d.energy;
  r.upper("spinodal mass drift (relative)", max_drift, 1e-9, det.str(), secs);
  r.upper("spinodal per-step energy increase / (1 + |F|)", max_inc, 1e-9, det.str());
  r.upper("spinodal max elastic residual", max_res, 1e-9, det.str());
  r.runtime("spinodal runtime (serial kernels)", secs, 60.0);
}

SimConfig smooth_1d_config(Stepper st, double dt) {
  SimConfig c = spinodal_config();
  c.grid.nx = 32;
  c.chem.lambda = 2e-2;
  c.chem.kappa1 = 1.0;
  c.stepper = st;
  c.dt = dt;
  c.tol_mm = 1e-11;
  c.max_halvings = 0;
  return c;
}

void smooth_fields(const Grid& g, Field& a, Field& b) {
  a.resize(g.cells());
  b.resize(g.cells());
  for (int i = 0; i < g.nx; ++i) {
    const double x = (i + 0.5) * g.hx();
    a[i] = 0.5 + 0.2 * std::cos(M_PI * x / g.lx);
    b[i] = 0.05 * std::cos(2.0 * M_PI * x / g.lx);
  }
}

// minimizing movement: descent of F^{m,h} and consistency with semi-implicit
void suite_mm(Recorder& r) {
  const auto t0 = Clock::now();
  {
    SimConfig c = smooth_1d_config(Stepper::MinimizingMovement, 1e-2);
    c.grid.nx = 48;
    c.chem.lambda = 1e-2;
    c.max_halvings = 20;
    const FieldSolver fs(c);
    Field a, b;
    smooth_fields(c.grid, a, b);
    SimState s = fs.make_state(a, b);
    double worst = -INFINITY;
    for (int k = 0; k < 20; ++k) {
      const Field a_old = s.a, b_old = s.b;
      const double before = fs.mm_objective(s, a_old, b_old, s.dt);
      const StepReport rep = fs.step(s);
      const double after = fs.mm_objective(s, a_old, b_old, rep.dt_used);
      worst = std::max(worst, (after - before) / (1.0 + std::abs(before)));
    }
    r.lower("minimizing movement: min decrease of F^{m,h} per step", -worst, 1e-300,
            "20 steps; strict decrease required", since(t0));
  }
  const double dt0 = 4e-3;
  const double t_final = 10 * dt0;
  std::vector<double> diff;
  for (double dt : {dt0, dt0 / 2, dt0 / 4}) {
    Field out[2];
    int idx = 0;
    for (Stepper st : {Stepper::SemiImplicit, Stepper::MinimizingMovement}) {
      SimConfig c = smooth_1d_config(st, dt);
      c.t_end = t_final;
      const FieldSolver fs(c);
      Field a, b;
      smooth_fields(c.grid, a, b);
      SimState s = fs.make_state(a, b);
      while (s.time < t_final * (1 - 1e-12)) fs.step(s);
      out[idx] = s.a;
      out[idx].insert(out[idx].end(), s.b.begin(), s.b.end());
      ++idx;
    }
    double m = 0.0;
    for (std::size_t i = 0; i < out[0].size(); ++i) m = std::max(m, std::abs(out[0][i] - out[1][i]));
    diff.push_back(m);
  }
  const double order = std::min(std::log2(diff[0] / diff[1]), std::log2(diff[1] / diff[2]));
  std::ostringstream det;
  det << "differences " << diff[0] << " " << diff[1] << " " << diff[2];
  r.lower("minimizing movement vs semi-implicit observed order in dt", order, 0.9, det.str(), since(t0));
}

// C^1 extension to all d
void suite_extension(Recorder& r) {
  AntiPlaneParams anti;
  anti.alpha1 << 2.0, 0.3, 0.3, 1.0;
  anti.alpha2 << 1.0, -0.2, -0.2, 1.5;
  anti.f2 = {0.2, -0.1};
  const PhaseParams p2 = planar(ElasticModulus::cubic(3, 1, 1), ElasticModulus::cubic(4, 1.5, 1.2), SymTensor(2),
                                SymTensor::from_components(0.1, 0.05, 0.03), 0.1, 0.0);
  struct Case {
    std::string name;
    RelaxedEnergy w;
    Vec e;
  };
  Vec e1 = Vec::Constant(1, 0.3);
  Vec e2(3);
  e2 << 0.02, -0.01, 0.04;
  Vec e3(2);
  e3 << 0.3, -0.2;
  const std::vector<Case> cases = {{"1D", RelaxedEnergy::one_d(scalar_phases(1, 2, 0, 1, 0, 0)), e1},
                                   {"2D", RelaxedEnergy::two_d(p2), e2},
                                   {"anti-plane", RelaxedEnergy::anti_plane(anti), e3}};
  double seam = 0.0, jump = 0.0, growth = 0.0;
  const double h = 1e-4;
  for (const Case& c : cases) {
    auto f = [&](double x) { return eval_extended(x, c.e, c.w).value; };
    for (double s : {-1.0, 0.0, 1.0, 2.0}) {
      // second-order one-sided differences
      const double left = (3 * f(s) - 4 * f(s - h) + f(s - 2 * h)) / (2 * h);
      const double right = (-3 * f(s) + 4 * f(s + h) - f(s + 2 * h)) / (2 * h);
      seam = std::max(seam, std::abs(left - right) / std::max(1.0, std::abs(left)));
      jump = std::max(jump, std::abs(f(std::nextafter(s, -INFINITY)) - f(std::nextafter(s, INFINITY))));
    }
    const double w0 = c.w.eval(0.0, c.e).value;
    const double w1 = c.w.eval(1.0, c.e).value;
    growth = std::max(growth, std::abs(f(-2.0) - (w0 + 3.0)) / (w0 + 3.0));
    growth = std::max(growth, std::abs(f(3.0) - (w1 + 2.0)) / (w1 + 2.0));
  }
  r.upper("extension one-sided d-derivatives agree at seams -1, 0, 1, 2", seam, 1e-6);
  r.upper("extension value jump at seams", jump, 1e-12);
  r.upper("extension linear growth at d = -2 and d = 3 (relative)", growth, 1e-15);
}

std::map<std::string, std::string> read_outputs(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().filename() == "manifest.ini") continue;  // wall-clock stamps
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    files[entry.path().filename().string()] = ss.str();
  }
  return files;
}

// repeated deterministic runs are byte-identical
void suite_determinism(Recorder& r) {
  const auto t0 = Clock::now();
  namespace fs = std::filesystem;
  SimConfig c1 = spinodal_config();
  c1.max_steps = 200;
  c1.snapshot_every = 100;
  c1.seed = r.opt.seed;
  SimConfig c2;
  c2.variant = Variant::Relaxed;
  c2.grid.dim = 2;
  c2.grid.nx = c2.grid.ny = 12;
  c2.phases = planar(ElasticModulus::cubic(3, 1, 1), ElasticModulus::cubic(4, 1, 2), SymTensor(2),
                     SymTensor::from_components(0.05, -0.03, 0.02));
  c2.phases.sigma_ext = SymTensor::from_components(0.02, 0.0, 0.01);
  c2.chem.lambda = 1e-2;
  c2.dt = 1e-2;
  c2.noise = 5e-2;
  c2.noise_b = 1e-2;
  c2.max_steps = 10;
  c2.t_end = 1e9;
  c2.snapshot_every = 5;
  c2.vtk = true;
  c2.deterministic = true;
  c2.seed = r.opt.seed;
  int compared = 0, mismatched = 0;
  int idx = 0;
  for (const SimConfig& c : {c1, c2}) {
    const fs::path base = fs::path(r.opt.work_dir) / ("determinism_" + std::to_string(idx++));
    fs::remove_all(base);
    run_simulation(c, (base / "run1").string());
    run_simulation(c, (base / "run2").string());
    const auto f1 = read_outputs(base / "run1");
    const auto f2 = read_outputs(base / "run2");
    if (f1.size() != f2.size()) ++mismatched;
    for (const auto& [name, data] : f1) {
      ++compared;
      const auto it = f2.find(name);
      if (it == f2.end() || it->second != data) ++mismatched;
    }
  }
  r.upper("deterministic reruns: mismatching output files", mismatched, 0.0,
          std::to_string(compared) + " files compared (1D and 2D runs)", since(t0), false);
}

struct SuiteDef {
  SuiteInfo info;
  std::function<void(Recorder&)> run;
};

const std::vector<SuiteDef>& registry() {
  static const std::vector<SuiteDef> defs = {
      {{"oracle1d", "1D closed form vs strain scan"}, suite_oracle1d},
      {{"oracle2d", "2D closed form vs laminate search"}, suite_oracle2d},
      {{"cell", "discrete cell problem sandwich"}, suite_cell},
      {{"fd", "derivatives vs finite differences"}, suite_fd},
      {{"probe", "monotonicity and growth probe"}, suite_probe},
      {{"regimes", "closed-form regime instances"}, suite_regimes},
      {{"reduction", "anti-plane vs planar at beta = 0"}, suite_reduction},
      {{"dynamics", "1D spinodal run audit"}, suite_dynamics},
      {{"mm", "minimizing movement stepper"}, suite_mm},
      {{"extension", "extension beyond [0, 1]"}, suite_extension},
      {{"determinism", "byte-identical deterministic runs"}, suite_determinism},
  };
  return defs;
}

}  // namespace

const std::vector<SuiteInfo>& suites() {
  static const std::vector<SuiteInfo> info = [] {
    std::vector<SuiteInfo> v;
    for (const auto& d : registry()) v.push_back(d.info);
    return v;
  }();
  return info;
}

std::vector<Check> run_suite(const std::string& name, const Options& opt) {
  for (const auto& d : registry()) {
    if (d.info.name == name) {
      Recorder r{opt, name, {}};
      d.run(r);
      return r.out;
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown suite '" + name + "'");
}

std::vector<Check> run_all(const Options& opt) {
  std::vector<Check> all;
  for (const auto& d : registry()) {
    auto part = run_suite(d.info.name, opt);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

io::CsvTable report(const std::vector<Check>& checks) {
  io::CsvTable t;
  t.header = {"suite", "check", "measured", "bound", "kind", "pass", "seconds", "detail"};
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  for (const Check& c : checks) {
    t.add({c.suite, quote(c.name), io::fmt(c.measured), io::fmt(c.threshold), c.upper ? "max" : "min",
           c.pass ? "1" : "0", io::fmt(c.seconds), quote(c.detail)});
  }
  return t;
}

}  // namespace microlax::verify
