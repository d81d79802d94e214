#include "microlax/field_solver.hpp"

#include <algorithm>
#include <cmath>

#include "microlax/kernels.hpp"
#include "microlax/rng.hpp"

namespace microlax {

void Grid::validate() const {
  if (dim != 1 && dim != 2) throw Error(ErrorCode::ConfigError, "grid dim must be 1 or 2");
  if (nx < 4 || (dim == 2 && ny < 4)) throw Error(ErrorCode::ConfigError, "need at least 4 cells per axis");
  if (!(lx > 0.0) || (dim == 2 && !(ly > 0.0))) throw Error(ErrorCode::ConfigError, "grid lengths must be positive");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Linear: return "linear";
    case Variant::Relaxed: return "relaxed";
    case Variant::Scalar3d: return "scalar3d";
  }
  return "?";
}

const char* stepper_name(Stepper s) {
  return s == Stepper::SemiImplicit ? "semi_implicit" : "minimizing_movement";
}

void SimConfig::validate() const {
  grid.validate();
  chem.validate();
  if (!(dt > 0.0)) throw Error(ErrorCode::ConfigError, "dt must be positive");
  if (!(t_end >= 0.0)) throw Error(ErrorCode::ConfigError, "t_end must be >= 0");
  if (!(mobility > 0.0)) throw Error(ErrorCode::ConfigError, "mobility must be positive");
  if (!(dt_growth >= 1.0)) throw Error(ErrorCode::ConfigError, "dt_growth must be >= 1");
  switch (variant) {
    case Variant::Linear:
      if (linear.dim() != grid.dim || linear.eps_bar.dim() != grid.dim) {
        throw Error(ErrorCode::ConfigError, "linear-theory data dimension differs from the grid");
      }
      if (phases.sigma_ext.dim() != grid.dim) throw Error(ErrorCode::ConfigError, "sigma_ext dimension differs from the grid");
      break;
    case Variant::Relaxed:
      if (phases.dim() != grid.dim) throw Error(ErrorCode::ConfigError, "phase data dimension differs from the grid");
      phases.validate();
      break;
    case Variant::Scalar3d:
      if (grid.dim != 2) throw Error(ErrorCode::ConfigError, "the scalar3d variant needs a 2D grid");
      anti.validate();
      break;
  }
}

double SimConfig::tol_elast() const {
  const double s = variant == Variant::Scalar3d ? anti.sigma_ext.norm() : phases.sigma_ext.norm();
  return tol_elast_rel * s + tol_elast_abs;
}

ElasticModel::ElasticModel(const SimConfig& cfg) : variant_(cfg.variant) {
  switch (variant_) {
    case Variant::Linear:
      linear_ = cfg.linear;
      strain_size_ = mandel_size(cfg.grid.dim);
      sigma_ext_ = cfg.phases.sigma_ext.mandel();
      break;
    case Variant::Relaxed:
      relaxed_ = cfg.grid.dim == 1 ? RelaxedEnergy::one_d(cfg.phases) : RelaxedEnergy::two_d(cfg.phases, cfg.relaxed);
      strain_size_ = relaxed_.strain_size();
      sigma_ext_ = cfg.phases.sigma_ext.mandel();
      break;
    case Variant::Scalar3d:
      relaxed_ = RelaxedEnergy::anti_plane(cfg.anti);
      strain_size_ = 2;
      sigma_ext_ = Vec(cfg.anti.sigma_ext);
      break;
  }
}

ElasticModel::Point ElasticModel::eval(double d, const Vec& e) const {
  Point p;
  if (variant_ == Variant::Linear) {
    p.w = w_lin(d, SymTensor(linear_.dim(), e), linear_);
    return p;
  }
  const RelaxedEval r = eval_extended(d, e, relaxed_);
  p.w = to_energy_eval(r);
  p.regime = static_cast<int>(r.regime);
  p.beta = r.beta_star;
  return p;
}

Mat ElasticModel::tangent(double d, double beta) const {
  if (variant_ == Variant::Linear) {
    if (linear_.stiffness_other) {
      return d * linear_.stiffness.mandel() + (1.0 - d) * linear_.stiffness_other->mandel();
    }
    return linear_.stiffness.mandel();
  }
  return relaxed_.tangent(std::clamp(d, 0.0, 1.0), beta);
}

Field laplacian_neumann(const Field& f, const Grid& g, Exec exec) {
  Field out;
  kernels::laplacian(f, out, g.nx, g.dim == 1 ? 1 : g.ny, g.hx(), g.hy(), exec);
  return out;
}

namespace {

void project_mean_zero(Field& f) {
  double m = 0.0;
  for (double v : f) m += v;
  m /= static_cast<double>(f.size());
  for (double& v : f) v -= m;
}

}  // namespace

Field green_apply(const Field& f, const Grid& g, double mobility, double cg_tol) {
  Field rhs = f;
  project_mean_zero(rhs);
  Field w(f.size(), 0.0);
  if (norm2(rhs) == 0.0) return w;
  const int ny = g.dim == 1 ? 1 : g.ny;
  auto op = [&](const Field& x, Field& y) {
    kernels::laplacian(x, y, g.nx, ny, g.hx(), g.hy(), Exec::Parallel);
    for (double& v : y) v *= -mobility;
  };
  conjugate_gradient(op, rhs, w, CgOptions{cg_tol, 0.0, 100000});
  project_mean_zero(w);
  return w;
}

FieldSolver::FieldSolver(const SimConfig& cfg)
    : cfg_((cfg.validate(), cfg)), model_(cfg), exec_(cfg.deterministic ? Exec::Serial : Exec::Parallel) {
  const Grid& g = cfg_.grid;
  if (g.dim == 2) {
    mesh_ = fem::QuadMesh{g.nx, g.ny, g.hx(), g.hy()};
    kind_ = cfg_.variant == Variant::Scalar3d ? fem::FieldKind::Scalar : fem::FieldKind::Vector;
    const int dpn = fem::dofs_per_node(kind_);
    pinned_.assign(static_cast<std::size_t>(mesh_.nodes()) * dpn, 0);
    if (kind_ == fem::FieldKind::Vector) {
      // corner fixed, rotation removed by the second bottom corner's u_y
      pinned_[2 * mesh_.node(0, 0)] = 1;
      pinned_[2 * mesh_.node(0, 0) + 1] = 1;
      pinned_[2 * mesh_.node(g.nx, 0) + 1] = 1;
    } else {
      pinned_[mesh_.node(0, 0)] = 1;
    }
    f_ext_ = fem::uniform_stress_load(mesh_, kind_, model_.sigma_ext());
  }
}

Field FieldSolver::lap(const Field& f) const { return laplacian_neumann(f, cfg_.grid, exec_); }

double FieldSolver::mass(const Field& a) const {
  double s = 0.0;
  for (double v : a) s += v;
  return s * cfg_.grid.cell_volume();
}

SimState FieldSolver::initial_state() const {
  const int n = cfg_.grid.cells();
  Field a(n), b(n);
  Rng rng(cfg_.seed);
  const double margin = 1e-6;
  for (int i = 0; i < n; ++i) {
    a[i] = cfg_.a0 + cfg_.noise * (2.0 * rng.uniform() - 1.0);
    b[i] = cfg_.b0 + cfg_.noise_b * (2.0 * rng.uniform() - 1.0);
    a[i] = std::clamp(a[i], margin, 1.0 - margin);
    const double bmax = std::max(0.0, std::min(a[i], 1.0 - a[i]) - margin);
    b[i] = std::clamp(b[i], -bmax, bmax);
  }
  return make_state(a, b);
}

SimState FieldSolver::make_state(const Field& a, const Field& b) const {
  const int n = cfg_.grid.cells();
  if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != n) {
    throw Error(ErrorCode::DimMismatch, "field size does not match the grid");
  }
  SimState s;
  s.a = a;
  s.b = b;
  s.dt = cfg_.dt;
  const int nodes = cfg_.grid.dim == 1 ? cfg_.grid.nx + 1 : mesh_.nodes() * fem::dofs_per_node(kind_);
  s.u.assign(nodes, 0.0);
  elastic_equilibrium(s);
  chemical_potential(s);
  return s;
}

void FieldSolver::elastic_equilibrium(SimState& s) const {
  const Grid& g = cfg_.grid;
  const int n = g.cells();
  s.dw_dd.assign(n, 0.0);
  s.w_el.assign(n, 0.0);
  const Vec& sig = model_.sigma_ext();
  if (g.dim == 1) {
    const double h = g.hx();
    const double sx = sig(0);
    s.regime.assign(n, 0);
    s.beta.assign(n, 0.0);
    Field eps(n), stiff(n), res(n);
    std::vector<char> failed(n, 0);
#pragma omp parallel for schedule(static) if (exec_ == Exec::Parallel)
    for (int i = 0; i < n; ++i) {
      const double d = s.a[i] + s.b[i];
      double e = (s.u[i + 1] - s.u[i]) / h;
      const double k = model_.tangent(d, 0.0)(0, 0);
      ElasticModel::Point p = model_.eval(d, Vec::Constant(1, e));
      bool ok = false;
      for (int it = 0; it < 50; ++it) {
        const double r = p.w.d_eps(0) - sx;
        const double step = r / k;
        e -= step;
        p = model_.eval(d, Vec::Constant(1, e));
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(e))) {
          ok = true;
          break;
        }
      }
      failed[i] = !ok;
      eps[i] = e;
      stiff[i] = k;
      res[i] = p.w.d_eps(0) - sx;
      s.dw_dd[i] = p.w.d_d;
      s.w_el[i] = p.w.value - e * sx;
      s.regime[i] = p.regime;
      s.beta[i] = p.beta;
    }
    if (std::find(failed.begin(), failed.end(), 1) != failed.end()) {
      throw Error(ErrorCode::NewtonDivergence, "cell equilibrium did not converge");
    }
    double r2 = 0.0;
    s.u[0] = 0.0;
    for (int i = 0; i < n; ++i) {
      r2 += h * res[i] * res[i] / stiff[i];
      s.u[i + 1] = s.u[i] + h * eps[i];
    }
    s.elastic_residual = std::sqrt(r2);
    s.elastic_iterations = 1;
    return;
  }

  auto mat = [&](int cell, int, const Vec& e) {
    const double d = s.a[cell] + s.b[cell];
    const ElasticModel::Point p = model_.eval(d, e);
    fem::PointState st;
    st.energy = p.w.value;
    st.stress = p.w.d_eps;
    st.tangent = model_.tangent(d, p.beta);
    st.tag = p.regime;
    st.d_d = p.w.d_d;
    st.beta = p.beta;
    return st;
  };
  fem::EquilibriumOptions eo;
  eo.tol = cfg_.tol_elast();
  eo.cg = CgOptions{cfg_.cg_tol, 0.0, 100000};
  eo.exec = exec_;
  std::vector<fem::PointState> states;
  const fem::EquilibriumResult r = fem::solve_equilibrium(mesh_, kind_, mat, s.u, pinned_, f_ext_, eo, &states);
  s.elastic_residual = r.residual;
  s.elastic_iterations = r.outer + 1;
  s.regime.resize(states.size());
  s.beta.resize(states.size());
  for (int c = 0; c < n; ++c) {
    double dd = 0.0, w = 0.0;
    for (int q = 0; q < fem::kQuadPoints; ++q) {
      const fem::PointState& st = states[c * fem::kQuadPoints + q];
      dd += st.d_d;
      w += st.energy - st.strain.dot(sig);
      s.regime[c * fem::kQuadPoints + q] = st.tag;
      s.beta[c * fem::kQuadPoints + q] = st.beta;
    }
    s.dw_dd[c] = dd / fem::kQuadPoints;
    s.w_el[c] = w / fem::kQuadPoints;
  }
}

void FieldSolver::chemical_potential(SimState& s) const {
  const int n = cfg_.grid.cells();
  const Field la = lap(s.a);
  const double coef = cfg_.mu_convention == MuConvention::Standard ? cfg_.chem.lambda : 1.0;
  s.mu.resize(n);
  for (int i = 0; i < n; ++i) {
    s.mu[i] = psi(s.a[i], s.b[i], cfg_.chem).d_a + s.dw_dd[i] - coef * la[i];
  }
}

namespace {

double gradient_energy(const Field& f, const Grid& g) {
  const int nx = g.nx;
  const int ny = g.dim == 1 ? 1 : g.ny;
  const double vol = g.cell_volume();
  const double cx = 1.0 / (g.hx() * g.hx());
  const double cy = g.dim == 1 ? 0.0 : 1.0 / (g.hy() * g.hy());
  double s = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int c = j * nx + i;
      if (i + 1 < nx) s += cx * (f[c + 1] - f[c]) * (f[c + 1] - f[c]);
      if (j + 1 < ny) s += cy * (f[c + nx] - f[c]) * (f[c + nx] - f[c]);
    }
  }
  return 0.5 * vol * s;
}

}  // namespace

double FieldSolver::total_free_energy(const SimState& s) const {
  const Grid& g = cfg_.grid;
  const double vol = g.cell_volume();
  double bulk = 0.0;
  for (int i = 0; i < g.cells(); ++i) bulk += psi(s.a[i], s.b[i], cfg_.chem).value + s.w_el[i];
  return vol * bulk + cfg_.chem.lambda * (gradient_energy(s.a, g) + gradient_energy(s.b, g));
}

FluxField FieldSolver::flux_field(const SimState& s) const {
  const Grid& g = cfg_.grid;
  const int nx = g.nx;
  const int ny = g.dim == 1 ? 1 : g.ny;
  const double m = cfg_.mobility;
  FluxField j;
  j.jx.assign(static_cast<std::size_t>(nx + 1) * ny, 0.0);
  for (int r = 0; r < ny; ++r)
    for (int i = 1; i < nx; ++i) j.jx[r * (nx + 1) + i] = -m * (s.mu[r * nx + i] - s.mu[r * nx + i - 1]) / g.hx();
  if (g.dim == 2) {
    j.jy.assign(static_cast<std::size_t>(nx) * (ny + 1), 0.0);
    for (int r = 1; r < ny; ++r)
      for (int i = 0; i < nx; ++i) j.jy[r * nx + i] = -m * (s.mu[r * nx + i] - s.mu[(r - 1) * nx + i]) / g.hy();
  }
  return j;
}

Diagnostics FieldSolver::diagnostics(const SimState& s) const {
  Diagnostics d;
  d.step = s.step;
  d.time = s.time;
  d.dt = s.dt;
  d.energy = total_free_energy(s);
  d.mass = mass(s.a);
  d.min_sum = d.min_diff = INFINITY;
  d.max_sum = d.max_diff = -INFINITY;
  for (std::size_t i = 0; i < s.a.size(); ++i) {
    d.min_sum = std::min(d.min_sum, s.a[i] + s.b[i]);
    d.max_sum = std::max(d.max_sum, s.a[i] + s.b[i]);
    d.min_diff = std::min(d.min_diff, s.a[i] - s.b[i]);
    d.max_diff = std::max(d.max_diff, s.a[i] - s.b[i]);
  }
  const double dr = 1e-6;
  d.range_warning = d.min_sum < -dr || d.min_diff < -dr || d.max_sum > 1.0 + dr || d.max_diff > 1.0 + dr;
  d.elastic_residual = s.elastic_residual;
  return d;
}

namespace {

double gradient_coefficient(const SimConfig& c) {
  return c.mu_convention == MuConvention::Standard ? c.chem.lambda : 1.0;
}

}  // namespace

Field FieldSolver::apply_a_operator(const Field& x, double dt) const {
  // (I + dt lambda M c Lap Lap) x
  const double c = dt * cfg_.chem.lambda * cfg_.mobility * gradient_coefficient(cfg_);
  const Field l2 = lap(lap(x));
  Field y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + c * l2[i];
  return y;
}

Field FieldSolver::solve_a_operator(const Field& rhs, const Field& guess, double dt) const {
  // unpreconditioned CG keeps the iterates in guess + (mean-zero space)
  Field x = guess;
  conjugate_gradient([&](const Field& v, Field& y) { y = apply_a_operator(v, dt); }, rhs, x,
                     CgOptions{cfg_.cg_tol, 0.0, 100000}, nullptr, exec_);
  return x;
}

Field FieldSolver::solve_b_operator(const Field& rhs, const Field& guess, double dt) const {
  const double c = dt * cfg_.mobility * cfg_.chem.lambda;
  const Grid& g = cfg_.grid;
  const int nx = g.nx;
  const int ny = g.dim == 1 ? 1 : g.ny;
  Field inv_diag(rhs.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int nb_x = (i > 0) + (i < nx - 1);
      int nb_y = ny > 1 ? (j > 0) + (j < ny - 1) : 0;
      const double diag = 1.0 + c * (nb_x / (g.hx() * g.hx()) + (ny > 1 ? nb_y / (g.hy() * g.hy()) : 0.0));
      inv_diag[j * nx + i] = 1.0 / diag;
    }
  }
  Field x = guess;
  conjugate_gradient(
      [&](const Field& v, Field& y) {
        const Field l = lap(v);
        y.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) y[i] = v[i] - c * l[i];
      },
      rhs, x, CgOptions{cfg_.cg_tol, 0.0, 100000}, &inv_diag, exec_);
  return x;
}

bool FieldSolver::semi_implicit_attempt(const SimState& s, double dt, SimState& out) const {
  const int n = cfg_.grid.cells();
  const double m = cfg_.mobility;
  const double lam = cfg_.chem.lambda;
  out = s;
  try {
    Field na(n), rb(n);
    for (int i = 0; i < n; ++i) {
      const PsiEval ps = psi(s.a[i], s.b[i], cfg_.chem);
      na[i] = ps.d_a + s.dw_dd[i];
      rb[i] = s.b[i] - dt * m * (ps.d_b + s.dw_dd[i]);
    }
    if (!cfg_.freeze_a) {
      const Field lna = lap(na);
      Field rhs(n);
      for (int i = 0; i < n; ++i) rhs[i] = s.a[i] + dt * lam * m * lna[i];
      out.a = solve_a_operator(rhs, s.a, dt);
    }
    out.b = solve_b_operator(rb, s.b, dt);
    elastic_equilibrium(out);
    chemical_potential(out);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NewtonDivergence || e.code() == ErrorCode::SolverStall) return false;
    throw;
  }
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(out.a[i]) || !std::isfinite(out.b[i])) return false;
  }
  out.time = s.time + dt;
  out.step = s.step + 1;
  return true;
}

StepReport FieldSolver::step_semi_implicit(SimState& s) const {
  StepReport rep;
  rep.energy_before = total_free_energy(s);
  double dt = std::min(s.dt > 0.0 ? s.dt : cfg_.dt, cfg_.dt);
  if (cfg_.t_end > s.time) dt = std::min(dt, cfg_.t_end - s.time);
  const double slack = 1e-9 * (1.0 + std::abs(rep.energy_before));
  SimState out;
  for (int h = 0; h <= cfg_.max_halvings; ++h, dt *= 0.5) {
    if (!semi_implicit_attempt(s, dt, out)) continue;
    const double f1 = total_free_energy(out);
    if (f1 <= rep.energy_before + slack) {
      rep.halvings = h;
      rep.dt_used = dt;
      rep.energy_after = f1;
      out.dt = std::min(cfg_.dt, dt * cfg_.dt_growth);
      s = std::move(out);
      return rep;
    }
  }
  throw Error(ErrorCode::StepFailure, "energy increase persists after the maximum number of dt halvings");
}

double FieldSolver::mm_objective(const SimState& s, const Field& a_old, const Field& b_old, double dt) const {
  const int n = cfg_.grid.cells();
  const double vol = cfg_.grid.cell_volume();
  Field da(n);
  double pb = 0.0;
  for (int i = 0; i < n; ++i) {
    da[i] = s.a[i] - a_old[i];
    pb += (s.b[i] - b_old[i]) * (s.b[i] - b_old[i]);
  }
  const Field g = green_apply(da, cfg_.grid, cfg_.mobility * cfg_.chem.lambda, cfg_.cg_tol);
  return total_free_energy(s) + 0.5 / dt * vol * dot(da, g) + 0.5 / (dt * cfg_.mobility) * vol * pb;
}

bool FieldSolver::mm_attempt(const SimState& s, double dt, SimState& out, StepReport& rep) const {
  const int n = cfg_.grid.cells();
  const double vol = cfg_.grid.cell_volume();
  const double m = cfg_.mobility;
  const double lam = cfg_.chem.lambda;
  const Field& a_old = s.a;
  const Field& b_old = s.b;
  SimState cur = s;
  // G = (-lambda M Lap)^+ (a - a_old), updated along the search directions
  Field g_cur(n, 0.0);
  double phi = total_free_energy(cur);
  rep.mm_objective_before = phi;
  rep.iterations = 0;
  auto objective = [&](const SimState& c, const Field& g) {
    double pa = 0.0, pb = 0.0;
    for (int i = 0; i < n; ++i) {
      pa += (c.a[i] - a_old[i]) * g[i];
      pb += (c.b[i] - b_old[i]) * (c.b[i] - b_old[i]);
    }
    return total_free_energy(c) + 0.5 / dt * vol * pa + 0.5 / (dt * m) * vol * pb;
  };
  try {
    for (int it = 0; it < cfg_.mm_max_iter; ++it) {
      // variational chemical potential (F carries lambda/2 |grad a|^2)
      const Field la = lap(cur.a);
      const Field lb = lap(cur.b);
      Field mu(n), gb(n), ra(n, 0.0), rb(n);
      for (int i = 0; i < n; ++i) {
        const PsiEval ps = psi(cur.a[i], cur.b[i], cfg_.chem);
        mu[i] = ps.d_a + cur.dw_dd[i] - lam * la[i];
        gb[i] = ps.d_b + cur.dw_dd[i] - lam * lb[i];
        rb[i] = cur.b[i] - b_old[i] + dt * m * gb[i];
      }
      if (!cfg_.freeze_a) {
        const Field lmu = lap(mu);
        for (int i = 0; i < n; ++i) ra[i] = cur.a[i] - a_old[i] - dt * lam * m * lmu[i];
      }
      const double res = std::sqrt(vol * (dot(ra, ra) + dot(rb, rb))) / dt;
      rep.mm_residual = res;
      if (res < cfg_.tol_mm) break;

      Field pa(n, 0.0), pbv(n), gp(n, 0.0);
      if (!cfg_.freeze_a) {
        Field neg(n);
        for (int i = 0; i < n; ++i) neg[i] = -ra[i];
        // A uses the variational gradient coefficient lambda
        const double c = dt * lam * m * lam;
        Field x(n, 0.0);
        conjugate_gradient(
            [&](const Field& v, Field& y) {
              const Field l2 = lap(lap(v));
              y.resize(v.size());
              for (std::size_t i = 0; i < v.size(); ++i) y[i] = v[i] + c * l2[i];
            },
            neg, x, CgOptions{cfg_.cg_tol, 0.0, 100000}, nullptr, exec_);
        pa = std::move(x);
        gp = green_apply(pa, cfg_.grid, m * lam, cfg_.cg_tol);
      }
      {
        Field neg(n);
        for (int i = 0; i < n; ++i) neg[i] = -rb[i];
        pbv = solve_b_operator(neg, Field(n, 0.0), dt);
      }
      double slope = 0.0;
      for (int i = 0; i < n; ++i) {
        slope += vol * ((mu[i] + g_cur[i] / dt) * pa[i] + (gb[i] + (cur.b[i] - b_old[i]) / (dt * m)) * pbv[i]);
      }
      if (!(slope < 0.0)) break;
      double step = 1.0;
      bool found = false;
      SimState cand;
      Field g_cand(n);
      double phi_cand = 0.0;
      for (int trial = 0; trial < 30; ++trial, step *= 0.5) {
        cand = cur;
        for (int i = 0; i < n; ++i) {
          cand.a[i] = cur.a[i] + step * pa[i];
          cand.b[i] = cur.b[i] + step * pbv[i];
          g_cand[i] = g_cur[i] + step * gp[i];
        }
        try {
          elastic_equilibrium(cand);
        } catch (const Error& e) {
          if (e.code() == ErrorCode::NewtonDivergence || e.code() == ErrorCode::SolverStall) continue;
          throw;
        }
        phi_cand = objective(cand, g_cand);
        if (phi_cand <= phi + 1e-4 * step * slope) {
          found = true;
          break;
        }
      }
      if (!found) {
        if (it == 0) return false;
        break;
      }
      cur = std::move(cand);
      g_cur = g_cand;
      phi = phi_cand;
      rep.iterations = it + 1;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NewtonDivergence || e.code() == ErrorCode::SolverStall) return false;
    throw;
  }
  chemical_potential(cur);
  rep.mm_objective_after = phi;
  out = std::move(cur);
  out.time = s.time + dt;
  out.step = s.step + 1;
  return true;
}

StepReport FieldSolver::step_minimizing_movement(SimState& s) const {
  StepReport rep;
  rep.energy_before = total_free_energy(s);
  double dt = std::min(s.dt > 0.0 ? s.dt : cfg_.dt, cfg_.dt);
  if (cfg_.t_end > s.time) dt = std::min(dt, cfg_.t_end - s.time);
  SimState out;
  for (int h = 0; h <= cfg_.max_halvings; ++h, dt *= 0.5) {
    if (!mm_attempt(s, dt, out, rep)) continue;
    rep.halvings = h;
    rep.dt_used = dt;
    rep.energy_after = total_free_energy(out);
    out.dt = std::min(cfg_.dt, dt * cfg_.dt_growth);
    s = std::move(out);
    return rep;
  }
  throw Error(ErrorCode::StepFailure, "no descent for the minimizing-movement functional");
}

StepReport FieldSolver::step(SimState& s) const {
  return cfg_.stepper == Stepper::SemiImplicit ? step_semi_implicit(s) : step_minimizing_movement(s);
}

}  // namespace microlax
