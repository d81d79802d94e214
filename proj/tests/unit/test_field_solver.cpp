#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "microlax/field_solver.hpp"
#include "microlax/kernels.hpp"
#include "microlax/rng.hpp"

using namespace microlax;

namespace {

constexpr double kPi = std::numbers::pi;

Grid grid1(int n, double l = 1.0) {
  Grid g;
  g.dim = 1;
  g.nx = n;
  g.lx = l;
  return g;
}

Grid grid2(int nx, int ny, double lx = 1.0, double ly = 1.0) {
  Grid g;
  g.dim = 2;
  g.nx = nx;
  g.ny = ny;
  g.lx = lx;
  g.ly = ly;
  return g;
}

double xc(const Grid& g, int i) { return (i + 0.5) * g.hx(); }

SimConfig relaxed_1d(int n) {
  SimConfig c;
  c.grid = grid1(n);
  c.chem.theta = 0.5;
  c.chem.kappa1 = 2.0;
  c.chem.kappa2 = 0.1;
  c.chem.lambda = 1e-3;
  c.phases.alpha1 = ElasticModulus::scalar(1.0);
  c.phases.alpha2 = ElasticModulus::scalar(2.0);
  c.phases.eps_t1 = SymTensor::scalar(0.0);
  c.phases.eps_t2 = SymTensor::scalar(1.0);
  c.phases.sigma_ext = SymTensor::scalar(0.2);
  c.t_end = 1e9;
  return c;
}

SimConfig relaxed_2d(int n) {
  SimConfig c;
  c.grid = grid2(n, n);
  c.chem.theta = 0.5;
  c.chem.kappa1 = 2.0;
  c.chem.kappa2 = 0.1;
  c.chem.lambda = 1e-3;
  c.phases.alpha1 = ElasticModulus::cubic(3, 1, 1);
  c.phases.alpha2 = ElasticModulus::cubic(4, 1, 2);
  c.phases.eps_t1 = SymTensor(2);
  c.phases.eps_t2 = SymTensor::from_components(0.05, -0.03, 0.02);
  c.phases.sigma_ext = SymTensor::from_components(0.02, 0.0, 0.01);
  c.t_end = 1e9;
  return c;
}

Field smooth_a(const Grid& g, double amp) {
  Field a(g.cells());
  for (int c = 0; c < g.cells(); ++c) {
    const double x = xc(g, c % g.nx);
    const double y = g.dim == 1 ? 0.0 : (c / g.nx + 0.5) * g.hy();
    a[c] = 0.5 + amp * std::cos(kPi * x / g.lx) * (g.dim == 1 ? 1.0 : std::cos(kPi * y / g.ly));
  }
  return a;
}

Field smooth_b(const Grid& g, double amp) {
  Field b(g.cells());
  for (int c = 0; c < g.cells(); ++c) b[c] = amp * std::cos(2.0 * kPi * xc(g, c % g.nx) / g.lx);
  return b;
}

double max_abs_diff(const Field& x, const Field& y) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

// (I - c L) x = r for the 1D Neumann three-point Laplacian L, by the Thomas algorithm.
Field thomas_neumann(const Field& r, double c, double h) {
  const int n = static_cast<int>(r.size());
  const double k = c / (h * h);
  std::vector<double> lo(n, -k), di(n, 1.0 + 2.0 * k), up(n, -k);
  di[0] = di[n - 1] = 1.0 + k;
  std::vector<double> cp(n), dp(n);
  cp[0] = up[0] / di[0];
  dp[0] = r[0] / di[0];
  for (int i = 1; i < n; ++i) {
    const double m = di[i] - lo[i] * cp[i - 1];
    cp[i] = up[i] / m;
    dp[i] = (r[i] - lo[i] * dp[i - 1]) / m;
  }
  Field x(n);
  x[n - 1] = dp[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = dp[i] - cp[i] * x[i + 1];
  return x;
}

// dW/dd at the equilibrium strain of a 1D bar under the dead load s,
// with the strain found by bisection on the stress.
double dwdd_at_load(double d, double s, const PhaseParams& p) {
  double lo = -100.0, hi = 100.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (eval_1d(d, mid, p).d_eps(0) < s ? lo : hi) = mid;
  }
  return eval_1d(d, 0.5 * (lo + hi), p).d_d;
}

}  // namespace

TEST_CASE("laplacian of a constant vanishes") {
  for (const Grid& g : {grid1(16), grid2(8, 5, 1.0, 0.7)}) {
    const Field l = laplacian_neumann(Field(g.cells(), 3.25), g);
    for (double v : l) CHECK(std::abs(v) < 1e-12);
  }
}

TEST_CASE("laplacian of the first Neumann mode converges at second order") {
  const double len = 2.0;
  auto err = [&](int n) {
    const Grid g = grid1(n, len);
    Field f(n);
    for (int i = 0; i < n; ++i) f[i] = std::cos(kPi * xc(g, i) / len);
    const Field l = laplacian_neumann(f, g);
    double e = 0.0;
    for (int i = 0; i < n; ++i) e = std::max(e, std::abs(l[i] + (kPi / len) * (kPi / len) * f[i]));
    return e;
  };
  const double e1 = err(32), e2 = err(64), e3 = err(128);
  CHECK(std::log2(e1 / e2) >= 1.9);
  CHECK(std::log2(e2 / e3) >= 1.9);
}

TEST_CASE("laplacian is conservative") {
  Rng rng(11);
  for (const Grid& g : {grid1(37), grid2(13, 9, 2.0, 0.5)}) {
    Field f(g.cells());
    for (double& v : f) v = rng.uniform(-1, 1);
    const Field l = laplacian_neumann(f, g);
    double s = 0.0, scale = 0.0;
    for (double v : l) s += v;
    for (double v : f) scale += v * v;
    CHECK(std::abs(s) * g.hx() * g.hx() <= 1e-12 * std::sqrt(scale));
  }
}

TEST_CASE("serial and parallel kernels agree bitwise") {
  Rng rng(5);
  const Grid g = grid2(31, 17);
  Field f(g.cells());
  for (double& v : f) v = rng.uniform(-1, 1);
  Field s1, p1;
  kernels::laplacian_serial(f, s1, g.nx, g.ny, g.hx(), g.hy());
  kernels::laplacian_parallel(f, p1, g.nx, g.ny, g.hx(), g.hy());
  CHECK(s1 == p1);

  Triplets t;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, 4.0 + rng.uniform());
    t.emplace_back(i, (i * 7 + 3) % n, rng.uniform(-1, 1));
  }
  const SparseMatrix a = build_sparse(n, t);
  Field x(n);
  for (double& v : x) v = rng.uniform(-1, 1);
  Field ys, yp;
  kernels::csr_matvec_serial(a, x, ys);
  kernels::csr_matvec_parallel(a, x, yp);
  CHECK(ys == yp);
}

TEST_CASE("green operator") {
  const Grid g = grid1(64, 1.5);
  SUBCASE("zero data") {
    const Field w = green_apply(Field(g.cells(), 0.0), g, 2.0);
    for (double v : w) CHECK(v == 0.0);
  }
  SUBCASE("Neumann eigenfunction") {
    const double mob = 2.0;
    auto err = [&](int n) {
      const Grid gg = grid1(n, 1.5);
      Field f(n);
      for (int i = 0; i < n; ++i) f[i] = std::cos(kPi * xc(gg, i) / gg.lx);
      const Field w = green_apply(f, gg, mob);
      const double k2 = (gg.lx / kPi) * (gg.lx / kPi) / mob;
      double e = 0.0;
      for (int i = 0; i < n; ++i) e = std::max(e, std::abs(w[i] - k2 * f[i]));
      return e;
    };
    const double e1 = err(32), e2 = err(64);
    CHECK(e1 < 1e-3);
    CHECK(std::log2(e1 / e2) >= 1.9);
  }
  SUBCASE("positive on mean-zero data") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      Field f(g.cells());
      for (double& v : f) v = rng.uniform(-1, 1);
      double m = 0.0;
      for (double v : f) m += v;
      for (double& v : f) v -= m / g.cells();
      const Field w = green_apply(f, g, 0.5);
      CHECK(dot(f, w) * g.cell_volume() > 0.0);
      // -M Lap w = f
      const Field l = laplacian_neumann(w, g);
      for (int i = 0; i < g.cells(); ++i) CHECK(-0.5 * l[i] == doctest::Approx(f[i]).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("1D elasticity accommodates the eigenstrain of each half") {
  SimConfig c;
  c.variant = Variant::Linear;
  c.grid = grid1(8);
  c.linear.stiffness = ElasticModulus::scalar(2.0);
  c.linear.eps_bar = SymTensor::scalar(0.3);
  c.phases.sigma_ext = SymTensor::scalar(0.0);
  const FieldSolver fs(c);
  Field a(8, 0.5), b(8);
  for (int i = 0; i < 8; ++i) b[i] = i < 4 ? -0.5 : 0.5;
  const SimState s = fs.make_state(a, b);
  for (int i = 0; i < 8; ++i) {
    const double e = (s.u[i + 1] - s.u[i]) / c.grid.hx();
    CHECK(e == doctest::Approx(i < 4 ? 0.0 : 0.3).epsilon(1e-14).scale(1.0));
  }
  CHECK(s.elastic_residual <= 1e-10);
}

TEST_CASE("homogeneous 2D data relaxes to the stress-free strain") {
  SimConfig c = relaxed_2d(6);
  c.phases.sigma_ext = SymTensor(2);
  const FieldSolver fs(c);
  const int n = c.grid.cells();
  const SimState s = fs.make_state(Field(n, 0.5), Field(n, 0.2));
  CHECK(s.elastic_residual <= 1e-10);
  std::vector<Vec> eps;
  const fem::QuadMesh mesh{c.grid.nx, c.grid.ny, c.grid.hx(), c.grid.hy()};
  fem::strains(mesh, fem::FieldKind::Vector, s.u, eps);
  for (const Vec& e : eps) {
    CHECK((e - eps[0]).norm() < 1e-10);
    CHECK(fs.model().eval(0.7, e).w.d_eps.norm() < 1e-10);
  }
}

TEST_CASE("2D elasticity under load meets the residual tolerance") {
  const SimConfig c = relaxed_2d(8);
  const FieldSolver fs(c);
  const SimState s = fs.make_state(smooth_a(c.grid, 0.3), smooth_b(c.grid, 0.1));
  CHECK(s.elastic_residual <= c.tol_elast());
  CHECK(std::all_of(s.regime.begin(), s.regime.end(), [](int r) { return r >= 0 && r <= 3; }));
}

TEST_CASE("free energy of the zero state and the load shift") {
  SUBCASE("zero state") {
    SimConfig c = relaxed_1d(10);
    c.phases.eps_t2 = SymTensor::scalar(0.0);
    c.phases.sigma_ext = SymTensor::scalar(0.0);
    const FieldSolver fs(c);
    const SimState s = fs.make_state(Field(10, 0.0), Field(10, 0.0));
    CHECK(fs.total_free_energy(s) == doctest::Approx(psi(0.0, 0.0, c.chem).value * c.grid.lx).epsilon(1e-13));
  }
  SUBCASE("dead load") {
    // W = C/2 (e - d t)^2 at equilibrium under s: F shifts by -(s^2/(2C) + d t s)|Omega|
    SimConfig c;
    c.variant = Variant::Linear;
    c.grid = grid1(12, 1.7);
    c.linear.stiffness = ElasticModulus::scalar(3.0);
    c.linear.eps_bar = SymTensor::scalar(0.4);
    c.phases.sigma_ext = SymTensor::scalar(0.0);
    const Field a(12, 0.4), b(12, 0.1);
    const double f0 = FieldSolver(c).total_free_energy(FieldSolver(c).make_state(a, b));
    const double sg = 0.25;
    c.phases.sigma_ext = SymTensor::scalar(sg);
    const FieldSolver fs(c);
    const double f1 = fs.total_free_energy(fs.make_state(a, b));
    CHECK(f1 - f0 == doctest::Approx(-(sg * sg / 6.0 + 0.5 * 0.4 * sg) * 1.7).epsilon(1e-12));
  }
}

TEST_CASE("flux field") {
  const Grid g = grid1(10, 2.0);
  SimConfig c = relaxed_1d(10);
  c.grid = g;
  c.mobility = 1.5;
  const FieldSolver fs(c);
  SimState s;
  s.mu.assign(10, 0.7);
  for (double j : fs.flux_field(s).jx) CHECK(j == 0.0);
  for (int i = 0; i < 10; ++i) s.mu[i] = 0.3 * xc(g, i);
  const FluxField f = fs.flux_field(s);
  CHECK(f.jx.front() == 0.0);
  CHECK(f.jx.back() == 0.0);
  for (int i = 1; i < 10; ++i) CHECK(f.jx[i] == doctest::Approx(-1.5 * 0.3).epsilon(1e-12));
}

TEST_CASE("flux divergence matches the chemical potential stencil") {
  const SimConfig c = relaxed_2d(6);
  const FieldSolver fs(c);
  SimState s = fs.make_state(smooth_a(c.grid, 0.2), smooth_b(c.grid, 0.05));
  const FluxField f = fs.flux_field(s);
  const Field l = laplacian_neumann(s.mu, c.grid);
  const int nx = c.grid.nx;
  for (int j = 0; j < c.grid.ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double div = (f.jx[j * (nx + 1) + i + 1] - f.jx[j * (nx + 1) + i]) / c.grid.hx() +
                         (f.jy[(j + 1) * nx + i] - f.jy[j * nx + i]) / c.grid.hy();
      CHECK(-div == doctest::Approx(c.mobility * l[j * nx + i]).epsilon(1e-10).scale(1e-8));
    }
  }
}

TEST_CASE("homogeneous critical state is stationary") {
  for (int dim : {1, 2}) {
    SimConfig c = dim == 1 ? relaxed_1d(16) : relaxed_2d(6);
    // equal phases: W does not depend on d
    c.phases.alpha2 = c.phases.alpha1;
    c.phases.eps_t2 = c.phases.eps_t1;
    for (Stepper st : {Stepper::SemiImplicit, Stepper::MinimizingMovement}) {
      c.stepper = st;
      const FieldSolver fs(c);
      const int n = c.grid.cells();
      SimState s = fs.make_state(Field(n, 0.3), Field(n, 0.0));
      const SimState s0 = s;
      const StepReport r = fs.step(s);
      CHECK(max_abs_diff(s.a, s0.a) <= 1e-12);
      CHECK(max_abs_diff(s.b, s0.b) <= 1e-12);
      if (st == Stepper::MinimizingMovement) CHECK(r.iterations == 0);
    }
  }
}

TEST_CASE("semi-implicit stepper conserves mass and dissipates energy") {
  SimConfig c = relaxed_1d(64);
  c.noise = 1e-2;
  c.noise_b = 1e-2;
  c.dt = 5e-3;
  const FieldSolver fs(c);
  SimState s = fs.initial_state();
  const double m0 = fs.mass(s.a);
  double f_prev = fs.total_free_energy(s);
  for (int k = 0; k < 1000; ++k) {
    const StepReport r = fs.step(s);
    CHECK(r.energy_before == doctest::Approx(f_prev).epsilon(1e-15));
    REQUIRE(r.energy_after <= f_prev + 1e-9 * (1.0 + std::abs(f_prev)));
    f_prev = r.energy_after;
    REQUIRE(s.elastic_residual <= c.tol_elast());
  }
  CHECK(std::abs(fs.mass(s.a) - m0) <= 1e-10 * std::abs(m0));
}

TEST_CASE("2D semi-implicit steps stay conservative and dissipative") {
  SimConfig c = relaxed_2d(10);
  c.noise = 5e-2;
  c.noise_b = 2e-2;
  c.dt = 1e-2;
  c.chem.lambda = 1e-2;
  const FieldSolver fs(c);
  SimState s = fs.initial_state();
  const double m0 = fs.mass(s.a);
  double f_prev = fs.total_free_energy(s);
  for (int k = 0; k < 30; ++k) {
    const StepReport r = fs.step(s);
    CHECK(r.energy_after <= f_prev + 1e-9 * (1.0 + std::abs(f_prev)));
    f_prev = r.energy_after;
    CHECK(s.elastic_residual <= c.tol_elast());
  }
  CHECK(std::abs(fs.mass(s.a) - m0) <= 1e-10 * std::abs(m0));
  CHECK_FALSE(fs.diagnostics(s).range_warning);
}

TEST_CASE("deterministic and threaded runs coincide") {
  SimConfig c = relaxed_2d(8);
  c.noise = 5e-2;
  c.dt = 1e-2;
  SimConfig cs = c;
  cs.deterministic = true;
  const FieldSolver fp(c), fsr(cs);
  SimState p = fp.initial_state(), s = fsr.initial_state();
  for (int k = 0; k < 5; ++k) {
    fp.step(p);
    fsr.step(s);
  }
  CHECK(p.a == s.a);
  CHECK(p.b == s.b);
  CHECK(p.u == s.u);
}

TEST_CASE("minimizing movement decreases its functional") {
  SimConfig c = relaxed_1d(48);
  c.chem.lambda = 1e-2;
  c.dt = 1e-2;
  c.stepper = Stepper::MinimizingMovement;
  const FieldSolver fs(c);
  SimState s = fs.make_state(smooth_a(c.grid, 0.15), smooth_b(c.grid, 0.05));
  for (int k = 0; k < 5; ++k) {
    const Field a_old = s.a, b_old = s.b;
    const double before = fs.mm_objective(s, a_old, b_old, c.dt);
    const StepReport r = fs.step(s);
    CHECK(r.iterations >= 1);
    CHECK(r.dt_used == c.dt);
    const double after = fs.mm_objective(s, a_old, b_old, r.dt_used);
    CHECK(after < before);
    CHECK(r.mm_objective_after == doctest::Approx(after).epsilon(1e-10));
    CHECK(r.energy_after <= r.energy_before);
    CHECK(r.mm_residual < c.tol_mm);
  }
}

TEST_CASE("minimizing movement and semi-implicit trajectories agree to first order") {
  SimConfig c = relaxed_1d(32);
  c.chem.lambda = 2e-2;
  c.chem.kappa1 = 1.0;
  const double dt0 = 4e-3;
  const double t_final = 10 * dt0;
  c.t_end = t_final;
  c.tol_mm = 1e-11;
  auto run = [&](Stepper st, double dt) {
    SimConfig cc = c;
    cc.stepper = st;
    cc.dt = dt;
    cc.max_halvings = 0;
    const FieldSolver fs(cc);
    SimState s = fs.make_state(smooth_a(cc.grid, 0.2), smooth_b(cc.grid, 0.05));
    while (s.time < t_final - 1e-12) fs.step(s);
    Field out = s.a;
    out.insert(out.end(), s.b.begin(), s.b.end());
    return out;
  };
  std::vector<double> err;
  for (double dt : {dt0, dt0 / 2, dt0 / 4}) {
    err.push_back(max_abs_diff(run(Stepper::SemiImplicit, dt), run(Stepper::MinimizingMovement, dt)));
  }
  INFO("differences " << err[0] << " " << err[1] << " " << err[2]);
  CHECK(err[0] > 0.0);
  CHECK(std::log2(err[0] / err[1]) >= 0.9);
  CHECK(std::log2(err[1] / err[2]) >= 0.9);
}

TEST_CASE("frozen a reduces to an elastic Allen-Cahn flow") {
  SimConfig c = relaxed_1d(40);
  c.freeze_a = true;
  c.chem.lambda = 5e-3;
  c.dt = 2e-3;
  c.max_halvings = 0;
  const FieldSolver fs(c);
  const Field a(40, 0.5);
  Field b = smooth_b(c.grid, 0.1);
  SimState s = fs.make_state(a, b);
  const double h = c.grid.hx();
  for (int k = 0; k < 20; ++k) {
    fs.step(s);
    Field rhs(40);
    for (int i = 0; i < 40; ++i) {
      const double gb = psi(a[i], b[i], c.chem).d_b + dwdd_at_load(a[i] + b[i], 0.2, c.phases);
      rhs[i] = b[i] - c.dt * c.mobility * gb;
    }
    b = thomas_neumann(rhs, c.dt * c.mobility * c.chem.lambda, h);
  }
  CHECK(s.a == a);
  CHECK(max_abs_diff(s.b, b) <= 1e-10);
}

TEST_CASE("step failure after exhausting halvings") {
  SimConfig c = relaxed_1d(16);
  c.dt = 10.0;
  c.max_halvings = 0;
  c.noise = 0.3;
  c.chem.lambda = 1e-4;
  const FieldSolver fs(c);
  SimState s = fs.initial_state();
  bool threw = false;
  try {
    for (int k = 0; k < 50; ++k) fs.step(s);
  } catch (const Error& e) {
    threw = e.code() == ErrorCode::StepFailure;
  }
  CHECK(threw);
}

TEST_CASE("configuration validation") {
  SimConfig c = relaxed_1d(16);
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = relaxed_1d(16);
  c.mobility = -1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = relaxed_1d(3);
  CHECK_THROWS_AS(c.validate(), Error);
  c = relaxed_1d(16);
  c.variant = Variant::Scalar3d;
  CHECK_THROWS_AS(c.validate(), Error);
}
