#include "microlax/simulation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "microlax/fem.hpp"

namespace microlax {

namespace fs = std::filesystem;

SimState initial_state_from_config(const FieldSolver& solver) {
  const SimConfig& c = solver.config();
  if (c.init_a_file.empty() && c.init_b_file.empty()) return solver.initial_state();
  const int n = c.grid.cells();
  const SimState base = solver.initial_state();
  const Field a = c.init_a_file.empty() ? base.a : io::read_field(c.init_a_file, n);
  const Field b = c.init_b_file.empty() ? base.b : io::read_field(c.init_b_file, n);
  return solver.make_state(a, b);
}

namespace {

std::vector<std::string> diag_header() {
  return {"step", "time",    "dt",       "energy",   "energy_increment", "mass",     "min_a_plus_b",
          "max_a_plus_b", "min_a_minus_b", "max_a_minus_b", "elastic_residual", "halvings", "mm_iterations",
          "range_warning"};
}

std::vector<std::string> diag_row(const Diagnostics& d, const StepReport* r) {
  return {io::fmt(d.step),
          io::fmt(d.time),
          io::fmt(d.dt),
          io::fmt(d.energy),
          io::fmt(d.energy_increment),
          io::fmt(d.mass),
          io::fmt(d.min_sum),
          io::fmt(d.max_sum),
          io::fmt(d.min_diff),
          io::fmt(d.max_diff),
          io::fmt(d.elastic_residual),
          io::fmt(static_cast<long>(r ? r->halvings : 0)),
          io::fmt(static_cast<long>(r ? r->iterations : 0)),
          d.range_warning ? "1" : "0"};
}

std::string step_tag(long step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%08ld", step);
  return buf;
}

void snapshot(const FieldSolver& solver, const SimState& s, const fs::path& dir) {
  const Grid& g = solver.grid();
  const std::string tag = step_tag(s.step);
  io::write_field_csv((dir / ("a_" + tag + ".csv")).string(), g, s.a);
  io::write_field_csv((dir / ("b_" + tag + ".csv")).string(), g, s.b);
  io::write_field_csv((dir / ("mu_" + tag + ".csv")).string(), g, s.mu);
  if (solver.config().vtk) {
    Field d(s.a.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = s.a[i] + s.b[i];
    io::write_vtk((dir / ("fields_" + tag + ".vtk")).string(), g,
                  {{"a", &s.a}, {"b", &s.b}, {"mu", &s.mu}, {"d", &d}, {"dW_dd", &s.dw_dd}});
  }
}

}  // namespace

RunSummary run_simulation(const SimConfig& cfg, const std::string& out_dir, const std::string& command) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(out_dir);
  fs::create_directories(dir);

  io::RunManifest manifest;
  manifest.config = cfg;
  manifest.command = command;
  manifest.started = io::utc_timestamp();
  manifest.status = "running";
  manifest.write((dir / "manifest.ini").string());

  const FieldSolver solver(cfg);
  SimState s = initial_state_from_config(solver);
  RunSummary sum;
  io::CsvTable diag;
  diag.header = diag_header();

  Diagnostics d = solver.diagnostics(s);
  sum.initial = d;
  sum.final = d;
  sum.max_elastic_residual = s.elastic_residual;
  sum.range_warning = d.range_warning;
  diag.add(diag_row(d, nullptr));
  snapshot(solver, s, dir);
  sum.snapshots = 1;
  long last_snapshot = 0;

  const double t_stop = cfg.t_end * (1.0 - 1e-12);
  try {
    while (s.time < t_stop && (cfg.max_steps < 0 || sum.accepted_steps < cfg.max_steps)) {
      const StepReport r = solver.step(s);
      ++sum.accepted_steps;
      sum.rejected_attempts += r.halvings;
      sum.max_energy_increase = std::max(sum.max_energy_increase, r.energy_after - r.energy_before);
      sum.max_elastic_residual = std::max(sum.max_elastic_residual, s.elastic_residual);
      const bool last = !(s.time < t_stop && (cfg.max_steps < 0 || sum.accepted_steps < cfg.max_steps));
      if (last || (cfg.diag_every > 0 && s.step % cfg.diag_every == 0)) {
        const double prev = d.energy;
        d = solver.diagnostics(s);
        d.energy_increment = d.energy - prev;
        d.dt = r.dt_used;
        sum.range_warning = sum.range_warning || d.range_warning;
        diag.add(diag_row(d, &r));
      }
      if (cfg.snapshot_every > 0 && s.step % cfg.snapshot_every == 0) {
        snapshot(solver, s, dir);
        ++sum.snapshots;
        last_snapshot = s.step;
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::StepFailure) throw;
    sum.status = "step_failure";
    sum.message = e.what();
  }
  if (s.step != last_snapshot) {
    snapshot(solver, s, dir);
    ++sum.snapshots;
  }
  sum.final = solver.diagnostics(s);
  diag.write((dir / "diagnostics.csv").string());

  manifest.finished = io::utc_timestamp();
  manifest.status = sum.status;
  manifest.final_diagnostics = sum.final;
  manifest.accepted_steps = sum.accepted_steps;
  manifest.rejected_attempts = sum.rejected_attempts;
  manifest.write((dir / "manifest.ini").string());
  sum.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sum;
}

std::vector<ConvergenceRow> convergence_mms(int n0, int levels) {
  if (levels < 3) throw Error(ErrorCode::ConfigError, "a convergence study needs at least 3 levels");
  // u = grad(exp(x) sin y) solves the isotropic Navier equations without
  // body force; Dirichlet data on the whole boundary
  const Mat c = ElasticModulus::isotropic(1.0, 1.0).mandel();
  const fem::PointMaterial mat = [&c](int, int, const Vec& e) {
    fem::PointState s;
    s.stress = c * e;
    s.energy = 0.5 * e.dot(s.stress);
    s.tangent = c;
    return s;
  };
  auto exact = [](double x, double y, int comp) {
    return comp == 0 ? std::exp(x) * std::sin(y) : std::exp(x) * std::cos(y);
  };
  std::vector<ConvergenceRow> rows;
  for (int k = 0; k < levels; ++k) {
    const int n = n0 << k;
    const fem::QuadMesh m{n, n, 1.0 / n, 1.0 / n};
    Field u(2 * static_cast<std::size_t>(m.nodes()), 0.0);
    std::vector<char> fixed(u.size(), 0);
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        if (i == 0 || j == 0 || i == n || j == n)
          for (int comp = 0; comp < 2; ++comp) {
            fixed[2 * m.node(i, j) + comp] = 1;
            u[2 * m.node(i, j) + comp] = exact(i * m.hx, j * m.hy, comp);
          }
    fem::EquilibriumOptions opt;
    opt.tol = 1e-13;
    fem::solve_equilibrium(m, fem::FieldKind::Vector, mat, u, fixed, Field(u.size(), 0.0), opt);
    double err = 0.0;
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        for (int comp = 0; comp < 2; ++comp)
          err = std::max(err, std::abs(u[2 * m.node(i, j) + comp] - exact(i * m.hx, j * m.hy, comp)));
    ConvergenceRow r{k, m.hx, err, 0.0};
    if (k > 0) r.order = std::log2(rows.back().error / err);
    rows.push_back(r);
  }
  return rows;
}

std::vector<ConvergenceRow> convergence_time(const SimConfig& cfg, int levels) {
  if (levels < 3) throw Error(ErrorCode::ConfigError, "a convergence study needs at least 3 levels");
  if (!(cfg.t_end > 0.0)) throw Error(ErrorCode::ConfigError, "time convergence needs t_end > 0");
  // levels dt / 2^k plus a reference two halvings below the finest level;
  // the reference row compares the reference run with itself
  std::vector<Field> finals;
  std::vector<double> dts;
  for (int k = 0; k <= levels; ++k) {
    SimConfig c = cfg;
    c.dt = cfg.dt / (1 << (k < levels ? k : levels + 1));
    c.max_steps = -1;
    c.max_halvings = 0;  // a fixed step sequence per level
    const FieldSolver solver(c);
    SimState s = initial_state_from_config(solver);
    while (s.time < c.t_end * (1.0 - 1e-12)) solver.step(s);
    Field out = s.a;
    out.insert(out.end(), s.b.begin(), s.b.end());
    finals.push_back(std::move(out));
    dts.push_back(c.dt);
  }
  std::vector<ConvergenceRow> rows;
  const Field& ref = finals.back();
  for (int k = 0; k <= levels; ++k) {
    double err = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) err = std::max(err, std::abs(finals[k][i] - ref[i]));
    ConvergenceRow r{k, dts[k], err, 0.0};
    if (k > 0 && k < levels && err > 0.0) r.order = std::log2(rows.back().error / err);
    rows.push_back(r);
  }
  return rows;
}

io::CsvTable convergence_table(const std::vector<ConvergenceRow>& rows) {
  io::CsvTable t;
  t.header = {"level", "h", "error", "order"};
  for (const ConvergenceRow& r : rows) {
    t.add({io::fmt(static_cast<long>(r.level)), io::fmt(r.h), io::fmt(r.error), io::fmt(r.order)});
  }
  return t;
}

}  // namespace microlax
