// microlax: command-line front end.
//
// Exit codes: 0 ok, 1 verification failure, 2 usage or configuration error,
// 3 evaluator error, 4 partial result (flagged regime-map rows),
// 5 simulation failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "microlax/io.hpp"
#include "microlax/linalg.hpp"
#include "microlax/relaxed_energy.hpp"
#include "microlax/simulation.hpp"
#include "microlax/verify.hpp"

using namespace microlax;

namespace {

enum Exit { kOk = 0, kVerifyFail = 1, kUsage = 2, kEvaluator = 3, kPartial = 4, kSimulation = 5 };

struct ConfigArgs {
  std::string config;
  std::string variant;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
};

void add_config_options(CLI::App* cmd, ConfigArgs& a, bool run_flags) {
  cmd->add_option("--config", a.config, "INI configuration file");
  cmd->add_option("--variant", a.variant, "linear | relaxed | scalar3d (overrides run.variant)");
  cmd->add_option("--set", a.sets, "override as section.key=value (repeatable)");
  if (run_flags) {
    cmd->add_option("--seed", a.seed, "random seed (overrides run.seed)");
    cmd->add_flag("--deterministic", a.deterministic, "serial kernels, bit-reproducible output");
  }
}

SimConfig load_config(const ConfigArgs& a) {
  io::Ini ini = a.config.empty() ? io::Ini() : io::Ini::load(a.config);
  if (!a.variant.empty()) ini.set("run", "variant", a.variant);
  if (a.seed) ini.set("run", "seed", std::to_string(*a.seed));
  if (a.deterministic) ini.set("run", "deterministic", "true");
  for (const std::string& s : a.sets) {
    const auto eq = s.find('=');
    const auto dot = s.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
      throw Error(ErrorCode::ConfigError, "--set expects section.key=value, got '" + s + "'");
    ini.set(s.substr(0, dot), s.substr(dot + 1, eq - dot - 1), s.substr(eq + 1));
  }
  return io::config_from_ini(ini);
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string g17(const Vec& v) {
  std::string s;
  for (int i = 0; i < v.size(); ++i) s += (i ? "," : "") + g17(v(i));
  return s;
}

// Pointwise evaluator selected by the variant (and the dimension of the
// phase data for the relaxed variant).
struct PointEnergy {
  SimConfig cfg;

  int strain_size() const {
    switch (cfg.variant) {
      case Variant::Linear: return 3;
      case Variant::Scalar3d: return 2;
      case Variant::Relaxed: return cfg.phases.dim() == 1 ? 1 : 3;
    }
    return 0;
  }

  RelaxedEval eval(double d, const Vec& e) const {
    if (e.size() != strain_size())
      throw Error(ErrorCode::ConfigError, "strain needs " + std::to_string(strain_size()) + " components");
    switch (cfg.variant) {
      case Variant::Linear: {
        const EnergyEval w = w_lin(d, SymTensor(2, e), cfg.linear);
        RelaxedEval r;
        r.value = w.value;
        r.d_d = w.d_d;
        r.d_eps = w.d_eps;
        r.regime = Regime::Zero;
        return r;
      }
      case Variant::Scalar3d: return eval_scalar3d(d, Eigen::Vector2d(e(0), e(1)), cfg.anti);
      case Variant::Relaxed:
        if (cfg.phases.dim() == 1) return eval_1d(d, e(0), cfg.phases);
        return eval_2d(d, SymTensor(2, e), cfg.phases, cfg.relaxed);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown variant");
  }

  // Multiplies both eigenstrains.
  void scale_eigenstrains(double s) {
    if (cfg.variant == Variant::Scalar3d) {
      cfg.anti.f1 *= s;
      cfg.anti.f2 *= s;
    } else {
      cfg.phases.eps_t1 = cfg.phases.eps_t1 * s;
      cfg.phases.eps_t2 = cfg.phases.eps_t2 * s;
    }
  }
};

Vec to_vec(const std::vector<double>& v) {
  Vec x(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<int>(i)) = v[i];
  return x;
}

struct EnergyArgs {
  ConfigArgs cfg;
  double d = 0.5;
  std::string eps;
  bool csv = false;
};

int cmd_energy(const EnergyArgs& a) {
  PointEnergy pe{load_config(a.cfg)};
  const Vec e = a.eps.empty() ? Vec::Zero(pe.strain_size()) : to_vec(io::parse_list(a.eps, "--eps"));
  if (e.size() != pe.strain_size())
    throw Error(ErrorCode::ConfigError, "--eps needs " + std::to_string(pe.strain_size()) + " components");
  RelaxedEval r;
  try {
    r = pe.eval(a.d, e);
  } catch (const Error& err) {
    std::cerr << "evaluator error: " << err.what() << "\n";
    return kEvaluator;
  }
  const std::vector<std::pair<std::string, std::string>> out = {
      {"variant", variant_name(pe.cfg.variant)},
      {"d", g17(a.d)},
      {"eps", g17(e)},
      {"value", g17(r.value)},
      {"d_d", g17(r.d_d)},
      {"d_eps", g17(r.d_eps)},
      {"regime", std::to_string(static_cast<int>(r.regime))},
      {"beta_star", g17(r.beta_star)},
      {"eps1_star", g17(r.eps1_star)},
      {"eps2_star", g17(r.eps2_star)},
  };
  if (a.csv) {
    std::string h, v;
    for (std::size_t i = 0; i < out.size(); ++i) {
      h += (i ? "," : "") + out[i].first;
      v += (i ? "," : "") + (out[i].second.find(',') != std::string::npos ? "\"" + out[i].second + "\"" : out[i].second);
    }
    std::cout << h << "\n" << v << "\n";
  } else {
    for (const auto& [k, v] : out) std::cout << k << " = " << v << "\n";
  }
  return kOk;
}

struct Axis {
  std::string name;
  double lo = 0.0, hi = 0.0;
  int n = 0;

  double at(int k) const { return lo + (hi - lo) * k / (n - 1); }
};

Axis parse_axis(const std::string& spec, const std::string& what) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 4) throw Error(ErrorCode::ConfigError, what + " expects name:lo:hi:count, got '" + spec + "'");
  Axis ax{parts[0], io::parse_double(parts[1], what), io::parse_double(parts[2], what),
          static_cast<int>(io::parse_long(parts[3], what))};
  if (ax.n < 2) throw Error(ErrorCode::ConfigError, what + ": sample count must be at least 2");
  if (!std::isfinite(ax.lo) || !std::isfinite(ax.hi)) throw Error(ErrorCode::ConfigError, what + ": range not finite");
  const bool eps_axis = ax.name.size() == 2 && ax.name[0] == 'e' && ax.name[1] >= '0' && ax.name[1] <= '2';
  if (ax.name != "d" && ax.name != "scale" && !eps_axis)
    throw Error(ErrorCode::ConfigError, what + ": axis must be d, e0, e1, e2 or scale");
  return ax;
}

struct MapArgs {
  ConfigArgs cfg;
  std::string x, y, eps, out;
  double d = 0.5;
};

int cmd_regime_map(const MapArgs& a) {
  const PointEnergy base{load_config(a.cfg)};
  if (base.cfg.variant == Variant::Linear || base.strain_size() == 1)
    throw Error(ErrorCode::ConfigError, "regime-map needs the 2D relaxed or the scalar3d variant");
  const Axis ax = parse_axis(a.x, "--x");
  const Axis ay = parse_axis(a.y, "--y");
  if (ax.name == ay.name) throw Error(ErrorCode::ConfigError, "--x and --y must differ");
  const Vec e0 = a.eps.empty() ? Vec::Zero(base.strain_size()) : to_vec(io::parse_list(a.eps, "--eps"));
  if (e0.size() != base.strain_size())
    throw Error(ErrorCode::ConfigError, "--eps needs " + std::to_string(base.strain_size()) + " components");
  for (const Axis* axis : {&ax, &ay})
    if (axis->name[0] == 'e' && axis->name[1] - '0' >= base.strain_size())
      throw Error(ErrorCode::ConfigError, "axis " + axis->name + " exceeds the strain size");

  io::CsvTable t;
  t.header = {ax.name, ay.name, "regime", "beta_star", "value", "flag"};
  int flagged = 0;
  for (int j = 0; j < ay.n; ++j) {
    for (int i = 0; i < ax.n; ++i) {
      PointEnergy pe = base;
      double d = a.d;
      Vec e = e0;
      for (const auto& [axis, v] : {std::pair{ax, ax.at(i)}, std::pair{ay, ay.at(j)}}) {
        if (axis.name == "d") {
          d = v;
        } else if (axis.name == "scale") {
          pe.scale_eigenstrains(v);
        } else {
          e(axis.name[1] - '0') = v;
        }
      }
      std::vector<std::string> row = {io::fmt(ax.at(i)), io::fmt(ay.at(j))};
      try {
        const RelaxedEval r = pe.eval(d, e);
        row.insert(row.end(), {std::to_string(static_cast<int>(r.regime)), io::fmt(r.beta_star), io::fmt(r.value), "0"});
      } catch (const Error& err) {
        ++flagged;
        std::cerr << "row (" << i << "," << j << ") flagged: " << err.what() << "\n";
        row.insert(row.end(), {"-1", "nan", "nan", "1"});
      }
      t.add(row);
    }
  }
  if (a.out.empty()) {
    std::cout << t.str();
  } else {
    t.write(a.out);
  }
  return flagged ? kPartial : kOk;
}

struct VerifyArgs {
  std::vector<std::string> suites;
  std::optional<double> tol;
  std::uint64_t seed = verify::Options{}.seed;
  std::string out;
  std::string work_dir = "verify_work";
  bool list = false;
};

int cmd_verify(const VerifyArgs& a) {
  if (a.list) {
    for (const auto& s : verify::suites()) std::cout << s.name << "  " << s.description << "\n";
    return kOk;
  }
  verify::Options opt;
  opt.seed = a.seed;
  opt.tol = a.tol;
  opt.work_dir = a.work_dir;
  std::vector<verify::Check> checks;
  std::vector<std::string> names = a.suites;
  if (names.empty())
    for (const auto& s : verify::suites()) names.push_back(s.name);
  for (const std::string& n : names) {
    auto part = verify::run_suite(n, opt);
    for (const auto& c : part) {
      std::cerr << (c.pass ? "PASS " : "FAIL ") << c.suite << ": " << c.name << " = " << c.measured
                << (c.upper ? " <= " : " >= ") << c.threshold << "\n";
    }
    checks.insert(checks.end(), part.begin(), part.end());
  }
  const io::CsvTable t = verify::report(checks);
  if (a.out.empty()) {
    std::cout << t.str();
  } else {
    t.write(a.out);
  }
  return verify::all_pass(checks) ? kOk : kVerifyFail;
}

struct SimulateArgs {
  ConfigArgs cfg;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, const std::string& command) {
  const SimConfig c = load_config(a.cfg);
  RunSummary s;
  try {
    s = run_simulation(c, a.out, command);
  } catch (const Error& err) {
    std::cerr << "simulation error: " << err.what() << "\n";
    return kSimulation;
  }
  std::cout << "status = " << s.status << "\n"
            << "accepted_steps = " << s.accepted_steps << "\n"
            << "rejected_attempts = " << s.rejected_attempts << "\n"
            << "snapshots = " << s.snapshots << "\n"
            << "energy_initial = " << io::fmt(s.initial.energy) << "\n"
            << "energy_final = " << io::fmt(s.final.energy) << "\n"
            << "max_energy_increase = " << io::fmt(s.max_energy_increase) << "\n"
            << "max_elastic_residual = " << io::fmt(s.max_elastic_residual) << "\n"
            << "range_warning = " << (s.range_warning ? 1 : 0) << "\n"
            << "seconds = " << io::fmt(s.seconds) << "\n";
  if (s.status != "ok") {
    std::cerr << s.message << "\n";
    return kSimulation;
  }
  return kOk;
}

struct ConvergenceArgs {
  ConfigArgs cfg;
  std::string kind = "time";
  int levels = 3;
  int n0 = 8;
  std::string out;
};

int cmd_convergence(const ConvergenceArgs& a) {
  std::vector<ConvergenceRow> rows;
  if (a.kind == "mms") {
    rows = convergence_mms(a.n0, a.levels);
  } else {
    const SimConfig c = load_config(a.cfg);
    try {
      rows = convergence_time(c, a.levels);
    } catch (const Error& err) {
      if (err.code() == ErrorCode::ConfigError) throw;
      std::cerr << "simulation error: " << err.what() << "\n";
      return kSimulation;
    }
  }
  const io::CsvTable t = convergence_table(rows);
  if (a.out.empty()) {
    std::cout << t.str();
  } else {
    t.write(a.out);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  configure_threads();
  CLI::App app{"microlax: elastically extended Allen-Cahn/Cahn-Hilliard with relaxed energies"};
  app.set_version_flag("--version", MICROLAX_VERSION);
  app.require_subcommand(1);

  EnergyArgs ea;
  auto* energy = app.add_subcommand("energy", "evaluate the elastic energy at one point");
  add_config_options(energy, ea.cfg, false);
  energy->add_option("--d", ea.d, "phase fraction");
  energy->add_option("--eps", ea.eps, "strain, comma list (Mandel order in 2D)");
  energy->add_flag("--csv", ea.csv, "one CSV row instead of key = value lines");

  MapArgs ma;
  auto* rmap = app.add_subcommand("regime-map", "regime, beta* and energy over a 2D parameter grid");
  add_config_options(rmap, ma.cfg, false);
  rmap->add_option("--x", ma.x, "axis name:lo:hi:count; name is d, e0, e1, e2 or scale")->required();
  rmap->add_option("--y", ma.y, "second axis, same format")->required();
  rmap->add_option("--d", ma.d, "fixed phase fraction");
  rmap->add_option("--eps", ma.eps, "fixed strain, comma list");
  rmap->add_option("--out", ma.out, "CSV path (default stdout)");

  VerifyArgs va;
  auto* ver = app.add_subcommand("verify", "run the property suites");
  ver->add_option("--suite", va.suites, "suite name (repeatable; default all)");
  ver->add_option("--tol", va.tol, "replace every error tolerance");
  ver->add_option("--seed", va.seed, "base seed");
  ver->add_option("--out", va.out, "report CSV path (default stdout)");
  ver->add_option("--work-dir", va.work_dir, "scratch directory for simulation checks");
  ver->add_flag("--list", va.list, "list suites and exit");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "run the coupled phase-field simulation");
  add_config_options(sim, sa.cfg, true);
  sim->add_option("--out", sa.out, "output directory")->required();

  ConvergenceArgs ca;
  auto* conv = app.add_subcommand("convergence", "refinement study with observed orders");
  add_config_options(conv, ca.cfg, true);
  conv->add_option("--kind", ca.kind, "time | mms")->check(CLI::IsMember({"time", "mms"}));
  conv->add_option("--levels", ca.levels, "refinement levels (at least 3)");
  conv->add_option("--n0", ca.n0, "coarsest grid for mms");
  conv->add_option("--out", ca.out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  std::string command;
  for (int i = 0; i < argc; ++i) command += (i ? " " : "") + std::string(argv[i]);

  try {
    if (*energy) return cmd_energy(ea);
    if (*rmap) return cmd_regime_map(ma);
    if (*ver) return cmd_verify(va);
    if (*sim) return cmd_simulate(sa, command);
    if (*conv) return cmd_convergence(ca);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    if (e.code() == ErrorCode::ConfigError) return kUsage;
    return *sim || *conv ? kSimulation : kEvaluator;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
