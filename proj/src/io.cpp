#include "microlax/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace microlax::io {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::string fmt(long v) { return std::to_string(v); }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& what, const std::string& value) {
  throw Error(ErrorCode::ConfigError, what + ": cannot parse '" + value + "'");
}

}  // namespace

double parse_double(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  double v = 0.0;
  const char* first = t.data();
  if (!t.empty() && t[0] == '+') ++first;
  const auto r = std::from_chars(first, t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) bad(what, s);
  return v;
}

long parse_long(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  long v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) bad(what, s);
  return v;
}

bool parse_bool(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  bad(what, s);
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(item, what));
  if (out.empty()) bad(what, s);
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s;
}

Ini Ini::parse(const std::string& text) {
  Ini ini;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto c = line.find_first_of("#;");
    if (c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      ini.sections_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || section.empty()) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected key = value inside a section");
    }
    const std::string key = trim(line.substr(0, eq));
    if (ini.sections_[section].count(key)) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": duplicate key " + key);
    }
    ini.sections_[section][key] = trim(line.substr(eq + 1));
  }
  return ini;
}

Ini Ini::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::optional<std::string> Ini::get(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

void Ini::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

std::string Ini::dump() const {
  std::string out;
  for (const auto& [name, sec] : sections_) {
    if (!out.empty()) out += "\n";
    out += "[" + name + "]\n";
    for (const auto& [k, v] : sec) out += k + " = " + v + "\n";
  }
  return out;
}

namespace {

// Reads keys from one section and remembers which ones were consumed.
class Reader {
 public:
  Reader(const Ini& ini, std::string section) : ini_(ini), section_(std::move(section)) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.push_back(key);
    return ini_.get(section_, key);
  }
  void num(const std::string& key, double& v) {
    if (auto s = raw(key)) v = parse_double(*s, section_ + "." + key);
  }
  void num(const std::string& key, int& v) {
    if (auto s = raw(key)) v = static_cast<int>(parse_long(*s, section_ + "." + key));
  }
  void num(const std::string& key, long& v) {
    if (auto s = raw(key)) v = parse_long(*s, section_ + "." + key);
  }
  void flag(const std::string& key, bool& v) {
    if (auto s = raw(key)) v = parse_bool(*s, section_ + "." + key);
  }
  void text(const std::string& key, std::string& v) {
    if (auto s = raw(key)) v = *s;
  }
  std::optional<std::vector<double>> list(const std::string& key) {
    if (auto s = raw(key)) return parse_list(*s, section_ + "." + key);
    return std::nullopt;
  }
  void finish() const {
    if (!ini_.has(section_)) return;
    for (const auto& [k, v] : ini_.sections().at(section_)) {
      bool known = false;
      for (const auto& u : used_) known = known || u == k;
      if (!known) throw Error(ErrorCode::ConfigError, "unknown key " + section_ + "." + k);
    }
  }
  const std::string& name() const { return section_; }

 private:
  const Ini& ini_;
  std::string section_;
  std::vector<std::string> used_;
};

SymTensor tensor_from(const std::vector<double>& v, int dim, const std::string& what) {
  if (static_cast<int>(v.size()) != mandel_size(dim)) {
    throw Error(ErrorCode::ConfigError, what + ": expected " + std::to_string(mandel_size(dim)) + " Mandel entries");
  }
  Vec m(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) m(i) = v[i];
  return SymTensor(dim, m);
}

// alpha = full Mandel matrix (row-major), or cubic = c11, c12, c44, or
// isotropic = lame, shear.
std::optional<ElasticModulus> modulus_from(Reader& r, const std::string& key, int dim) {
  const auto full = r.list(key);
  const auto cubic = r.list(key + "_cubic");
  const auto iso = r.list(key + "_isotropic");
  const int given = (full ? 1 : 0) + (cubic ? 1 : 0) + (iso ? 1 : 0);
  if (given == 0) return std::nullopt;
  const std::string what = r.name() + "." + key;
  if (given > 1) throw Error(ErrorCode::ConfigError, what + ": give exactly one of " + key + ", " + key + "_cubic, " + key + "_isotropic");
  if (full) {
    const int n = mandel_size(dim);
    if (static_cast<int>(full->size()) != n * n) {
      throw Error(ErrorCode::ConfigError, what + ": expected " + std::to_string(n * n) + " entries");
    }
    Mat m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = (*full)[i * n + j];
    return ElasticModulus::from_mandel(m);
  }
  if (dim != 2) throw Error(ErrorCode::ConfigError, what + ": cubic and isotropic forms need dim = 2");
  if (cubic) {
    if (cubic->size() != 3) throw Error(ErrorCode::ConfigError, what + "_cubic: expected c11, c12, c44");
    return ElasticModulus::cubic((*cubic)[0], (*cubic)[1], (*cubic)[2]);
  }
  if (iso->size() != 2) throw Error(ErrorCode::ConfigError, what + "_isotropic: expected lame, shear");
  return ElasticModulus::isotropic((*iso)[0], (*iso)[1]);
}

std::vector<double> mat_list(const Mat& m) {
  std::vector<double> v;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
  return v;
}

std::vector<double> vec_list(const Vec& x) { return std::vector<double>(x.data(), x.data() + x.size()); }

Eigen::Vector2d vec2_from(const std::vector<double>& v, const std::string& what) {
  if (v.size() != 2) throw Error(ErrorCode::ConfigError, what + ": expected 2 entries");
  return {v[0], v[1]};
}

Eigen::Matrix2d mat2_from(const std::vector<double>& v, const std::string& what) {
  if (v.size() != 4) throw Error(ErrorCode::ConfigError, what + ": expected 4 entries (row-major 2x2)");
  Eigen::Matrix2d m;
  m << v[0], v[1], v[2], v[3];
  return m;
}

template <class E>
E enum_from(const std::string& s, const std::vector<std::pair<std::string, E>>& table, const std::string& what) {
  for (const auto& [name, value] : table)
    if (name == s) return value;
  bad(what, s);
}

const std::vector<std::pair<std::string, Variant>> kVariants = {
    {"linear", Variant::Linear}, {"relaxed", Variant::Relaxed}, {"scalar3d", Variant::Scalar3d}};
const std::vector<std::pair<std::string, Stepper>> kSteppers = {
    {"semi_implicit", Stepper::SemiImplicit}, {"minimizing_movement", Stepper::MinimizingMovement}};
const std::vector<std::pair<std::string, MuConvention>> kMu = {{"standard", MuConvention::Standard},
                                                              {"literal", MuConvention::Literal}};

SimConfig read_config(const Ini& ini) {
  static const std::vector<std::string> known = {"run",  "grid",   "chem",    "phase1", "phase2", "load",
                                                 "linear", "anti", "relaxed", "solver", "init",   "manifest"};
  for (const auto& [name, sec] : ini.sections()) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw Error(ErrorCode::ConfigError, "unknown section [" + name + "]");
    }
  }
  SimConfig c;

  Reader run(ini, "run");
  if (auto v = run.raw("variant")) c.variant = enum_from(*v, kVariants, "run.variant");
  if (auto v = run.raw("stepper")) c.stepper = enum_from(*v, kSteppers, "run.stepper");
  if (auto v = run.raw("mu_convention")) c.mu_convention = enum_from(*v, kMu, "run.mu_convention");
  run.num("dt", c.dt);
  run.num("t_end", c.t_end);
  run.num("max_steps", c.max_steps);
  run.num("max_halvings", c.max_halvings);
  run.num("dt_growth", c.dt_growth);
  run.flag("freeze_a", c.freeze_a);
  if (auto v = run.raw("seed")) c.seed = static_cast<std::uint64_t>(parse_long(*v, "run.seed"));
  run.flag("deterministic", c.deterministic);
  run.num("snapshot_every", c.snapshot_every);
  run.num("diag_every", c.diag_every);
  run.flag("vtk", c.vtk);
  run.finish();

  Reader grid(ini, "grid");
  bool dim_given = ini.get("grid", "dim").has_value();
  grid.num("dim", c.grid.dim);
  grid.num("nx", c.grid.nx);
  grid.num("ny", c.grid.ny);
  grid.num("lx", c.grid.lx);
  grid.num("ly", c.grid.ly);
  grid.finish();
  if (!dim_given && c.variant == Variant::Scalar3d) c.grid.dim = 2;
  const int dim = c.grid.dim;
  if (dim != 1 && dim != 2) throw Error(ErrorCode::ConfigError, "grid.dim must be 1 or 2");
  if (dim == 1) c.grid.ny = 1;
  if (dim == 2 && !ini.get("grid", "ny")) c.grid.ny = c.grid.nx;

  Reader chem(ini, "chem");
  chem.num("theta", c.chem.theta);
  chem.num("kappa1", c.chem.kappa1);
  chem.num("kappa2", c.chem.kappa2);
  chem.num("lambda", c.chem.lambda);
  chem.num("g_delta", c.chem.g_delta);
  chem.num("mobility", c.mobility);
  chem.finish();

  // phase data defaults: identity moduli, zero eigenstrains
  c.phases = PhaseParams::neutral(dim);
  for (int k = 1; k <= 2; ++k) {
    Reader ph(ini, "phase" + std::to_string(k));
    if (auto m = modulus_from(ph, "alpha", dim)) (k == 1 ? c.phases.alpha1 : c.phases.alpha2) = *m;
    if (auto t = ph.list("eps_t")) (k == 1 ? c.phases.eps_t1 : c.phases.eps_t2) = tensor_from(*t, dim, ph.name() + ".eps_t");
    ph.num("w", k == 1 ? c.phases.w1 : c.phases.w2);
    ph.finish();
  }

  Reader load(ini, "load");
  const auto sig = load.list("sigma_ext");
  load.finish();

  Reader lin(ini, "linear");
  c.linear.stiffness = ElasticModulus::identity(dim);
  c.linear.eps_bar = SymTensor(dim);
  if (auto m = modulus_from(lin, "stiffness", dim)) c.linear.stiffness = *m;
  if (auto m = modulus_from(lin, "stiffness_other", dim)) c.linear.stiffness_other = *m;
  if (auto t = lin.list("eps_bar")) c.linear.eps_bar = tensor_from(*t, dim, "linear.eps_bar");
  lin.finish();

  Reader anti(ini, "anti");
  if (auto v = anti.list("alpha1")) c.anti.alpha1 = mat2_from(*v, "anti.alpha1");
  if (auto v = anti.list("alpha2")) c.anti.alpha2 = mat2_from(*v, "anti.alpha2");
  if (auto v = anti.list("f1")) c.anti.f1 = vec2_from(*v, "anti.f1");
  if (auto v = anti.list("f2")) c.anti.f2 = vec2_from(*v, "anti.f2");
  anti.num("w1", c.anti.w1);
  anti.num("w2", c.anti.w2);
  anti.finish();

  if (sig) {
    if (c.variant == Variant::Scalar3d) {
      c.anti.sigma_ext = vec2_from(*sig, "load.sigma_ext");
    } else {
      c.phases.sigma_ext = tensor_from(*sig, dim, "load.sigma_ext");
    }
  }

  Reader rel(ini, "relaxed");
  rel.flag("check_commuting", c.relaxed.check_commuting);
  rel.num("commute_tol", c.relaxed.commute_tol);
  rel.flag("beta_eps_chain_rule", c.relaxed.beta_eps_chain_rule);
  rel.num("max_condition", c.relaxed.max_condition);
  rel.num("max_bisection", c.relaxed.max_bisection);
  rel.finish();

  Reader sol(ini, "solver");
  sol.num("tol_elast_rel", c.tol_elast_rel);
  sol.num("tol_elast_abs", c.tol_elast_abs);
  sol.num("cg_tol", c.cg_tol);
  sol.num("tol_mm", c.tol_mm);
  sol.num("mm_max_iter", c.mm_max_iter);
  sol.finish();

  Reader init(ini, "init");
  init.num("a0", c.a0);
  init.num("b0", c.b0);
  init.num("noise", c.noise);
  init.num("noise_b", c.noise_b);
  init.text("a_file", c.init_a_file);
  init.text("b_file", c.init_b_file);
  init.finish();

  c.validate();
  return c;
}

}  // namespace

SimConfig config_from_ini(const Ini& ini) {
  // invalid material data in a config file is a usage error
  try {
    return read_config(ini);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

Ini config_to_ini(const SimConfig& c) {
  Ini ini;
  ini.set("run", "variant", variant_name(c.variant));
  ini.set("run", "stepper", stepper_name(c.stepper));
  ini.set("run", "mu_convention", c.mu_convention == MuConvention::Standard ? "standard" : "literal");
  ini.set("run", "dt", fmt(c.dt));
  ini.set("run", "t_end", fmt(c.t_end));
  ini.set("run", "max_steps", fmt(c.max_steps));
  ini.set("run", "max_halvings", fmt(static_cast<long>(c.max_halvings)));
  ini.set("run", "dt_growth", fmt(c.dt_growth));
  ini.set("run", "freeze_a", c.freeze_a ? "true" : "false");
  ini.set("run", "seed", std::to_string(c.seed));
  ini.set("run", "deterministic", c.deterministic ? "true" : "false");
  ini.set("run", "snapshot_every", fmt(c.snapshot_every));
  ini.set("run", "diag_every", fmt(c.diag_every));
  ini.set("run", "vtk", c.vtk ? "true" : "false");

  ini.set("grid", "dim", fmt(static_cast<long>(c.grid.dim)));
  ini.set("grid", "nx", fmt(static_cast<long>(c.grid.nx)));
  ini.set("grid", "ny", fmt(static_cast<long>(c.grid.ny)));
  ini.set("grid", "lx", fmt(c.grid.lx));
  ini.set("grid", "ly", fmt(c.grid.ly));

  ini.set("chem", "theta", fmt(c.chem.theta));
  ini.set("chem", "kappa1", fmt(c.chem.kappa1));
  ini.set("chem", "kappa2", fmt(c.chem.kappa2));
  ini.set("chem", "lambda", fmt(c.chem.lambda));
  ini.set("chem", "g_delta", fmt(c.chem.g_delta));
  ini.set("chem", "mobility", fmt(c.mobility));

  if (c.variant == Variant::Relaxed) {
    ini.set("phase1", "alpha", join(mat_list(c.phases.alpha1.mandel())));
    ini.set("phase1", "eps_t", join(vec_list(c.phases.eps_t1.mandel())));
    ini.set("phase1", "w", fmt(c.phases.w1));
    ini.set("phase2", "alpha", join(mat_list(c.phases.alpha2.mandel())));
    ini.set("phase2", "eps_t", join(vec_list(c.phases.eps_t2.mandel())));
    ini.set("phase2", "w", fmt(c.phases.w2));
  }
  if (c.variant == Variant::Linear) {
    ini.set("linear", "stiffness", join(mat_list(c.linear.stiffness.mandel())));
    if (c.linear.stiffness_other) ini.set("linear", "stiffness_other", join(mat_list(c.linear.stiffness_other->mandel())));
    ini.set("linear", "eps_bar", join(vec_list(c.linear.eps_bar.mandel())));
  }
  if (c.variant == Variant::Scalar3d) {
    const auto& a = c.anti;
    ini.set("anti", "alpha1", join({a.alpha1(0, 0), a.alpha1(0, 1), a.alpha1(1, 0), a.alpha1(1, 1)}));
    ini.set("anti", "alpha2", join({a.alpha2(0, 0), a.alpha2(0, 1), a.alpha2(1, 0), a.alpha2(1, 1)}));
    ini.set("anti", "f1", join({a.f1(0), a.f1(1)}));
    ini.set("anti", "f2", join({a.f2(0), a.f2(1)}));
    ini.set("anti", "w1", fmt(a.w1));
    ini.set("anti", "w2", fmt(a.w2));
    ini.set("load", "sigma_ext", join({a.sigma_ext(0), a.sigma_ext(1)}));
  } else {
    ini.set("load", "sigma_ext", join(vec_list(c.phases.sigma_ext.mandel())));
  }

  ini.set("relaxed", "check_commuting", c.relaxed.check_commuting ? "true" : "false");
  ini.set("relaxed", "commute_tol", fmt(c.relaxed.commute_tol));
  ini.set("relaxed", "beta_eps_chain_rule", c.relaxed.beta_eps_chain_rule ? "true" : "false");
  ini.set("relaxed", "max_condition", fmt(c.relaxed.max_condition));
  ini.set("relaxed", "max_bisection", fmt(static_cast<long>(c.relaxed.max_bisection)));

  ini.set("solver", "tol_elast_rel", fmt(c.tol_elast_rel));
  ini.set("solver", "tol_elast_abs", fmt(c.tol_elast_abs));
  ini.set("solver", "cg_tol", fmt(c.cg_tol));
  ini.set("solver", "tol_mm", fmt(c.tol_mm));
  ini.set("solver", "mm_max_iter", fmt(static_cast<long>(c.mm_max_iter)));

  ini.set("init", "a0", fmt(c.a0));
  ini.set("init", "b0", fmt(c.b0));
  ini.set("init", "noise", fmt(c.noise));
  ini.set("init", "noise_b", fmt(c.noise_b));
  if (!c.init_a_file.empty()) ini.set("init", "a_file", c.init_a_file);
  if (!c.init_b_file.empty()) ini.set("init", "b_file", c.init_b_file);
  return ini;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void CsvTable::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  f << str();
}

void write_field_csv(const std::string& path, const Grid& g, const Field& f) {
  CsvTable t;
  t.header = {"i", "j", "x", "y", "value"};
  const int ny = g.dim == 1 ? 1 : g.ny;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double y = g.dim == 1 ? 0.0 : (j + 0.5) * g.hy();
      t.add({std::to_string(i), std::to_string(j), fmt((i + 0.5) * g.hx()), fmt(y), fmt(f[j * g.nx + i])});
    }
  }
  t.write(path);
}

Field read_field(const std::string& path, int expected_size) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read field file " + path);
  std::string line;
  Field f;
  int column = -1;
  bool first = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (first) {
      first = false;
      for (std::size_t k = 0; k < cells.size(); ++k)
        if (cells[k] == "value") column = static_cast<int>(k);
      if (column >= 0) continue;
      if (cells.size() != 1) throw Error(ErrorCode::ConfigError, path + ": expected a 'value' column");
      column = 0;
    }
    if (column >= static_cast<int>(cells.size())) throw Error(ErrorCode::ConfigError, path + ": short row");
    f.push_back(parse_double(cells[column], path));
  }
  if (static_cast<int>(f.size()) != expected_size) {
    throw Error(ErrorCode::ConfigError, path + ": expected " + std::to_string(expected_size) + " values, found " +
                                            std::to_string(f.size()));
  }
  return f;
}

void write_vtk(const std::string& path, const Grid& g, const std::vector<std::pair<std::string, const Field*>>& fields) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  const int ny = g.dim == 1 ? 1 : g.ny;
  f << "# vtk DataFile Version 3.0\nmicrolax fields\nASCII\nDATASET STRUCTURED_POINTS\n";
  f << "DIMENSIONS " << g.nx << ' ' << ny << " 1\n";
  f << "SPACING " << fmt(g.hx()) << ' ' << fmt(g.hy()) << " 1\n";
  f << "ORIGIN " << fmt(0.5 * g.hx()) << ' ' << fmt(g.dim == 1 ? 0.0 : 0.5 * g.hy()) << " 0\n";
  f << "POINT_DATA " << g.nx * ny << '\n';
  for (const auto& [name, data] : fields) {
    f << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : *data) f << fmt(v) << '\n';
  }
}

std::string RunManifest::str() const {
  Ini ini = config_to_ini(config);
  ini.set("manifest", "version", version);
  if (!command.empty()) ini.set("manifest", "command", command);
  ini.set("manifest", "started", started);
  ini.set("manifest", "finished", finished);
  ini.set("manifest", "status", status);
  ini.set("manifest", "accepted_steps", fmt(accepted_steps));
  ini.set("manifest", "rejected_attempts", fmt(rejected_attempts));
  if (final_diagnostics) {
    const Diagnostics& d = *final_diagnostics;
    ini.set("manifest", "final_time", fmt(d.time));
    ini.set("manifest", "final_energy", fmt(d.energy));
    ini.set("manifest", "final_mass", fmt(d.mass));
    ini.set("manifest", "final_elastic_residual", fmt(d.elastic_residual));
  }
  return ini.dump();
}

void RunManifest::write(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path);
  f << str();
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace microlax::io
