#include "microlax/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "microlax/fem.hpp"
#include "microlax/rng.hpp"

namespace microlax::oracle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double phase_energy(int phase, const Vec& e, const PhaseParams& p) {
  const Mat& a = phase == 1 ? p.alpha1.mandel() : p.alpha2.mandel();
  const Vec r = e - (phase == 1 ? p.eps_t1.mandel() : p.eps_t2.mandel());
  return 0.5 * r.dot(a * r) + (phase == 1 ? p.w1 : p.w2);
}

}  // namespace

double scan_1d(double d, double eps, const PhaseParams& p, int grid_points) {
  if (d >= 1.0) return phase_energy(1, Vec::Constant(1, eps), p);
  if (d <= 0.0) return phase_energy(2, Vec::Constant(1, eps), p);
  auto f = [&](double e1) {
    const double e2 = (eps - d * e1) / (1.0 - d);
    return d * phase_energy(1, Vec::Constant(1, e1), p) + (1.0 - d) * phase_energy(2, Vec::Constant(1, e2), p);
  };
  const double t1 = p.eps_t1.mandel()(0);
  const double t2 = p.eps_t2.mandel()(0);
  const double span = std::abs(t2 - t1) + std::abs(eps) + 1.0;
  const double lo = eps - 5.0 * span;
  const double step = 10.0 * span / (grid_points - 1);
  int best = 0;
  double fbest = kInf;
  for (int i = 0; i < grid_points; ++i) {
    const double v = f(lo + step * i);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  double x = lo + step * std::clamp(best, 1, grid_points - 2);
  double h = step;
  for (int pass = 0; pass < 2; ++pass) {
    const double fm = f(x - h), f0 = f(x), fp = f(x + h);
    const double curv = fm - 2.0 * f0 + fp;
    if (curv > 0.0) x -= 0.5 * h * (fp - fm) / curv;
    fbest = std::min(fbest, f(x));
    h *= 1e-2;
  }
  return fbest;
}

namespace {

using LeafMap = Eigen::Matrix<double, 3, Eigen::Dynamic>;

struct Leaf {
  double weight;
  int phase;
  LeafMap map;  // leaf strain = e + map * x
};

Eigen::Matrix<double, 3, 2> compat(double theta) {
  // Mandel coordinates of sym(a (x) n) as a linear map of a
  const double n1 = std::cos(theta), n2 = std::sin(theta);
  Eigen::Matrix<double, 3, 2> s;
  s << n1, 0.0, 0.0, n2, n2 / kSqrt2, n1 / kSqrt2;
  return s;
}

// Minimises the weighted leaf energies over the jump amplitudes x.
LaminateCandidate solve_tree(const std::vector<Leaf>& leaves, const SymTensor& e, const PhaseParams& p) {
  const int nx = static_cast<int>(leaves.front().map.cols());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nx, nx);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(nx);
  const Vec eps = e.mandel();
  for (const Leaf& l : leaves) {
    if (l.weight <= 0.0) continue;
    const Mat& a = l.phase == 1 ? p.alpha1.mandel() : p.alpha2.mandel();
    const Vec t = l.phase == 1 ? p.eps_t1.mandel() : p.eps_t2.mandel();
    const Eigen::Matrix3d a3 = a;
    h += l.weight * l.map.transpose() * a3 * l.map;
    g += l.weight * l.map.transpose() * (a3 * Eigen::Vector3d(eps - t));
  }
  const Eigen::VectorXd x = -h.completeOrthogonalDecomposition().solve(g);
  LaminateCandidate c;
  c.energy = 0.0;
  for (const Leaf& l : leaves) {
    const Vec s = eps + Vec(l.map * x);
    c.leaf_strains.push_back(s);
    c.leaf_weights.push_back(l.weight);
    if (l.weight > 0.0) c.energy += l.weight * phase_energy(l.phase, s, p);
  }
  return c;
}

}  // namespace

LaminateCandidate rank1_laminate(double d, const SymTensor& e, const PhaseParams& p, double theta) {
  const Eigen::Matrix<double, 3, 2> s = compat(theta);
  std::vector<Leaf> leaves{{d, 1, -(1.0 - d) * s}, {1.0 - d, 2, d * s}};
  LaminateCandidate c = solve_tree(leaves, e, p);
  c.rank = 1;
  c.angles = {theta};
  c.fractions = {d};
  return c;
}

LaminateCandidate rank2_laminate(double d, const SymTensor& e, const PhaseParams& p, double theta_out,
                                 double theta_in, double lambda, int pure_phase) {
  LaminateCandidate bad;
  bad.energy = kInf;
  if (!(lambda >= 0.0 && lambda < 1.0)) return bad;
  const double mu = pure_phase == 1 ? (d - lambda) / (1.0 - lambda) : d / (1.0 - lambda);
  if (!(mu >= 0.0 && mu <= 1.0)) return bad;
  const Eigen::Matrix<double, 3, 2> sn = compat(theta_out);
  const Eigen::Matrix<double, 3, 2> sm = compat(theta_in);
  LeafMap la(3, 4), lb1(3, 4), lb2(3, 4);
  la << (1.0 - lambda) * sn, Eigen::Matrix<double, 3, 2>::Zero();
  lb1 << -lambda * sn, (1.0 - mu) * sm;
  lb2 << -lambda * sn, -mu * sm;
  std::vector<Leaf> leaves{{lambda, pure_phase, la}, {(1.0 - lambda) * mu, 1, lb1}, {(1.0 - lambda) * (1.0 - mu), 2, lb2}};
  LaminateCandidate c = solve_tree(leaves, e, p);
  c.rank = 2;
  c.angles = {theta_out, theta_in};
  c.fractions = {lambda, mu};
  c.pure_phase = pure_phase;
  return c;
}

namespace {

// Golden-section refinement of a one-dimensional bracket.
template <class F>
double golden_min(F f, double a, double b, int iters, double& xbest) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), dd = a + r * (b - a);
  double fc = f(c), fd = f(dd);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = dd;
      dd = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = dd;
      fc = fd;
      dd = a + r * (b - a);
      fd = f(dd);
    }
  }
  xbest = fc < fd ? c : dd;
  return std::min(fc, fd);
}

// Plain Nelder-Mead on three parameters.
template <class F>
std::array<double, 3> nelder_mead(F f, std::array<double, 3> x0, std::array<double, 3> step, int iters) {
  std::array<std::array<double, 3>, 4> s;
  std::array<double, 4> fv;
  s[0] = x0;
  for (int i = 1; i < 4; ++i) {
    s[i] = x0;
    s[i][i - 1] += step[i - 1];
  }
  for (int i = 0; i < 4; ++i) fv[i] = f(s[i]);
  for (int it = 0; it < iters; ++it) {
    std::array<int, 4> idx{0, 1, 2, 3};
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    auto ss = s;
    auto ff = fv;
    for (int i = 0; i < 4; ++i) {
      s[i] = ss[idx[i]];
      fv[i] = ff[idx[i]];
    }
    std::array<double, 3> cen{0, 0, 0};
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) cen[k] += s[i][k] / 3.0;
    auto along = [&](double t) {
      std::array<double, 3> y;
      for (int k = 0; k < 3; ++k) y[k] = cen[k] + t * (s[3][k] - cen[k]);
      return y;
    };
    const auto xr = along(-1.0);
    const double fr = f(xr);
    if (fr < fv[0]) {
      const auto xe = along(-2.0);
      const double fe = f(xe);
      if (fe < fr) {
        s[3] = xe;
        fv[3] = fe;
      } else {
        s[3] = xr;
        fv[3] = fr;
      }
    } else if (fr < fv[2]) {
      s[3] = xr;
      fv[3] = fr;
    } else {
      const auto xc = along(fr < fv[3] ? -0.5 : 0.5);
      const double fc = f(xc);
      if (fc < std::min(fr, fv[3])) {
        s[3] = xc;
        fv[3] = fc;
      } else {
        for (int i = 1; i < 4; ++i) {
          for (int k = 0; k < 3; ++k) s[i][k] = s[0][k] + 0.5 * (s[i][k] - s[0][k]);
          fv[i] = f(s[i]);
        }
      }
    }
  }
  int best = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
  return s[best];
}

}  // namespace

LaminateSearchResult laminate_search_2d(double d, const SymTensor& e, const PhaseParams& p,
                                        const LaminateSearchOptions& opt) {
  LaminateSearchResult res;
  if (d <= 0.0 || d >= 1.0) {
    LaminateCandidate c;
    const int phase = d >= 1.0 ? 1 : 2;
    c.energy = phase_energy(phase, e.mandel(), p);
    c.leaf_strains = {e.mandel()};
    c.leaf_weights = {1.0};
    res.rank1 = c;
    res.rank2 = c;
    res.best = c.energy;
    return res;
  }
  // rank 1: all normals on the grid, then golden refinement of the best
  const double dth = M_PI / opt.angles;
  double best_theta = 0.0;
  res.rank1.energy = kInf;
  for (int i = 0; i < opt.angles; ++i) {
    const LaminateCandidate c = rank1_laminate(d, e, p, i * dth);
    if (c.energy < res.rank1.energy) {
      res.rank1 = c;
      best_theta = i * dth;
    }
  }
  if (opt.polish) {
    double th = best_theta;
    golden_min([&](double t) { return rank1_laminate(d, e, p, t).energy; }, best_theta - dth,
               best_theta + dth, 60, th);
    const LaminateCandidate c = rank1_laminate(d, e, p, th);
    if (c.energy < res.rank1.energy) res.rank1 = c;
  }
  res.rank2.energy = kInf;
  if (opt.rank2) {
    struct Seed {
      double energy, to, ti, s;
      int phase;
    };
    std::vector<Seed> seeds;
    const int na = opt.rank2_angles;
    const int nf = opt.rank2_fractions;
    for (int phase = 1; phase <= 2; ++phase) {
      const double lmax = phase == 1 ? d : 1.0 - d;
      for (int k = 0; k < nf; ++k) {
        const double s = (k + 0.5) / nf;
        for (int i = 0; i < na; ++i) {
          for (int j = 0; j < na; ++j) {
            const double to = M_PI * i / na, ti = M_PI * j / na;
            const double en = rank2_laminate(d, e, p, to, ti, s * lmax, phase).energy;
            seeds.push_back({en, to, ti, s, phase});
          }
        }
      }
    }
    const std::size_t keep = std::min<std::size_t>(opt.polish ? 6 : 1, seeds.size());
    std::partial_sort(seeds.begin(), seeds.begin() + keep, seeds.end(),
                      [](const Seed& a, const Seed& b) { return a.energy < b.energy; });
    for (std::size_t k = 0; k < keep; ++k) {
      const Seed& sd = seeds[k];
      const double lmax = sd.phase == 1 ? d : 1.0 - d;
      auto eval = [&](const std::array<double, 3>& x) {
        const double s = std::clamp(x[2], 0.0, 1.0 - 1e-12);
        return rank2_laminate(d, e, p, x[0], x[1], s * lmax, sd.phase);
      };
      std::array<double, 3> x{sd.to, sd.ti, sd.s};
      if (opt.polish) {
        x = nelder_mead([&](const std::array<double, 3>& y) { return eval(y).energy; }, x,
                        {M_PI / na, M_PI / na, 0.5 / nf}, 400);
      }
      const LaminateCandidate c = eval(x);
      if (c.energy < res.rank2.energy) res.rank2 = c;
    }
  }
  res.best = std::min(res.rank1.energy, res.rank2.energy);
  return res;
}

double CellProblem::fraction() const {
  return static_cast<double>(std::count(phase1.begin(), phase1.end(), 1)) / static_cast<double>(phase1.size());
}

CellProblem make_laminate_cell(int n, double d, const SymTensor& e, int periods, bool normal_x) {
  CellProblem cp;
  cp.n = n;
  cp.strain = e;
  cp.phase1.assign(static_cast<std::size_t>(n) * n, 0);
  std::vector<double> pos(n);
  for (int c = 0; c < n; ++c) pos[c] = std::fmod((c + 0.5) * periods / n, 1.0);
  auto cell = [&](int line, int k) { return normal_x ? k * n + line : line * n + k; };
  long count = 0;
  for (int c = 0; c < n; ++c) {
    if (pos[c] < d) {
      for (int k = 0; k < n; ++k) cp.phase1[cell(c, k)] = 1;
      count += n;
    }
  }
  const long target = std::lround(d * n * n);
  // flip cells in the lines nearest to the phase boundary in layer coordinates
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (count < target) {
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      auto key = [&](int c) { return pos[c] >= d ? pos[c] - d : 2.0; };
      return key(a) < key(b);
    });
  } else {
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      auto key = [&](int c) { return pos[c] < d ? d - pos[c] : 2.0; };
      return key(a) < key(b);
    });
  }
  for (int line : order) {
    for (int k = 0; k < n && count != target; ++k) {
      char& v = cp.phase1[cell(line, k)];
      if (count < target && v == 0) {
        v = 1;
        ++count;
      } else if (count > target && v == 1) {
        v = 0;
        --count;
      }
    }
    if (count == target) break;
  }
  return cp;
}

namespace {

struct CellSolver {
  fem::QuadMesh mesh;
  std::vector<char> fixed;
  Field f_ext;
  Field u;
  fem::EquilibriumOptions eo;

  CellSolver(int n, const SymTensor& e, double cg_tol) {
    mesh = fem::QuadMesh{n, n, 1.0 / n, 1.0 / n};
    const int nn = mesh.nodes();
    fixed.assign(2 * nn, 0);
    u.assign(2 * nn, 0.0);
    f_ext.assign(2 * nn, 0.0);
    const double e11 = e.component(0, 0), e22 = e.component(1, 1), e12 = e.component(0, 1);
    for (int j = 0; j <= n; ++j) {
      for (int i = 0; i <= n; ++i) {
        const int node = mesh.node(i, j);
        const double x = i * mesh.hx, y = j * mesh.hy;
        u[2 * node] = e11 * x + e12 * y;
        u[2 * node + 1] = e12 * x + e22 * y;
        if (i == 0 || j == 0 || i == n || j == n) fixed[2 * node] = fixed[2 * node + 1] = 1;
      }
    }
    eo.tol = 1e-12;
    eo.max_outer = 5;
    eo.cg = CgOptions{cg_tol, 1e-14, 100000};
  }

  double solve(const std::vector<char>& phase1, const PhaseParams& p, int& cg_its) {
    auto mat = [&](int cell, int, const Vec& e) {
      const int ph = phase1[cell] ? 1 : 2;
      const Mat& a = ph == 1 ? p.alpha1.mandel() : p.alpha2.mandel();
      const Vec r = e - (ph == 1 ? p.eps_t1.mandel() : p.eps_t2.mandel());
      fem::PointState s;
      s.stress = a * r;
      s.energy = 0.5 * r.dot(s.stress) + (ph == 1 ? p.w1 : p.w2);
      s.tangent = a;
      return s;
    };
    const fem::EquilibriumResult r = fem::solve_equilibrium(mesh, fem::FieldKind::Vector, mat, u, fixed, f_ext, eo);
    cg_its += r.cg_iterations;
    return r.energy;
  }
};

}  // namespace

CellResult cell_problem_min(const CellProblem& cp, const PhaseParams& p, const CellOptions& opt) {
  if (cp.n < 2 || static_cast<int>(cp.phase1.size()) != cp.n * cp.n) {
    throw Error(ErrorCode::InvalidArgument, "cell problem layout does not match n");
  }
  CellSolver solver(cp.n, cp.strain, opt.cg_tol);
  CellResult res;
  std::vector<char> cur = cp.phase1;
  double ecur = solver.solve(cur, p, res.cg_iterations);
  ++res.solves;
  res.energy = ecur;
  res.best_phase1 = cur;
  if (opt.anneal_moves <= 0) return res;

  Rng rng(opt.seed);
  const int n = cp.n;
  const double t0 = opt.temperature * std::max(std::abs(ecur), 1e-12);
  for (int k = 0; k < opt.anneal_moves; ++k) {
    int a = -1, b = -1;
    for (int tries = 0; tries < 1000 && a < 0; ++tries) {
      const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(n) * n));
      const int i = c % n, j = c / n;
      const int dir = static_cast<int>(rng.below(4));
      const int ni = i + (dir == 0) - (dir == 1);
      const int nj = j + (dir == 2) - (dir == 3);
      if (ni < 0 || nj < 0 || ni >= n || nj >= n) continue;
      const int nb = nj * n + ni;
      if (cur[c] != cur[nb]) {
        a = c;
        b = nb;
      }
    }
    if (a < 0) break;
    const Field u_saved = solver.u;
    std::swap(cur[a], cur[b]);
    const double enew = solver.solve(cur, p, res.cg_iterations);
    ++res.solves;
    const double temp = t0 * (1.0 - static_cast<double>(k) / opt.anneal_moves);
    const bool accept = enew < ecur || (temp > 0.0 && rng.uniform() < std::exp(-(enew - ecur) / temp));
    if (accept) {
      ecur = enew;
      ++res.accepted;
      if (enew < res.energy) {
        res.energy = enew;
        res.best_phase1 = cur;
      }
    } else {
      std::swap(cur[a], cur[b]);
      solver.u = u_saved;
    }
  }
  return res;
}

FdReport fd_check(const EnergyFn& w, double d, const Vec& e, double h) {
  const EnergyEval at = w(d, e);
  FdReport rep;
  const double fdd = (w(d + h, e).value - w(d - h, e).value) / (2.0 * h);
  rep.err_d = std::abs(at.d_d - fdd) / std::max(1.0, std::abs(fdd));
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    Vec ep = e, em = e;
    ep(k) += h;
    em(k) -= h;
    const double fd = (w(d, ep).value - w(d, em).value) / (2.0 * h);
    rep.err_eps = std::max(rep.err_eps, std::abs(at.d_eps(k) - fd) / std::max(1.0, std::abs(fd)));
  }
  rep.max_rel_error = std::max(rep.err_d, rep.err_eps);
  return rep;
}

}  // namespace microlax::oracle
