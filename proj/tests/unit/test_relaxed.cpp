#include <doctest.h>

#include <cmath>
#include <vector>

#include "fd.hpp"
#include "microlax/relaxed_energy.hpp"
#include "microlax/rng.hpp"

using namespace microlax;
using testing_support::central;
using testing_support::central_grad;

namespace {

PhaseParams planar(const ElasticModulus& a1, const ElasticModulus& a2, const SymTensor& t1,
                   const SymTensor& t2, double w1 = 0.0, double w2 = 0.0) {
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

PhaseParams scalar_phases(double a1, double a2, double t1, double t2, double w1 = 0, double w2 = 0) {
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

SymTensor diag(double a, double b) { return SymTensor::from_components(a, b, 0.0); }

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

double micro(const Mat& a, const Vec& r, double w) { return 0.5 * r.dot(a * r) + w; }

}  // namespace

TEST_CASE("gamma star") {
  const SymTensor z(2);
  const PhaseParams id = planar(ElasticModulus::identity(2), ElasticModulus::identity(2), z, z);
  CHECK(gamma_star(id).value == doctest::Approx(1.0).epsilon(1e-14));
  const PhaseParams cub = planar(ElasticModulus::cubic(3, 1, 1), ElasticModulus::cubic(3, 1, 1), z, z);
  CHECK(gamma_star(cub).value == doctest::Approx(2.0).epsilon(1e-14));
  const PhaseParams scaled = planar(ElasticModulus::cubic(30, 10, 10), ElasticModulus::cubic(30, 10, 10), z, z);
  CHECK(gamma_star(scaled).value == doctest::Approx(20.0).epsilon(1e-14));
  // cubic crystal: reciprocal eigenvalues are C11 - C12 and 2 C44 on the deviatoric modes
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const double c12 = rng.uniform(0, 2), c11 = c12 + rng.uniform(0.5, 3), c44 = rng.uniform(0.3, 2);
    const PhaseParams q = planar(ElasticModulus::cubic(c11, c12, c44), ElasticModulus::identity(2, 5.0), z, z);
    const GammaStar g = gamma_star(q);
    CHECK(g.gamma1 == doctest::Approx(std::min(c11 - c12, 2 * c44)).epsilon(1e-12));
    CHECK(g.gamma2 == doctest::Approx(5.0).epsilon(1e-12));
  }
}

TEST_CASE("phi closed forms") {
  const SymTensor z(2);
  const ElasticModulus id = ElasticModulus::identity(2);
  CHECK(phi(0.0, 0.5, z, planar(id, id, z, diag(1, -1))) == doctest::Approx(1.0));
  const PhaseParams p21 = planar(id, id, z, diag(2, 1));
  for (double b = 0.0; b < 0.99; b += 0.07) {
    const double ref = -(2 - b) * (1 - 2 * b) / std::pow(1 - b * b, 2);
    CHECK(phi(b, 0.3, z, p21) == doctest::Approx(ref).epsilon(1e-12));
  }
  const PhaseParams pid = planar(id, id, z, SymTensor::identity(2));
  for (double b = 0.0; b <= 1.0; b += 0.1) {
    CHECK(phi(b, 0.6, z, pid) == doctest::Approx(-1.0 / ((1 + b) * (1 + b))).epsilon(1e-12));
  }
  // homogeneous data: eps2^T - eps1^T = 0 with equal moduli
  CHECK(phi(0.4, 0.3, diag(0.3, 0.1), planar(id, id, diag(1, 2), diag(1, 2))) == 0.0);
}

TEST_CASE("closed-form regime instances") {
  const SymTensor z(2);
  const ElasticModulus id = ElasticModulus::identity(2);
  const Classification c1 = classify_regime(0.5, z, planar(id, id, z, diag(1, -1)));
  CHECK(c1.regime == Regime::One);
  CHECK(c1.beta_star == 0.0);
  const Classification c2 = classify_regime(0.5, z, planar(id, id, z, diag(2, 1)));
  CHECK(c2.regime == Regime::Two);
  CHECK(std::abs(c2.beta_star - 0.5) <= 1e-10);
  const Classification c3 = classify_regime(0.5, z, planar(id, id, z, SymTensor::identity(2)));
  CHECK(c3.regime == Regime::Three);
  CHECK(c3.beta_star == doctest::Approx(1.0).epsilon(1e-15));
  const Classification c0 = classify_regime(0.5, diag(0.2, 0.1), planar(id, id, diag(1, 1), diag(1, 1)));
  CHECK(c0.regime == Regime::Zero);

  const RelaxedEval e3 = eval_2d(0.5, z, planar(id, id, z, SymTensor::identity(2)));
  CHECK(e3.pseudo);
  CHECK(std::isfinite(e3.value));
}

TEST_CASE("root residual after bisection") {
  Rng rng(21);
  int found = 0;
  for (int i = 0; i < 400 && found < 50; ++i) {
    const PhaseParams p = planar(random_cubic(rng), random_cubic(rng), random_sym(rng, 1), random_sym(rng, 1));
    const SymTensor e = random_sym(rng, 1);
    const double d = rng.uniform(0.05, 0.95);
    const Classification c = classify_regime(d, e, p);
    if (c.regime != Regime::Two || c.beta_star == 0.0) continue;
    ++found;
    const Vec mis = misfit_of(e.mandel(), p);
    CHECK(std::abs(phi(c.beta_star, d, e, p)) <= 1e-10 * mis.squaredNorm());
    CHECK(c.beta_star <= c.gamma);
  }
  CHECK(found >= 20);
}

TEST_CASE("single-phase endpoints and averaging") {
  Rng rng(4);
  for (int i = 0; i < 300; ++i) {
    const PhaseParams p = planar(random_cubic(rng), random_cubic(rng), random_sym(rng, 1), random_sym(rng, 1),
                                 rng.uniform(0, 1), rng.uniform(0, 1));
    const SymTensor e = random_sym(rng, 2);
    const double w1 = micro(p.alpha1.mandel(), e.mandel() - p.eps_t1.mandel(), p.w1);
    const double w2 = micro(p.alpha2.mandel(), e.mandel() - p.eps_t2.mandel(), p.w2);
    const RelaxedEval at1 = eval_2d(1.0, e, p);
    const RelaxedEval at0 = eval_2d(0.0, e, p);
    CHECK(std::abs(at1.value - w1) <= 1e-12 * (1 + std::abs(w1)));
    CHECK(std::abs(at0.value - w2) <= 1e-12 * (1 + std::abs(w2)));
    CHECK((at1.d_eps - p.alpha1.mandel() * (e.mandel() - p.eps_t1.mandel())).norm() <= 1e-12 * (1 + w1));

    const double d = rng.uniform(0, 1);
    const RelaxedEval r = eval_2d(d, e, p);
    const Vec avg = d * r.eps1_star + (1 - d) * r.eps2_star;
    CHECK((avg - e.mandel()).norm() <= 1e-10 * (1 + e.norm()));
    CHECK(r.value <= d * w1 + (1 - d) * w2 + 1e-12);
    CHECK(r.beta_star >= 0.0);
    CHECK(r.beta_star <= gamma_star(p).value);
  }
}

TEST_CASE("equal moduli in Regime I") {
  const ElasticModulus a = ElasticModulus::cubic(3, 1, 1);
  const SymTensor t1 = diag(0.1, 0.2);
  const SymTensor t2 = t1 + diag(0.5, -0.4);
  const PhaseParams p = planar(a, a, t1, t2, 0.2, 0.1);
  const SymTensor e = SymTensor::from_components(0.3, -0.1, 0.2);
  const double d = 0.35;
  const RelaxedEval r = eval_2d(d, e, p);
  REQUIRE(r.regime == Regime::One);
  const SymTensor jump = t2 - t1;
  CHECK((r.eps1_star - (e - (1 - d) * jump).mandel()).norm() < 1e-13);
  const SymTensor res = e + d * jump - t2;
  const double ref = 0.5 * res.dot(apply_modulus(a, res)) + d * p.w1 + (1 - d) * p.w2;
  CHECK(r.value == doctest::Approx(ref).epsilon(1e-13));
}

namespace {

struct FdStats {
  int checked = 0;
  double worst = 0.0;
};

bool away_from_boundary(double d, const SymTensor& e, const PhaseParams& p) {
  const double g = gamma_star(p).value;
  const double p0 = phi(0.0, d, e, p);
  const double pt = phi(g * (1 - 1e-8), d, e, p);
  return std::abs(p0) > 1e-8 && std::abs(pt) > 1e-8;
}

double fd_error(double d, const SymTensor& e, const PhaseParams& p) {
  const RelaxedEval r = eval_2d(d, e, p);
  const double h = 1e-5 * (1.0 + e.norm());
  const double hd = 1e-5;
  const double fdd = central([&](double x) { return eval_2d(x, e, p).value; }, d, hd);
  const Vec fde = central_grad([&](const Vec& x) { return eval_2d(d, SymTensor(2, x), p).value; }, e.mandel(), h);
  const double sd = std::max(1.0, std::abs(fdd));
  const double se = std::max(1.0, fde.norm());
  return std::max(std::abs(r.d_d - fdd) / sd, (r.d_eps - fde).norm() / se);
}

}  // namespace

TEST_CASE("planar derivatives against finite differences") {
  Rng rng(99);
  FdStats by_regime[4];
  for (int i = 0; i < 3000; ++i) {
    const PhaseParams p = planar(random_cubic(rng), random_cubic(rng), random_sym(rng, 1), random_sym(rng, 1),
                                 rng.uniform(0, 0.5), rng.uniform(0, 0.5));
    const SymTensor e = random_sym(rng, 1);
    const double d = rng.uniform(0.02, 0.98);
    if (!away_from_boundary(d, e, p)) continue;
    const Regime reg = classify_regime(d, e, p).regime;
    FdStats& s = by_regime[static_cast<int>(reg)];
    if (s.checked >= 60) continue;
    const double err = fd_error(d, e, p);
    s.worst = std::max(s.worst, err);
    ++s.checked;
    const double tol = reg == Regime::Two ? 1e-5 : 1e-6;
    CHECK_MESSAGE(err <= tol, "regime " << regime_name(reg) << " d=" << d);
  }
  CHECK(by_regime[1].checked >= 30);
  CHECK(by_regime[2].checked >= 30);
  CHECK(by_regime[3].checked >= 10);
}

TEST_CASE("non-commuting moduli: Regime I derivatives still exact") {
  Rng rng(17);
  int n = 0;
  for (int i = 0; i < 500 && n < 30; ++i) {
    const PhaseParams p = planar(random_anisotropic(rng), random_anisotropic(rng), random_sym(rng, 1),
                                 random_sym(rng, 1));
    const SymTensor e = random_sym(rng, 1);
    const double d = rng.uniform(0.05, 0.95);
    if (!away_from_boundary(d, e, p)) continue;
    const Regime reg = classify_regime(d, e, p).regime;
    if (reg == Regime::One) {
      CHECK(fd_error(d, e, p) <= 1e-6);
      ++n;
    } else if (reg == Regime::Two || reg == Regime::Three) {
      try {
        (void)eval_2d(d, e, p);
        FAIL("expected NonCommuting");
      } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::NonCommuting);
      }
    }
  }
  CHECK(n >= 10);
}

TEST_CASE("root derivatives") {
  const SymTensor z(2);
  Rng rng(8);
  int n = 0;
  for (int i = 0; i < 500 && n < 20; ++i) {
    const PhaseParams p = planar(random_cubic(rng), random_cubic(rng), random_sym(rng, 1), random_sym(rng, 1));
    const SymTensor e = random_sym(rng, 1);
    const double d = rng.uniform(0.1, 0.9);
    const Classification c = classify_regime(d, e, p);
    if (c.regime != Regime::Two || c.beta_star < 1e-3 || c.beta_star > 0.99 * c.gamma) continue;
    ++n;
    const double h = 1e-5;
    const double fd = central([&](double x) { return classify_regime(x, e, p).beta_star; }, d, h);
    CHECK(std::abs(dbeta_dd(d, e, p, c.beta_star) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
    const Vec fde = central_grad(
        [&](const Vec& x) { return classify_regime(d, SymTensor(2, x), p).beta_star; }, e.mandel(), h);
    CHECK((dbeta_deps(d, e, p, c.beta_star) - fde).norm() <= 1e-5 * std::max(1.0, fde.norm()));
  }
  CHECK(n >= 10);
}

TEST_CASE("regime boundary continuity") {
  // alpha1 sets gamma*, alpha(gamma*, d) stays invertible for d > 0.
  const ElasticModulus a1 = ElasticModulus::cubic(3, 1, 1);
  const ElasticModulus a2 = ElasticModulus::cubic(4, 1, 2);
  const double d = 0.5;
  const SymTensor e = diag(0.2, 0.2);
  auto params = [&](double th) {
    const SymTensor t2 = std::cos(th) * SymTensor::identity(2) + SymTensor::from_components(0, 0, std::sin(th));
    return planar(a1, a2, SymTensor(2), t2);
  };
  const int n = 2000;
  std::vector<Regime> reg(n + 1);
  for (int i = 0; i <= n; ++i) reg[i] = classify_regime(d, e, params(M_PI * i / n)).regime;
  bool saw_12 = false, saw_23 = false;
  for (int i = 0; i < n; ++i) {
    if (reg[i] == reg[i + 1]) continue;
    const Regime ra = reg[i], rb = reg[i + 1];
    double lo = M_PI * i / n, hi = M_PI * (i + 1) / n;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (classify_regime(d, e, params(mid)).regime == ra ? lo : hi) = mid;
    }
    const RelaxedEval va = eval_2d(d, e, params(lo));
    const RelaxedEval vb = eval_2d(d, e, params(hi));
    CHECK(std::abs(va.value - vb.value) <= 1e-8);
    CHECK(std::abs(va.beta_star - vb.beta_star) <= 1e-6);
    auto pair = [&](Regime x, Regime y) { return (ra == x && rb == y) || (ra == y && rb == x); };
    saw_12 = saw_12 || pair(Regime::One, Regime::Two);
    saw_23 = saw_23 || pair(Regime::Two, Regime::Three);
  }
  CHECK(saw_12);
  CHECK(saw_23);
}

TEST_CASE("one-dimensional closed form") {
  const PhaseParams p = scalar_phases(1, 2, 0, 1);
  const RelaxedEval r = eval_1d(0.5, 0.5, p);
  CHECK(r.eps1_star(0) == doctest::Approx(0.0));
  CHECK(r.eps2_star(0) == doctest::Approx(1.0));
  CHECK(std::abs(r.value) < 1e-15);
  CHECK(std::abs(r.d_eps(0)) < 1e-15);
  CHECK(r.regime == Regime::One);

  const RelaxedEval one = eval_1d(1.0, 0.7, p);
  CHECK(one.eps1_star(0) == 0.7);
  CHECK(one.value == doctest::Approx(0.5 * 0.49));

  const double fd = central([&](double x) { return eval_1d(x, 0.7, p).value; }, 0.3, 1e-6);
  CHECK(std::abs(eval_1d(0.3, 0.7, p).d_d - fd) <= 1e-8);

  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const PhaseParams q = scalar_phases(rng.uniform(0.1, 10), rng.uniform(0.1, 10), rng.uniform(-5, 5),
                                        rng.uniform(-5, 5), rng.uniform(0, 1), rng.uniform(0, 1));
    const double d = rng.uniform(0.01, 0.99), e = rng.uniform(-5, 5);
    const RelaxedEval v = eval_1d(d, e, q);
    CHECK(std::abs(d * v.eps1_star(0) + (1 - d) * v.eps2_star(0) - e) <= 1e-10 * (1 + std::abs(e)));
    // stress continuity across the layers
    const double s1 = 10 * 0 + q.alpha1.mandel()(0, 0) * (v.eps1_star(0) - q.eps_t1.mandel()(0));
    const double s2 = q.alpha2.mandel()(0, 0) * (v.eps2_star(0) - q.eps_t2.mandel()(0));
    CHECK(std::abs(s1 - s2) <= 1e-10 * (1 + std::abs(s1)));
    CHECK(std::abs(v.d_eps(0) - s1) <= 1e-10 * (1 + std::abs(s1)));
    const double h = 1e-5;
    const double fdd = central([&](double x) { return eval_1d(x, e, q).value; }, d, h);
    CHECK(std::abs(v.d_d - fdd) <= 1e-6 * std::max(1.0, std::abs(fdd)));
  }
}

TEST_CASE("planar evaluator reproduces 1D data embedded along e1") {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const double c1 = rng.uniform(0.2, 5), c2 = rng.uniform(0.2, 5);
    const double t1 = rng.uniform(-1, 1), t2 = rng.uniform(-1, 1), e = rng.uniform(-2, 2);
    const double d = rng.uniform(0, 1);
    const PhaseParams q = scalar_phases(c1, c2, t1, t2, 0.1, 0.2);
    const PhaseParams p = planar(ElasticModulus::identity(2, c1), ElasticModulus::identity(2, c2), diag(t1, 0),
                                 diag(t2, 0), 0.1, 0.2);
    const RelaxedEval a = eval_1d(d, e, q);
    const RelaxedEval b = eval_2d(d, diag(e, 0), p);
    CHECK(std::abs(a.value - b.value) <= 1e-10 * (1 + std::abs(a.value)));
    CHECK(std::abs(a.d_d - b.d_d) <= 1e-10 * (1 + std::abs(a.d_d)));
    CHECK(std::abs(a.d_eps(0) - b.d_eps(0)) <= 1e-10 * (1 + std::abs(a.d_eps(0))));
  }
}

TEST_CASE("anti-plane evaluator") {
  AntiPlaneParams p;
  p.alpha1 = 2.0 * Eigen::Matrix2d::Identity();
  p.alpha2 = 2.0 * Eigen::Matrix2d::Identity();
  p.f1 = Eigen::Vector2d(0.1, -0.2);
  p.f2 = Eigen::Vector2d(0.4, 0.3);
  const Eigen::Vector2d f(0.25, 0.05);
  const double d = 0.3;
  const RelaxedEval r = eval_scalar3d(d, f, p);
  const Eigen::Vector2d t = p.f2 - p.f1;
  CHECK((Eigen::Vector2d(r.eps1_star) - (f - (1 - d) * t)).norm() < 1e-14);
  CHECK((Eigen::Vector2d(r.eps2_star) - (f + d * t)).norm() < 1e-14);
  const RelaxedEval z = eval_scalar3d(0.0, f, p);
  CHECK(z.value == doctest::Approx(0.5 * (f - p.f2).dot(p.alpha2 * (f - p.f2))).epsilon(1e-14));

  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    AntiPlaneParams q;
    Eigen::Matrix2d b1, b2;
    b1 << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
    b2 << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
    q.alpha1 = b1 * b1.transpose() + 0.3 * Eigen::Matrix2d::Identity();
    q.alpha2 = b2 * b2.transpose() + 0.3 * Eigen::Matrix2d::Identity();
    q.f1 = Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
    q.f2 = Eigen::Vector2d(rng.uniform(-1, 1), rng.uniform(-1, 1));
    q.w1 = rng.uniform(0, 1);
    const Eigen::Vector2d g(rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double dd = rng.uniform(0.01, 0.99);
    const RelaxedEval v = eval_scalar3d(dd, g, q);
    const Eigen::Vector2d s1 = q.alpha1 * (Eigen::Vector2d(v.eps1_star) - q.f1);
    const Eigen::Vector2d s2 = q.alpha2 * (Eigen::Vector2d(v.eps2_star) - q.f2);
    CHECK((s1 - s2).norm() <= 1e-10 * (1 + s1.norm()));
    const double fdd = central([&](double x) { return eval_scalar3d(x, g, q).value; }, dd, 1e-5);
    const Vec fde = central_grad(
        [&](const Vec& x) { return eval_scalar3d(dd, Eigen::Vector2d(x(0), x(1)), q).value; }, Vec(g), 1e-5);
    CHECK(std::abs(v.d_d - fdd) <= 1e-6 * std::max(1.0, std::abs(fdd)));
    CHECK((v.d_eps - fde).norm() <= 1e-6 * std::max(1.0, fde.norm()));
  }
}

TEST_CASE("extension beyond [0, 1]") {
  const RelaxedEnergy w = RelaxedEnergy::one_d(scalar_phases(1, 2, 0, 1));
  const Vec e = Vec::Constant(1, 0.3);
  const double w0 = w.eval(0.0, e).value;
  const double w1 = w.eval(1.0, e).value;
  CHECK(eval_extended(-2.0, e, w).value == doctest::Approx(w0 + 3.0).epsilon(1e-15));
  CHECK(eval_extended(3.0, e, w).value == doctest::Approx(w1 + 2.0).epsilon(1e-15));
  CHECK(eval_extended(0.5, e, w).value == w.eval(0.5, e).value);
  const double h = 1e-7;
  for (double s : {-1.0, 0.0, 1.0, 2.0}) {
    auto f = [&](double x) { return eval_extended(x, e, w).value; };
    const double left = (f(s) - f(s - h)) / h;
    const double right = (f(s + h) - f(s)) / h;
    CHECK(std::abs(left - right) <= 1e-6);
  }
  const Vec fde = central_grad([&](const Vec& x) { return eval_extended(-0.4, x, w).value; }, e, 1e-5);
  CHECK(std::abs(eval_extended(-0.4, e, w).d_eps(0) - fde(0)) <= 1e-6);
  CHECK(std::abs(eval_extended(1.6, e, w).d_d -
                 central([&](double x) { return eval_extended(x, e, w).value; }, 1.6, 1e-6)) <= 1e-7);
}

TEST_CASE("monotonicity probe") {
  const PhaseParams q = scalar_phases(1, 2, 0, 1);
  ProbeConfig cfg;
  cfg.samples = 2000;
  const ProbeReport r =
      assumption_A_probe([&](double d, const Vec& e) { return to_energy_eval(eval_1d(d, e(0), q)); }, cfg);
  CHECK(r.pass);
  CHECK(r.c1_hat >= 1.0 - 1e-9);
  CHECK(r.c1_hat <= 1.0 + 1e-2);
}
