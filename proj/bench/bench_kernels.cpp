// Serial reference kernels vs their OpenMP versions, plus one coupled 2D
// time step with serial (deterministic) and parallel execution.

#include <benchmark/benchmark.h>

#include <cmath>

#include "microlax/field_solver.hpp"
#include "microlax/kernels.hpp"

using namespace microlax;

namespace {

Field smooth(int n) {
  Field f(n);
  for (int i = 0; i < n; ++i) f[i] = std::sin(0.01 * i) + 0.5 * std::cos(0.003 * i);
  return f;
}

SparseMatrix five_point(int m) {
  Triplets t;
  auto id = [m](int i, int j) { return j * m + i; };
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      t.emplace_back(id(i, j), id(i, j), 4.0);
      if (i > 0) t.emplace_back(id(i, j), id(i - 1, j), -1.0);
      if (i + 1 < m) t.emplace_back(id(i, j), id(i + 1, j), -1.0);
      if (j > 0) t.emplace_back(id(i, j), id(i, j - 1), -1.0);
      if (j + 1 < m) t.emplace_back(id(i, j), id(i, j + 1), -1.0);
    }
  return build_sparse(m * m, t);
}

template <Exec E>
void BM_laplacian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Field f = smooth(n * n);
  Field out(f.size());
  for (auto _ : state) {
    kernels::laplacian(f, out, n, n, 1.0 / n, 1.0 / n, E);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}

template <Exec E>
void BM_csr_matvec(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const SparseMatrix a = five_point(m);
  const Field x = smooth(m * m);
  Field y(x.size());
  for (auto _ : state) {
    kernels::csr_matvec(a, x, y, E);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * a.nonZeros());
}

void BM_step_2d(benchmark::State& state) {
  SimConfig c;
  c.grid.dim = 2;
  c.grid.nx = c.grid.ny = static_cast<int>(state.range(0));
  c.phases = PhaseParams::neutral(2);
  c.phases.alpha1 = ElasticModulus::cubic(3, 1, 1);
  c.phases.alpha2 = ElasticModulus::cubic(4, 1, 2);
  c.phases.eps_t2 = SymTensor::from_components(0.05, -0.03, 0.02);
  c.chem.lambda = 1e-2;
  c.dt = 1e-3;
  c.noise = 0.05;
  c.deterministic = state.range(1) == 0;
  const FieldSolver fs(c);
  const SimState s0 = fs.initial_state();
  for (auto _ : state) {
    SimState s = s0;
    fs.step(s);
    benchmark::DoNotOptimize(s.a.data());
  }
  state.SetLabel(c.deterministic ? "serial" : "parallel");
}

}  // namespace

BENCHMARK(BM_laplacian<Exec::Serial>)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_laplacian<Exec::Parallel>)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_csr_matvec<Exec::Serial>)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_csr_matvec<Exec::Parallel>)->Arg(64)->Arg(256)->Arg(512);
BENCHMARK(BM_step_2d)->Args({32, 0})->Args({32, 1})->Args({64, 0})->Args({64, 1})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
