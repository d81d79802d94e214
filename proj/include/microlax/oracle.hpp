#pragma once

// Brute-force bounds for the relaxed energies. Nothing here uses the
// translation machinery of relaxed_energy.

#include <cstdint>
#include <vector>

#include "microlax/phase_energy.hpp"
#include "microlax/relaxed_energy.hpp"

namespace microlax::oracle {

/// Minimum over a grid of phase-1 strains plus parabolic refinement.
double scan_1d(double d, double eps, const PhaseParams& p, int grid_points = 2001);

struct LaminateCandidate {
  int rank = 1;
  std::vector<double> angles;     // layer normals, radians
  std::vector<double> fractions;  // outer fraction, then inner fraction (rank 2)
  int pure_phase = 0;             // rank 2: phase filling the unlaminated layer
  std::vector<Vec> leaf_strains;
  std::vector<double> leaf_weights;
  double energy = 0.0;
};

struct LaminateSearchOptions {
  int angles = 720;
  bool rank2 = true;
  int rank2_angles = 36;
  int rank2_fractions = 20;
  bool polish = true;
};

struct LaminateSearchResult {
  LaminateCandidate rank1;
  LaminateCandidate rank2;
  double best = 0.0;
};

/// Energy of the optimal rank-1 laminate with normal angle theta.
LaminateCandidate rank1_laminate(double d, const SymTensor& e, const PhaseParams& p, double theta);

/// Rank-2: layer A (fraction lambda) is pure `pure_phase`; layer B is a
/// rank-1 laminate with normal angle theta_in. Outer normal angle theta_out.
/// Returns +inf energy if the phase-1 fraction cannot equal d.
LaminateCandidate rank2_laminate(double d, const SymTensor& e, const PhaseParams& p, double theta_out,
                                 double theta_in, double lambda, int pure_phase);

LaminateSearchResult laminate_search_2d(double d, const SymTensor& e, const PhaseParams& p,
                                        const LaminateSearchOptions& opt = {});

struct CellProblem {
  int n = 32;
  /// 1 where the cell holds phase 1, row-major (x fastest).
  std::vector<char> phase1;
  SymTensor strain;

  /// Phase-1 fraction, the d of the relaxed energy.
  double fraction() const;
};

/// Periodic layering of columns (normal e1) or rows (normal e2) with the
/// given number of periods, adjusted so that the phase-1 count is round(d n^2).
CellProblem make_laminate_cell(int n, double d, const SymTensor& e, int periods, bool normal_x = true);

struct CellOptions {
  int anneal_moves = 0;
  std::uint64_t seed = 0x5EED;
  /// initial temperature relative to |energy|
  double temperature = 1e-3;
  double cg_tol = 1e-10;
};

struct CellResult {
  double energy = 0.0;  // per unit area
  std::vector<char> best_phase1;
  int solves = 0;
  int accepted = 0;
  int cg_iterations = 0;
};

/// Discrete minimisation over displacements with the affine boundary trace,
/// followed by optional simulated annealing on the phase arrangement.
CellResult cell_problem_min(const CellProblem& cp, const PhaseParams& p, const CellOptions& opt = {});

struct FdReport {
  double max_rel_error = 0.0;
  double err_d = 0.0;
  double err_eps = 0.0;
};

/// Central differences in d and each strain coordinate; errors are relative
/// to max(1, |fd|).
FdReport fd_check(const EnergyFn& w, double d, const Vec& e, double h);

}  // namespace microlax::oracle
