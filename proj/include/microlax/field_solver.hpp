#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "microlax/fem.hpp"
#include "microlax/linalg.hpp"
#include "microlax/phase_energy.hpp"
#include "microlax/relaxed_energy.hpp"

namespace microlax {

struct Grid {
  int dim = 1;
  int nx = 64;
  int ny = 1;
  double lx = 1.0;
  double ly = 1.0;

  double hx() const { return lx / nx; }
  double hy() const { return dim == 1 ? 1.0 : ly / ny; }
  int cells() const { return nx * (dim == 1 ? 1 : ny); }
  double cell_volume() const { return hx() * hy(); }
  void validate() const;
};

enum class Variant { Linear, Relaxed, Scalar3d };
enum class Stepper { SemiImplicit, MinimizingMovement };
/// Standard: mu = psi_a + dW/dd - lambda Lap a. Literal: the gradient term
/// enters as -Lap a without the lambda factor.
enum class MuConvention { Standard, Literal };

const char* variant_name(Variant v);
const char* stepper_name(Stepper s);

struct SimConfig {
  Variant variant = Variant::Relaxed;
  Grid grid;
  ChemParams chem;
  PhaseParams phases = PhaseParams::neutral(1);
  LinearTheoryParams linear;
  AntiPlaneParams anti;
  RelaxedOptions relaxed;
  double mobility = 1.0;

  double dt = 1e-4;
  double t_end = 1e-2;
  long max_steps = -1;
  Stepper stepper = Stepper::SemiImplicit;
  MuConvention mu_convention = MuConvention::Standard;
  int max_halvings = 20;
  double dt_growth = 1.25;
  bool freeze_a = false;

  double tol_elast_rel = 1e-9;
  double tol_elast_abs = 1e-12;
  double cg_tol = 1e-13;
  double tol_mm = 1e-8;
  int mm_max_iter = 50;

  double a0 = 0.5;
  double b0 = 0.0;
  double noise = 1e-3;
  double noise_b = 0.0;
  std::uint64_t seed = 1;
  std::string init_a_file;
  std::string init_b_file;

  long snapshot_every = 0;  // 0: initial and final only
  long diag_every = 1;
  bool vtk = false;
  bool deterministic = false;

  void validate() const;
  double tol_elast() const;
};

/// Per-point elastic energy W (extended to all d) for the configured variant.
class ElasticModel {
 public:
  explicit ElasticModel(const SimConfig& cfg);

  int strain_size() const { return strain_size_; }
  const Vec& sigma_ext() const { return sigma_ext_; }

  struct Point {
    EnergyEval w;
    int regime = 0;
    double beta = 0.0;
  };

  Point eval(double d, const Vec& e) const;
  Mat tangent(double d, double beta) const;

 private:
  Variant variant_;
  int strain_size_ = 1;
  Vec sigma_ext_;
  LinearTheoryParams linear_;
  RelaxedEnergy relaxed_;
};

struct SimState {
  Field a, b, mu, u;
  double time = 0.0;
  long step = 0;
  double dt = 0.0;
  /// cell averages of dW/dd and of W + W_ext
  Field dw_dd, w_el;
  /// per quadrature point (2D) or per cell (1D)
  std::vector<int> regime;
  std::vector<double> beta;
  double elastic_residual = 0.0;
  int elastic_iterations = 0;
};

struct Diagnostics {
  long step = 0;
  double time = 0.0;
  double dt = 0.0;
  double energy = 0.0;
  double mass = 0.0;
  double min_sum = 0.0, max_sum = 0.0;    // a + b
  double min_diff = 0.0, max_diff = 0.0;  // a - b
  double elastic_residual = 0.0;
  double energy_increment = 0.0;
  bool range_warning = false;
};

struct StepReport {
  bool accepted = true;
  int halvings = 0;
  int iterations = 0;  // minimizing movement inner iterations
  double dt_used = 0.0;
  double energy_before = 0.0;
  double energy_after = 0.0;
  double mm_objective_before = 0.0;
  double mm_objective_after = 0.0;
  double mm_residual = 0.0;
};

struct FluxField {
  Field jx;  // (nx + 1) * ny faces normal to x
  Field jy;  // nx * (ny + 1) faces normal to y (2D only)
};

Field laplacian_neumann(const Field& f, const Grid& g, Exec exec = Exec::Parallel);

/// w with -M Lap_h w = f on the mean-zero complement; f is projected first.
Field green_apply(const Field& f, const Grid& g, double mobility, double cg_tol = 1e-13);

class FieldSolver {
 public:
  explicit FieldSolver(const SimConfig& cfg);

  const SimConfig& config() const { return cfg_; }
  const Grid& grid() const { return cfg_.grid; }
  const ElasticModel& model() const { return model_; }
  Exec exec() const { return exec_; }

  /// Constants plus seeded noise (or fields from files), clipped into the
  /// admissible range; elastic field and mu are made consistent.
  SimState initial_state() const;
  /// Sets a, b, solves elasticity and mu.
  SimState make_state(const Field& a, const Field& b) const;

  void elastic_equilibrium(SimState& s) const;
  void chemical_potential(SimState& s) const;
  double total_free_energy(const SimState& s) const;
  double mass(const Field& a) const;
  FluxField flux_field(const SimState& s) const;
  Diagnostics diagnostics(const SimState& s) const;

  StepReport step_semi_implicit(SimState& s) const;
  StepReport step_minimizing_movement(SimState& s) const;
  StepReport step(SimState& s) const;

  /// F^{m,h} of the candidate (a, b) relative to the previous (a_old, b_old).
  double mm_objective(const SimState& s, const Field& a_old, const Field& b_old, double dt) const;

 private:
  bool semi_implicit_attempt(const SimState& s, double dt, SimState& out) const;
  bool mm_attempt(const SimState& s, double dt, SimState& out, StepReport& rep) const;

  Field lap(const Field& f) const;
  Field apply_a_operator(const Field& x, double dt) const;
  Field solve_a_operator(const Field& rhs, const Field& guess, double dt) const;
  Field solve_b_operator(const Field& rhs, const Field& guess, double dt) const;

  SimConfig cfg_;
  ElasticModel model_;
  Exec exec_;
  fem::QuadMesh mesh_;
  fem::FieldKind kind_ = fem::FieldKind::Vector;
  std::vector<char> pinned_;
  Field f_ext_;
};

}  // namespace microlax
