#pragma once

#include <string>
#include <vector>

#include "microlax/field_solver.hpp"
#include "microlax/io.hpp"

namespace microlax {

struct RunSummary {
  std::string status = "ok";  // ok | step_failure
  std::string message;
  long accepted_steps = 0;
  long rejected_attempts = 0;
  long snapshots = 0;
  Diagnostics initial;
  Diagnostics final;
  double max_energy_increase = 0.0;  // largest F(new) - F(old) over accepted steps
  double max_elastic_residual = 0.0;
  bool range_warning = false;
  double seconds = 0.0;
};

/// Runs the configured simulation and writes manifest.ini, diagnostics.csv
/// and field snapshots (a, b, mu per snapshot; VTK optional) into out_dir.
/// StepFailure is caught: partial outputs stay on disk and the summary
/// status is "step_failure".
RunSummary run_simulation(const SimConfig& cfg, const std::string& out_dir, const std::string& command = "");

/// Initial fields: files named in the config, or constants plus noise.
SimState initial_state_from_config(const FieldSolver& fs);

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;  // mesh size or time step
  double error = 0.0;
  double order = 0.0;  // log2(e_{k-1}/e_k), 0 for the first level
};

/// Elastic manufactured solution on n0 * 2^k grids; exact reference.
std::vector<ConvergenceRow> convergence_mms(int n0, int levels);
/// Time refinement dt / 2^k (k < levels) of the configured run up to t_end,
/// compared with a reference at dt / 2^(levels + 1). The last row is the
/// reference compared with itself.
std::vector<ConvergenceRow> convergence_time(const SimConfig& cfg, int levels);

io::CsvTable convergence_table(const std::vector<ConvergenceRow>& rows);

}  // namespace microlax
