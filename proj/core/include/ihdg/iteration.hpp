#pragma once

#include <string>
#include <vector>

#include "ihdg/local_solvers.hpp"

namespace ihdg {

enum class StopRule { exact, successive, vs_direct };
const char* to_string(StopRule r);
StopRule parse_stop_rule(const std::string& name);

enum class RunStatus { converged, diverged, max_iter };
const char* to_string(RunStatus s);

struct IterationConfig {
  Scheme scheme = Scheme::ihdg2;
  StopRule stop = StopRule::successive;
  double tol = 1e-10;
  int max_iters = 0;  ///< 0 selects default_max_iterations()
  int workers = 1;
  /// Divergence is flagged once the successive-difference norm exceeds this
  /// multiple of its first value.
  double divergence_factor = 1e6;
  /// Element-wise distance to the reference below which an element counts as converged.
  double layer_tol = 1e-8;
  bool track_layers = false;
};

void validate(const IterationConfig& cfg);

/// 10 (predicted + d Nel^{1/d}), at least 50.
int default_max_iterations(const StructuredMesh& mesh, double predicted = 0.0);

struct IterationRecord {
  int iteration = 0;
  double l2_error = -1.0;  ///< negative when no exact solution is known
  double successive_norm = 0.0;
  /// Skeleton energy (squared) of U^k - U^{k-1}: the homogeneous error the
  /// contraction theorems bound.
  double trace_energy = 0.0;
  double trace_jump = 0.0;
  int converged_elements = -1;  ///< -1 when no reference is available
  double elapsed_ms = 0.0;
};

struct IterationReport {
  int iterations = 0;
  RunStatus status = RunStatus::max_iter;
  double final_criterion = 0.0;
  std::vector<IterationRecord> history;
  /// converged_sets[k-1]: sorted elements within layer_tol of the reference after iteration k.
  std::vector<std::vector<int>> converged_sets;
  /// Geometric mean and maximum of trace_energy[k+1] / trace_energy[k] over iterations >= 2.
  double contraction_factor = 0.0;
  double max_contraction = 0.0;
  double wall_seconds = 0.0;
  FieldState solution;
};

/// Inputs that do not change during one solve.
struct RunInputs {
  const FieldState* reference = nullptr;  ///< oracle solution (vs-direct rule, layer map)
  double time = 0.0;                      ///< time at which the exact solution is evaluated
};

/// Block-Jacobi iteration of the local solvers from `initial` until the stopping rule holds.
IterationReport run(const LocalSolverSet& solvers, const FieldState& base, FieldState initial,
                    const IterationConfig& cfg, const RunInputs& inputs = {});

/// Steady solve from a zero initial guess; builds and factorizes the local systems.
IterationReport run(const StructuredMesh& mesh, const ProblemSpec& problem, const ElementOperators& ops,
                    const IterationConfig& cfg, const RunInputs& inputs = {});

/// Per-iteration converged-element sets of a report (requires track_layers and a reference).
const std::vector<std::vector<int>>& layer_convergence_map(const IterationReport& report);
/// Number of element layers whose union is reached at each iteration for a
/// structured grid under a constant positive velocity: max over converged
/// elements of (sum of indices) + 1.
std::vector<int> layer_counts(const IterationReport& report, const StructuredMesh& mesh);

struct TimeRunReport {
  std::vector<IterationReport> steps;  ///< solutions are dropped except for the last step
  int failed_step = -1;
  double cfl = 0.0;
  FieldState final_state;
  double final_time = 0.0;
};

/// Marches `num_steps` steps of size solvers.time().dt from `initial` at t0,
/// each step iterated from the previous level. Stops at the first step that
/// does not converge and records its index.
TimeRunReport run_time_dependent(const LocalSolverSet& solvers, const FieldState& initial, double t0,
                                 int num_steps, const IterationConfig& cfg);

/// Locally-implicit CFL number |beta|_max dt p^2 / h.
double cfl_number(double max_speed, double dt, int order, double h);
/// Largest advection speed over the volume quadrature points (sqrt(Phi) for shallow water).
double max_wave_speed(const ProblemSpec& problem, const StructuredMesh& mesh, const ElementOperators& ops);

/// Squared skeleton energy sum_K ||(phi, vartheta.n)||^2_{dK} (shallow water, velocity
/// weighted by Phi), sum_K ||(sigma.n, u)||^2_{dK} (convection-diffusion), sum_K ||u||^2_{dK} (transport).
double trace_energy(const ProblemSpec& problem, const StructuredMesh& mesh, const ElementOperators& ops,
                    const FaceTraces& traces);
double trace_energy(const ProblemSpec& problem, const StructuredMesh& mesh, const ElementOperators& ops,
                    const FieldState& state);

/// L2 norm over interior faces of the difference between the two one-sided
/// trace values of the mixed iterate (own side at k+1, neighbor at k).
double trace_jump(const ProblemSpec& problem, const StructuredMesh& mesh, const ElementOperators& ops,
                  const FaceTraces& next, const FaceTraces& previous);

/// Single-valued upwind trace (scalar trace unknown) from the two one-sided states.
double interface_trace(const ProblemSpec& problem, const Point& x, const Point& n, const Values& own,
                       const Values& neighbor);

/// Writes the history as CSV: iteration,l2_error,successive_norm,trace_energy,converged_elements,elapsed_ms.
void write_history_csv(const IterationReport& report, const std::string& path);

}  // namespace ihdg
