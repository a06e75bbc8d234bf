#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ihdg/iteration.hpp"
#include "ihdg/predictors.hpp"

namespace ihdg {

/// Sweep description. Empty lists select the experiment's default values.
///
/// Text form: one `key = value` per line, `#` starts a comment, lists are
/// comma separated. Keys: preset, mesh, order, dt, kappa, cfl, scheme, dim,
/// stop, tol, max_iters, workers, final_time, steps, oracle, histories, out, seed.
struct ExperimentConfig {
  std::string preset = "table2";
  std::vector<int> meshes;  ///< elements per direction
  std::vector<int> orders;
  std::vector<double> dts;
  std::vector<double> kappas;
  std::vector<double> cfls;
  std::vector<Scheme> schemes;
  int dim = 0;  ///< 0: experiment default
  std::optional<StopRule> stop;
  double tol = 1e-10;
  int max_iters = 0;
  int workers = 1;
  double final_time = 1.0;  ///< shallow-water runs march to this time
  int steps = 10;           ///< time steps per CFL value
  bool oracle = true;       ///< direct-solve checks on the transport sweep
  bool histories = true;    ///< per-run iteration history CSVs
  std::string out_dir;      ///< empty: nothing is written
  unsigned seed = 1;
};

/// table2, table6, table7, elliptic_ratios, cfl, all.
std::vector<std::string> experiment_names();
/// Throws std::invalid_argument on unknown presets or out-of-range values.
void validate(const ExperimentConfig& cfg);
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);

struct TransportRow {
  int dim = 2;
  int N = 0;
  int p = 1;
  Scheme scheme = Scheme::ihdg2;
  std::string status;
  int iterations = 0;
  std::optional<int> reported;
  int predicted_layers = 0;  ///< d (N - 1) + 1 anti-diagonal layers
  double l2_error = -1.0;
  double seconds = 0.0;
  std::string oracle_status = "skipped";
  double direct_diff = -1.0;  ///< L2 distance to the direct solution at termination
  bool layers_ok = false;     ///< at least one more layer converged per iteration
};

struct ShallowWaterRow {
  int N = 0;
  int p = 1;
  double dt = 0.0;
  Scheme scheme = Scheme::ihdg2;
  std::string status;
  int steps = 0;
  int failed_step = -1;
  int first_iterations = 0;
  double mean_iterations = 0.0;
  int max_iterations = 0;
  std::optional<int> reported;
  ContractionEstimate estimate;
  double contraction = 0.0;  ///< largest per-step measured contraction factor
  double seconds = 0.0;

  int nel() const { return N * N; }
};

struct ConvectionDiffusionRow {
  int N = 0;
  int p = 1;
  double kappa = 0.0;
  Scheme scheme = Scheme::ihdg2;
  std::string status;
  int iterations = 0;
  std::optional<int> reported;
  ContractionEstimate estimate;
  double contraction = 0.0;
  double l2_error = -1.0;
  double seconds = 0.0;

  double h() const { return 1.0 / N; }
};

struct EllipticRow {
  int dim = 2;
  int N = 0;
  int p = 1;
  std::string status;
  int iterations = 0;
  ContractionEstimate estimate;
  double seconds = 0.0;
};

struct RatioRow {
  std::string study;   ///< shallow_water, convection_diffusion, elliptic
  std::string series;  ///< fixed parameters, e.g. "p=2 dt=0.1"
  double h = 0.0;      ///< finer mesh size (h ratios) or mesh size (p ratios)
  int p = 1;
  int level = 0;       ///< 1-based refinement level of h
  double measured = 0.0;
  double predicted = 0.0;
  std::optional<double> reported;
};

struct CflRow {
  int N = 0;
  int p = 1;
  double dt = 0.0;
  double cfl = 0.0;
  std::string status;
  int steps = 0;
  double mean_iterations = 0.0;
  int max_iterations = 0;
  double seconds = 0.0;
};

struct GateCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  std::vector<TransportRow> transport;
  std::vector<ShallowWaterRow> shallow_water;
  std::vector<ConvectionDiffusionRow> convection_diffusion;
  std::vector<EllipticRow> elliptic;
  std::vector<RatioRow> h_ratios;
  std::vector<RatioRow> p_ratios;
  std::vector<CflRow> cfl;
  std::vector<GateCheck> gates;
  double seconds = 0.0;

  bool passed() const;
};

/// Runs the sweep sequentially (parallelism lives inside each run), derives
/// the ratio tables, evaluates the gates and, when out_dir is set, writes
/// transport_iters.csv, sw_compare.csv, cdr_compare.csv, elliptic_iters.csv,
/// h_ratio.csv, p_ratio.csv, cfl_iters.csv, histories/*.csv and summary.json.
/// A failing run is recorded in its row's status and the sweep continues.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

/// Gate checks for whatever rows are present.
std::vector<GateCheck> evaluate_gates(const ExperimentResult& result);

void write_artifacts(const ExperimentResult& result, const ExperimentConfig& cfg);

struct ScalingConfig {
  int N = 16;
  int p = 3;
  std::vector<int> workers{1, 2, 4, 8};
  std::string out_dir;  ///< writes thread_scaling.csv when set
};

struct ScalingRow {
  int workers = 1;
  double seconds = 0.0;
  int iterations = 0;
  double l2_error = 0.0;
};

/// Steady 3D diagonal transport at fixed size for each worker count.
std::vector<ScalingRow> thread_scaling_smoke(const ScalingConfig& cfg, std::ostream* log = nullptr);

/// Single solve of a problem preset; used by the command line `run` command.
struct SingleRunConfig {
  std::string preset = "transport2d_diag";
  int N = 8;
  int p = 2;
  int dim = 0;
  double dt = 0.0;  ///< time step for time-dependent presets
  double final_time = 0.0;  ///< 0: one step
  double kappa = 1e-2;
  IterationConfig iteration;
  bool backward_euler = false;  ///< time scheme; default Crank-Nicolson for shallow water, backward Euler otherwise
  std::string history_path;
};

struct SingleRunResult {
  std::string status;
  int steps = 0;
  std::vector<int> iterations;  ///< per time step (one entry for steady runs)
  double l2_error = -1.0;
  double direct_diff = -1.0;
  double seconds = 0.0;
};

SingleRunResult run_single(const SingleRunConfig& cfg);

}  // namespace ihdg
