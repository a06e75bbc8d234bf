#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ihdg/harness.hpp"

namespace {

struct ExperimentFlags {
  std::string config;
  std::string preset, mesh, order, dt, kappa, cfl, scheme, stop, tol, max_iters, workers, out, dim, final_time, steps;
  bool no_oracle = false;
  bool no_histories = false;
};

int run_experiment_command(const ExperimentFlags& f) {
  ihdg::ExperimentConfig cfg = f.config.empty() ? ihdg::ExperimentConfig{} : ihdg::load_config(f.config);
  const std::pair<const char*, const std::string*> overrides[] = {
      {"preset", &f.preset}, {"mesh", &f.mesh},       {"order", &f.order},         {"dt", &f.dt},
      {"kappa", &f.kappa},   {"cfl", &f.cfl},         {"scheme", &f.scheme},       {"stop", &f.stop},
      {"tol", &f.tol},       {"max_iters", &f.max_iters}, {"workers", &f.workers}, {"out", &f.out},
      {"dim", &f.dim},       {"final_time", &f.final_time}, {"steps", &f.steps},
  };
  for (const auto& [key, value] : overrides) {
    if (!value->empty()) ihdg::apply_setting(cfg, key, *value);
  }
  if (f.no_oracle) cfg.oracle = false;
  if (f.no_histories) cfg.histories = false;

  const ihdg::ExperimentResult res = ihdg::run_experiment(cfg, &std::cerr);
  std::cout << "experiment " << cfg.preset << " finished in " << std::fixed << std::setprecision(1) << res.seconds
            << " s\n";
  for (const auto& g : res.gates) {
    std::cout << (g.passed ? "PASS " : "FAIL ") << g.name << " (" << g.detail << ")\n";
  }
  if (!cfg.out_dir.empty()) std::cout << "artifacts in " << cfg.out_dir << "\n";
  return res.passed() ? 0 : 1;
}

int run_single_command(ihdg::SingleRunConfig cfg, const std::string& scheme, const std::string& stop) {
  if (!scheme.empty()) cfg.iteration.scheme = ihdg::parse_scheme(scheme);
  if (!stop.empty()) cfg.iteration.stop = ihdg::parse_stop_rule(stop);
  const ihdg::SingleRunResult r = ihdg::run_single(cfg);
  std::cout << cfg.preset << " N=" << cfg.N << " p=" << cfg.p << " " << ihdg::to_string(cfg.iteration.scheme) << ": "
            << r.status << "\n";
  if (r.iterations.size() == 1) {
    std::cout << "iterations " << r.iterations.front() << "\n";
  } else {
    int total = 0;
    for (int k : r.iterations) total += k;
    std::cout << "steps " << r.steps << ", iterations per step";
    for (int k : r.iterations) std::cout << ' ' << k;
    std::cout << " (mean " << std::setprecision(3) << static_cast<double>(total) / r.steps << ")\n";
  }
  std::cout << std::scientific << std::setprecision(3);
  if (r.l2_error >= 0.0) std::cout << "l2 error " << r.l2_error << "\n";
  if (r.direct_diff >= 0.0) std::cout << "distance to direct solution " << r.direct_diff << "\n";
  std::cout << std::fixed << std::setprecision(2) << "time " << r.seconds << " s\n";
  return r.status == "converged" ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative HDG solvers and experiment harness"};
  app.require_subcommand(1);

  ihdg::SingleRunConfig single;
  std::string single_scheme, single_stop;
  auto* run = app.add_subcommand("run", "Solve one problem preset");
  run->add_option("--preset", single.preset, "transport2d_diag, transport3d_diag, transport3d_timedep, "
                                             "sw_standing_wave, cdr_manufactured, elliptic")
      ->capture_default_str();
  run->add_option("--mesh", single.N, "Elements per direction")->capture_default_str();
  run->add_option("--order", single.p, "Polynomial order")->capture_default_str();
  run->add_option("--dim", single.dim, "Dimension of the elliptic preset");
  run->add_option("--dt", single.dt, "Time step (time-dependent presets)");
  run->add_option("--final-time", single.final_time, "March to this time (default: one step)");
  run->add_option("--kappa", single.kappa, "Diffusivity of cdr_manufactured")->capture_default_str();
  run->add_option("--scheme", single_scheme, "ihdg1 or ihdg2 (default ihdg2)");
  run->add_option("--stop", single_stop, "exact, successive or vs-direct (default successive)");
  run->add_option("--tol", single.iteration.tol, "Stopping tolerance")->capture_default_str();
  run->add_option("--max-iters", single.iteration.max_iters, "Iteration cap (0: automatic)");
  run->add_option("--workers", single.iteration.workers, "Worker threads")->capture_default_str();
  run->add_flag("--backward-euler", single.backward_euler, "Backward Euler instead of Crank-Nicolson");
  run->add_option("--history", single.history_path, "Write the iteration history CSV here");

  ExperimentFlags ef;
  auto* exp = app.add_subcommand("experiment", "Run an experiment sweep and check it against the reported counts");
  exp->add_option("--config", ef.config, "key = value configuration file; flags override it");
  exp->add_option("--preset", ef.preset, "table2, table6, table7, elliptic_ratios, cfl or all");
  exp->add_option("--mesh", ef.mesh, "Comma-separated elements per direction");
  exp->add_option("--order", ef.order, "Comma-separated polynomial orders");
  exp->add_option("--dt", ef.dt, "Comma-separated time steps");
  exp->add_option("--kappa", ef.kappa, "Comma-separated diffusivities (table7)");
  exp->add_option("--cfl", ef.cfl, "Comma-separated CFL numbers (cfl)");
  exp->add_option("--scheme", ef.scheme, "ihdg1, ihdg2 or both");
  exp->add_option("--stop", ef.stop, "exact, successive or vs-direct");
  exp->add_option("--tol", ef.tol, "Stopping tolerance");
  exp->add_option("--max-iters", ef.max_iters, "Iteration cap (0: automatic)");
  exp->add_option("--workers", ef.workers, "Worker threads per run");
  exp->add_option("--out", ef.out, "Directory for CSV and JSON artifacts");
  exp->add_option("--dim", ef.dim, "Restrict table2 to one dimension, or set the elliptic dimension");
  exp->add_option("--final-time", ef.final_time, "Final time of the shallow-water runs");
  exp->add_option("--steps", ef.steps, "Time steps per CFL value");
  exp->add_flag("--no-oracle", ef.no_oracle, "Skip the direct-solve checks");
  exp->add_flag("--no-histories", ef.no_histories, "Skip per-run history CSVs");

  ihdg::ScalingConfig sc;
  auto* scaling = app.add_subcommand("scaling", "Wall time of a fixed 3D transport run against the worker count");
  scaling->add_option("--mesh", sc.N, "Elements per direction")->capture_default_str();
  scaling->add_option("--order", sc.p, "Polynomial order")->capture_default_str();
  scaling->add_option("--workers", sc.workers, "Worker counts")->delimiter(',')->capture_default_str();
  scaling->add_option("--out", sc.out_dir, "Directory for thread_scaling.csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return run_single_command(single, single_scheme, single_stop);
    if (*exp) return run_experiment_command(ef);
    if (*scaling) {
      const auto rows = ihdg::thread_scaling_smoke(sc, &std::cerr);
      std::cout << "workers,seconds,iterations,l2_error\n";
      for (const auto& r : rows) {
        std::cout << r.workers << ',' << r.seconds << ',' << r.iterations << ',' << r.l2_error << '\n';
      }
      bool same = true;
      for (const auto& r : rows) same = same && r.iterations == rows.front().iterations;
      return same ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
