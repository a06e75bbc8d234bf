#include "ihdg/harness.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ihdg/reference_counts.hpp"
#include "ihdg/reference_hdg.hpp"

namespace ihdg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  int x = 0;
  try {
    x = std::stoi(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size()) throw std::invalid_argument(key + ": expected an integer, got '" + v + "'");
  return x;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size()) throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  std::string k;
  for (char c : v) k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (k == "1" || k == "true" || k == "yes" || k == "on") return true;
  if (k == "0" || k == "false" || k == "no" || k == "off") return false;
  throw std::invalid_argument(key + ": expected a boolean, got '" + v + "'");
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(10) << x;
  return os.str();
}

std::string fmt(const std::optional<int>& x) {
  if (!x) return "";
  return *x == kDiverged ? "*" : std::to_string(*x);
}

std::string fmt(const std::optional<double>& x) { return x ? fmt(*x) : ""; }

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw std::runtime_error("cannot write " + path.string());
    row(header);
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      const std::string& f = fields[i];
      if (f.find_first_of(",\"\n") != std::string::npos) {
        os_ << '"';
        for (char c : f) {
          if (c == '"') os_ << '"';
          os_ << c;
        }
        os_ << '"';
      } else {
        os_ << f;
      }
    }
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

struct Discretization {
  StructuredMesh mesh;
  ElementOperators ops;
};

std::unique_ptr<Discretization> discretize(const ProblemSpec& problem, int dim, int N, int p) {
  const std::array<int, 3> cells{N, N, N};
  StructuredMesh raw = build_mesh(dim, std::span<const int>(cells.data(), static_cast<std::size_t>(dim)));
  ElementOperators ops = build_operators(p, dim, raw.h());
  StructuredMesh mesh = bind_boundary(std::move(raw), problem, ops);
  return std::make_unique<Discretization>(Discretization{std::move(mesh), std::move(ops)});
}

template <class T>
std::vector<T> or_default(const std::vector<T>& v, std::vector<T> fallback) {
  return v.empty() ? fallback : v;
}

std::vector<Scheme> schemes_or(const ExperimentConfig& cfg, std::vector<Scheme> fallback) {
  return cfg.schemes.empty() ? fallback : cfg.schemes;
}

IterationConfig iteration_config(const ExperimentConfig& cfg, Scheme scheme, StopRule fallback) {
  IterationConfig ic;
  ic.scheme = scheme;
  ic.stop = cfg.stop.value_or(fallback);
  ic.tol = cfg.tol;
  ic.max_iters = cfg.max_iters;
  ic.workers = cfg.workers;
  return ic;
}

std::string status_of(const std::exception& e) { return std::string("error: ") + e.what(); }

std::string history_name(const std::string& stem) { return stem + ".csv"; }

void maybe_write_history(const ExperimentConfig& cfg, const IterationReport& report, const std::string& stem) {
  if (cfg.out_dir.empty() || !cfg.histories) return;
  const auto dir = std::filesystem::path(cfg.out_dir) / "histories";
  std::filesystem::create_directories(dir);
  write_history_csv(report, (dir / history_name(stem)).string());
}

std::string tag(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

void log_line(std::ostream* log, const std::string& s) {
  if (log) *log << s << std::endl;
}

// ---------------------------------------------------------------- sweeps

void transport_sweep(const ExperimentConfig& cfg, ExperimentResult& res, std::ostream* log) {
  const std::vector<int> dims = cfg.dim ? std::vector<int>{cfg.dim} : std::vector<int>{2, 3};
  for (int dim : dims) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("transport sweep runs in 2D or 3D");
    const auto meshes = or_default(cfg.meshes, dim == 2 ? std::vector<int>{4, 8, 16, 32} : std::vector<int>{2, 4, 8, 16});
    const auto problem = make_preset(dim == 2 ? "transport2d_diag" : "transport3d_diag").problem;
    for (int p : or_default(cfg.orders, {1, 2, 3, 4})) {
      for (int N : meshes) {
        for (Scheme s : schemes_or(cfg, {Scheme::ihdg2})) {
          TransportRow row;
          row.dim = dim;
          row.N = N;
          row.p = p;
          row.scheme = s;
          row.reported = s == Scheme::ihdg2 ? reported_transport_iterations(dim, N, p) : std::nullopt;
          row.predicted_layers = dim * (N - 1) + 1;
          try {
            const auto d = discretize(problem, dim, N, p);
            std::optional<DirectSolution> ref;
            if (cfg.oracle && (dim == 2 || p <= 2)) {
              try {
                ref = solve_direct(d->mesh, problem, d->ops);
                row.oracle_status = "ok";
              } catch (const std::exception& e) {
                row.oracle_status = status_of(e);
              }
            }
            IterationConfig ic = iteration_config(cfg, s, StopRule::exact);
            RunInputs in;
            if (ref) {
              in.reference = &ref->volume;
              ic.track_layers = true;
            }
            const auto t0 = Clock::now();
            const IterationReport rep = run(d->mesh, problem, d->ops, ic, in);
            row.seconds = seconds_since(t0);
            row.status = to_string(rep.status);
            row.iterations = rep.iterations;
            if (!rep.history.empty()) row.l2_error = rep.history.back().l2_error;
            if (ref) {
              row.direct_diff = l2_diff(rep.solution, ref->volume, d->ops, monitored_components(problem));
              const auto counts = layer_counts(rep, d->mesh);
              row.layers_ok = !counts.empty();
              for (std::size_t k = 0; k < counts.size(); ++k) {
                if (counts[k] < std::min(static_cast<int>(k) + 1, row.predicted_layers)) row.layers_ok = false;
              }
            }
            maybe_write_history(cfg, rep, "transport" + std::to_string(dim) + "d_N" + std::to_string(N) + "_p" +
                                              std::to_string(p) + "_" + to_string(s));
          } catch (const std::exception& e) {
            row.status = status_of(e);
          }
          log_line(log, "transport " + std::to_string(dim) + "D N=" + std::to_string(N) + " p=" + std::to_string(p) +
                            " " + to_string(s) + ": " + row.status + " " + std::to_string(row.iterations) +
                            " (reported " + fmt(row.reported) + ")");
          res.transport.push_back(row);
        }
      }
    }
  }
}

void shallow_water_sweep(const ExperimentConfig& cfg, ExperimentResult& res, std::ostream* log) {
  const Preset preset = make_preset("sw_standing_wave");
  const auto& sw = std::get<ShallowWaterProblem>(preset.problem);
  const auto exact = exact_solution(preset.problem);
  for (int p : or_default(cfg.orders, {1, 2, 3, 4})) {
    for (int N : or_default(cfg.meshes, {4, 8, 16, 32})) {
      std::unique_ptr<Discretization> d;
      FieldState init;
      try {
        d = discretize(preset.problem, 2, N, p);
        init = project([&](const Point& x) { return exact(x, 0.0); }, 3, d->mesh, d->ops);
      } catch (const std::exception&) {
        d.reset();
      }
      for (double dt : or_default(cfg.dts, {0.1, 0.01})) {
        for (Scheme s : schemes_or(cfg, {Scheme::ihdg1, Scheme::ihdg2})) {
          ShallowWaterRow row;
          row.N = N;
          row.p = p;
          row.dt = dt;
          row.scheme = s;
          row.reported = reported_sw_iterations(N * N, p, dt, s == Scheme::ihdg2);
          try {
            if (!d) throw std::invalid_argument("cannot discretize the shallow-water preset");
            const TimeConfig tc{TimeScheme::crank_nicolson, dt};
            row.estimate = predict_sw(d->mesh.meshsize(), p, tc.theta() * dt, sw.Phi,
                                      trace_inequality_constant(d->ops), sw.gamma, s);
            const auto t0 = Clock::now();
            const LocalSolverSet solvers(preset.problem, d->mesh, d->ops, tc, s, cfg.workers);
            const int steps = std::max(1, static_cast<int>(std::lround(cfg.final_time / dt)));
            const TimeRunReport tr = run_time_dependent(solvers, init, 0.0, steps,
                                                        iteration_config(cfg, s, StopRule::exact));
            row.seconds = seconds_since(t0);
            row.steps = static_cast<int>(tr.steps.size());
            row.failed_step = tr.failed_step;
            row.status = tr.failed_step >= 0 ? to_string(tr.steps.back().status) : "converged";
            double sum = 0.0;
            for (const auto& r : tr.steps) {
              sum += r.iterations;
              row.max_iterations = std::max(row.max_iterations, r.iterations);
              row.contraction = std::max(row.contraction, r.contraction_factor);
            }
            row.first_iterations = tr.steps.front().iterations;
            row.mean_iterations = sum / static_cast<double>(tr.steps.size());
            maybe_write_history(cfg, tr.steps.front(),
                                "sw_N" + std::to_string(N) + "_p" + std::to_string(p) + "_dt" + tag(dt) + "_" +
                                    to_string(s) + "_step0");
          } catch (const std::exception& e) {
            row.status = status_of(e);
          }
          std::ostringstream msg;
          msg << "shallow water Nel=" << N * N << " p=" << p << " dt=" << dt << " " << to_string(s) << ": "
              << row.status << " mean " << std::fixed << std::setprecision(1) << row.mean_iterations
              << " first " << row.first_iterations << " (reported " << fmt(row.reported) << ")";
          log_line(log, msg.str());
          res.shallow_water.push_back(row);
        }
      }
    }
  }
}

void convection_diffusion_sweep(const ExperimentConfig& cfg, ExperimentResult& res, std::ostream* log) {
  for (int p : or_default(cfg.orders, {1, 2, 3, 4})) {
    for (int N : or_default(cfg.meshes, {2, 4, 8, 16})) {
      for (double kappa : or_default(cfg.kappas, {1e-2, 1e-3, 1e-6})) {
        PresetOptions po;
        po.kappa = kappa;
        const Preset preset = make_preset("cdr_manufactured", po);
        const auto& cd = std::get<ConvectionDiffusionProblem>(preset.problem);
        for (Scheme s : schemes_or(cfg, {Scheme::ihdg1, Scheme::ihdg2})) {
          ConvectionDiffusionRow row;
          row.N = N;
          row.p = p;
          row.kappa = kappa;
          row.scheme = s;
          row.reported = reported_cdr_iterations(1.0 / N, p, kappa, s == Scheme::ihdg2);
          try {
            const auto d = discretize(preset.problem, 3, N, p);
            row.estimate = predict_cdr(d->mesh.meshsize(), p, 3, kappa, cd.lambda,
                                       stabilization_bounds(cd, d->mesh, d->ops), trace_inequality_constant(d->ops));
            const auto t0 = Clock::now();
            const IterationReport rep = run(d->mesh, preset.problem, d->ops, iteration_config(cfg, s, StopRule::exact));
            row.seconds = seconds_since(t0);
            row.status = to_string(rep.status);
            row.iterations = rep.iterations;
            row.contraction = rep.contraction_factor;
            if (!rep.history.empty()) row.l2_error = rep.history.back().l2_error;
            maybe_write_history(cfg, rep,
                                "cdr_N" + std::to_string(N) + "_p" + std::to_string(p) + "_kappa" + tag(kappa) +
                                    "_" + to_string(s));
          } catch (const std::exception& e) {
            row.status = status_of(e);
          }
          log_line(log, "convection-diffusion h=" + tag(row.h()) + " p=" + std::to_string(p) + " kappa=" + tag(kappa) +
                            " " + to_string(s) + ": " + row.status + " " + std::to_string(row.iterations) +
                            " (reported " + fmt(row.reported) + ")");
          res.convection_diffusion.push_back(row);
        }
      }
    }
  }
}

void elliptic_sweep(const ExperimentConfig& cfg, ExperimentResult& res, std::ostream* log) {
  const int dim = cfg.dim ? cfg.dim : 2;
  PresetOptions po;
  po.dim = dim;
  const Preset preset = make_preset("elliptic", po);
  const auto& cd = std::get<ConvectionDiffusionProblem>(preset.problem);
  for (int N : or_default(cfg.meshes, {2, 4, 8})) {
    for (int p : or_default(cfg.orders, {1, 2, 3, 4})) {
      EllipticRow row;
      row.dim = dim;
      row.N = N;
      row.p = p;
      try {
        const auto d = discretize(preset.problem, dim, N, p);
        row.estimate = predict_cdr(d->mesh.meshsize(), p, dim, cd.kappa, cd.lambda,
                                   stabilization_bounds(cd, d->mesh, d->ops), trace_inequality_constant(d->ops));
        const auto t0 = Clock::now();
        IterationConfig ic = iteration_config(cfg, Scheme::ihdg2, StopRule::vs_direct);
        if (cfg.max_iters == 0) ic.max_iters = 20000;
        std::optional<DirectSolution> ref;
        RunInputs in;
        if (ic.stop == StopRule::vs_direct) {
          ref = solve_direct(d->mesh, preset.problem, d->ops);
          in.reference = &ref->volume;
        }
        const IterationReport rep = run(d->mesh, preset.problem, d->ops, ic, in);
        row.seconds = seconds_since(t0);
        row.status = to_string(rep.status);
        row.iterations = rep.iterations;
        maybe_write_history(cfg, rep, "elliptic" + std::to_string(dim) + "d_N" + std::to_string(N) + "_p" +
                                          std::to_string(p));
      } catch (const std::exception& e) {
        row.status = status_of(e);
      }
      log_line(log, "elliptic N=" + std::to_string(N) + " p=" + std::to_string(p) + ": " + row.status + " " +
                        std::to_string(row.iterations));
      res.elliptic.push_back(row);
    }
  }
}

void cfl_sweep(const ExperimentConfig& cfg, ExperimentResult& res, std::ostream* log) {
  const Preset preset = make_preset("transport3d_timedep");
  const auto exact = exact_solution(preset.problem);
  for (int N : or_default(cfg.meshes, {8})) {
    for (int p : or_default(cfg.orders, {4})) {
      const auto d = discretize(preset.problem, 3, N, p);
      const FieldState init = project([&](const Point& x) { return exact(x, 0.0); }, 1, d->mesh, d->ops);
      const double speed = max_wave_speed(preset.problem, d->mesh, d->ops);
      std::vector<double> dts = cfg.dts;
      if (dts.empty()) {
        for (double c : or_default(cfg.cfls, {0.5, 1.0, 2.0, 3.0, 4.0, 5.0})) {
          dts.push_back(c * d->mesh.meshsize() / (speed * p * p));
        }
      }
      for (double dt : dts) {
        CflRow row;
        row.N = N;
        row.p = p;
        row.dt = dt;
        row.cfl = cfl_number(speed, dt, p, d->mesh.meshsize());
        try {
          const auto t0 = Clock::now();
          const LocalSolverSet solvers(preset.problem, d->mesh, d->ops, {TimeScheme::backward_euler, dt},
                                       Scheme::ihdg2, cfg.workers);
          const TimeRunReport tr = run_time_dependent(solvers, init, 0.0, cfg.steps,
                                                      iteration_config(cfg, Scheme::ihdg2, StopRule::exact));
          row.seconds = seconds_since(t0);
          row.steps = static_cast<int>(tr.steps.size());
          row.status = tr.failed_step >= 0 ? to_string(tr.steps.back().status) : "converged";
          double sum = 0.0;
          for (const auto& r : tr.steps) {
            sum += r.iterations;
            row.max_iterations = std::max(row.max_iterations, r.iterations);
          }
          row.mean_iterations = sum / static_cast<double>(tr.steps.size());
        } catch (const std::exception& e) {
          row.status = status_of(e);
        }
        std::ostringstream msg;
        msg << "cfl N=" << N << " p=" << p << " CFL=" << std::setprecision(3) << row.cfl << ": " << row.status
            << " mean " << row.mean_iterations;
        log_line(log, msg.str());
        res.cfl.push_back(row);
      }
    }
  }
}

// ---------------------------------------------------------------- ratios

bool ok(const std::string& status) { return status == "converged"; }

void shallow_water_ratios(ExperimentResult& res) {
  std::map<std::pair<double, int>, std::map<int, const ShallowWaterRow*>> by_dt_p;
  for (const auto& r : res.shallow_water) {
    if (r.scheme == Scheme::ihdg2 && ok(r.status)) by_dt_p[{r.dt, r.p}][r.N] = &r;
  }
  for (const auto& [key, rows] : by_dt_p) {
    const ShallowWaterRow* prev = nullptr;
    int level = 0;
    for (const auto& [N, r] : rows) {
      ++level;
      if (prev) {
        res.h_ratios.push_back({"shallow_water", "p=" + std::to_string(key.second) + " dt=" + tag(key.first),
                                r->estimate.h, r->p, level, r->mean_iterations / prev->mean_iterations,
                                r->estimate.k_pred / prev->estimate.k_pred, std::nullopt});
      }
      prev = r;
    }
  }
  for (const auto& [key, rows] : by_dt_p) {
    if (key.second == 1) continue;
    const auto base = by_dt_p.find({key.first, 1});
    if (base == by_dt_p.end()) continue;
    for (const auto& [N, r] : rows) {
      const auto b = base->second.find(N);
      if (b == base->second.end()) continue;
      const int level = static_cast<int>(std::log2(N / 4.0)) + 1;
      res.p_ratios.push_back({"shallow_water", "N=" + std::to_string(N) + " dt=" + tag(key.first), r->estimate.h,
                              r->p, level, r->mean_iterations / b->second->mean_iterations,
                              r->estimate.k_pred / b->second->estimate.k_pred,
                              std::abs(key.first - 0.1) < 1e-12 && (N & (N - 1)) == 0 && N >= 4 && N <= 32
                                  ? reported_sw_p_ratio(r->p, level)
                                  : std::nullopt});
    }
  }
}

void convection_diffusion_ratios(ExperimentResult& res) {
  std::map<std::pair<int, double>, std::map<int, const ConvectionDiffusionRow*>> by_p_kappa;
  for (const auto& r : res.convection_diffusion) {
    if (r.scheme == Scheme::ihdg2 && ok(r.status)) by_p_kappa[{r.p, r.kappa}][r.N] = &r;
  }
  for (const auto& [key, rows] : by_p_kappa) {
    const ConvectionDiffusionRow* prev = nullptr;
    int level = 0;
    for (const auto& [N, r] : rows) {
      ++level;
      if (prev) {
        res.h_ratios.push_back({"convection_diffusion", "p=" + std::to_string(key.first) + " kappa=" + tag(key.second),
                                r->h(), r->p, level, static_cast<double>(r->iterations) / prev->iterations,
                                r->estimate.k_pred / prev->estimate.k_pred, std::nullopt});
      }
      prev = r;
    }
  }
}

void elliptic_ratios(ExperimentResult& res) {
  std::map<int, std::map<int, const EllipticRow*>> by_p;
  for (const auto& r : res.elliptic) {
    if (ok(r.status)) by_p[r.p][r.N] = &r;
  }
  for (const auto& [p, rows] : by_p) {
    const EllipticRow* prev = nullptr;
    int level = 0;
    for (const auto& [N, r] : rows) {
      ++level;
      if (prev) {
        res.h_ratios.push_back({"elliptic", "p=" + std::to_string(p), 1.0 / N, p, level,
                                static_cast<double>(r->iterations) / prev->iterations,
                                r->estimate.k_pred / prev->estimate.k_pred, std::nullopt});
      }
      prev = r;
    }
  }
  const auto base = by_p.find(1);
  if (base == by_p.end()) return;
  for (const auto& [p, rows] : by_p) {
    if (p == 1) continue;
    int level = 0;
    for (const auto& [N, r] : rows) {
      ++level;
      const auto b = base->second.find(N);
      if (b == base->second.end()) continue;
      res.p_ratios.push_back({"elliptic", "N=" + std::to_string(N), 1.0 / N, p, level,
                              static_cast<double>(r->iterations) / b->second->iterations,
                              r->estimate.k_pred / b->second->estimate.k_pred, reported_elliptic_p_ratio(p, level)});
    }
  }
}

// ---------------------------------------------------------------- gates

struct GateBuilder {
  GateCheck gate;
  int checked = 0;
  int failed = 0;
  std::ostringstream notes;

  explicit GateBuilder(std::string name) { gate.name = std::move(name); }
  void check(bool pass, const std::string& what) {
    ++checked;
    if (!pass) {
      ++failed;
      if (failed <= 8) notes << (failed > 1 ? "; " : "") << what;
    }
  }
  GateCheck finish(const std::string& extra = "") {
    gate.passed = checked > 0 && failed == 0;
    std::ostringstream os;
    os << checked - failed << "/" << checked << " ok";
    if (failed > 0) os << "; failing: " << notes.str() << (failed > 8 ? "; ..." : "");
    if (!extra.empty()) os << "; " << extra;
    gate.detail = os.str();
    return gate;
  }
};

std::string sw_label(const ShallowWaterRow& r) {
  std::ostringstream os;
  os << "Nel=" << r.nel() << " p=" << r.p << " dt=" << r.dt << " " << to_string(r.scheme);
  return os.str();
}

std::string cdr_label(const ConvectionDiffusionRow& r) {
  std::ostringstream os;
  os << "h=" << r.h() << " p=" << r.p << " kappa=" << r.kappa << " " << to_string(r.scheme);
  return os.str();
}

void transport_gates(const ExperimentResult& res, std::vector<GateCheck>& out) {
  if (res.transport.empty()) return;
  GateBuilder counts("transport iteration counts within 2 of reported");
  GateBuilder finite("transport finite convergence to the direct solution with layer sweep");
  double total = 0.0;
  for (const auto& r : res.transport) {
    const std::string label = std::to_string(r.dim) + "D N=" + std::to_string(r.N) + " p=" + std::to_string(r.p);
    total += r.seconds;
    if (r.reported) {
      counts.check(ok(r.status) && std::abs(r.iterations - *r.reported) <= 2,
                   label + " " + std::to_string(r.iterations) + " vs " + std::to_string(*r.reported));
    }
    if (r.oracle_status == "ok") {
      finite.check(ok(r.status) && r.direct_diff >= 0.0 && r.direct_diff < 1e-8 && r.layers_ok,
                   label + " diff " + fmt(r.direct_diff) + (r.layers_ok ? "" : " layers"));
    } else if (r.oracle_status != "skipped") {
      finite.check(false, label + " oracle " + r.oracle_status);
    }
  }
  out.push_back(counts.finish());
  if (finite.checked > 0) out.push_back(finite.finish());
  GateCheck runtime{"transport sweep runtime under 2 minutes", total < 120.0, fmt(total) + " s"};
  out.push_back(runtime);
}

void shallow_water_gates(const ExperimentResult& res, std::vector<GateCheck>& out) {
  if (res.shallow_water.empty()) return;
  // iHDG-II counts: within 3, or within max(3, 30%) when the divergence pattern matches exactly.
  GateBuilder strict("strict");
  GateBuilder relaxed("relaxed");
  GateBuilder pattern("pattern");
  GateBuilder starred("shallow-water iHDG-I diverges at every reported divergence");
  for (const auto& r : res.shallow_water) {
    if (!r.reported) continue;
    const bool reported_div = *r.reported == kDiverged;
    const bool diverged = !ok(r.status);
    pattern.check(reported_div == diverged, sw_label(r) + (diverged ? " diverged" : " converged"));
    if (r.scheme == Scheme::ihdg1 && reported_div) starred.check(diverged, sw_label(r) + " converged");
    if (r.scheme == Scheme::ihdg2 && !reported_div) {
      const double dev = std::abs(r.mean_iterations - *r.reported);
      std::ostringstream what;
      what << sw_label(r) << " " << std::fixed << std::setprecision(1) << r.mean_iterations << " vs " << *r.reported;
      strict.check(!diverged && dev <= 3.0, what.str());
      relaxed.check(!diverged && dev <= std::max(3.0, 0.3 * *r.reported), what.str());
    }
  }
  GateCheck s = strict.finish();
  GateCheck rl = relaxed.finish();
  GateCheck pt = pattern.finish();
  GateCheck counts;
  counts.name = "shallow-water iHDG-II counts within 3 (or 30% with matching divergence pattern)";
  counts.passed = s.passed || (rl.passed && pt.passed);
  counts.detail = "within 3: " + s.detail + " | within 30%: " + rl.detail + " | pattern: " + pt.detail;
  out.push_back(counts);
  if (starred.checked > 0) out.push_back(starred.finish());

  GateBuilder scaling("shallow-water iHDG-II dt=0.1 vs dt=0.01 count ratio in [1.5, 12]");
  std::map<std::pair<int, int>, std::map<double, double>> means;
  for (const auto& r : res.shallow_water) {
    if (r.scheme == Scheme::ihdg2 && ok(r.status)) means[{r.N, r.p}][r.dt] = r.mean_iterations;
  }
  for (const auto& [key, m] : means) {
    const auto a = m.find(0.1);
    const auto b = m.find(0.01);
    if (a == m.end() || b == m.end()) continue;
    const double ratio = a->second / b->second;
    scaling.check(ratio >= 1.5 && ratio <= 12.0,
                  "Nel=" + std::to_string(key.first * key.first) + " p=" + std::to_string(key.second) + " " + fmt(ratio));
  }
  if (scaling.checked > 0) out.push_back(scaling.finish());
}

void convection_diffusion_gates(const ExperimentResult& res, std::vector<GateCheck>& out) {
  if (res.convection_diffusion.empty()) return;
  GateBuilder counts("convection-diffusion iHDG-II counts within 3 of reported");
  GateBuilder pattern("convection-diffusion iHDG-I diverges exactly where reported");
  std::map<std::pair<int, int>, std::pair<int, int>> spread;           // (N, p) -> (min, max)
  std::map<std::pair<int, int>, std::pair<int, int>> reported_spread;
  for (const auto& r : res.convection_diffusion) {
    if (!r.reported) continue;
    const bool reported_div = *r.reported == kDiverged;
    if (r.scheme == Scheme::ihdg2) {
      counts.check(ok(r.status) && std::abs(r.iterations - *r.reported) <= 3,
                   cdr_label(r) + " " + std::to_string(r.iterations) + " vs " + fmt(r.reported));
      auto& s = spread.try_emplace({r.N, r.p}, r.iterations, r.iterations).first->second;
      s = {std::min(s.first, r.iterations), std::max(s.second, r.iterations)};
      auto& q = reported_spread.try_emplace({r.N, r.p}, *r.reported, *r.reported).first->second;
      q = {std::min(q.first, *r.reported), std::max(q.second, *r.reported)};
    } else {
      pattern.check(reported_div == !ok(r.status), cdr_label(r) + (ok(r.status) ? " converged" : " diverged"));
    }
  }
  out.push_back(counts.finish());
  GateBuilder kappa("convection-diffusion iHDG-II kappa spread at most max(3, reported spread)");
  for (const auto& [key, s] : spread) {
    const int allowed = std::max(3, reported_spread[key].second - reported_spread[key].first);
    kappa.check(s.second - s.first <= allowed, "h=" + tag(1.0 / key.first) + " p=" + std::to_string(key.second) +
                                                   " spread " + std::to_string(s.second - s.first) + " > " +
                                                   std::to_string(allowed));
  }
  if (kappa.checked > 0) out.push_back(kappa.finish());
  if (pattern.checked > 0) out.push_back(pattern.finish());
}

void ratio_gates(const ExperimentResult& res, std::vector<GateCheck>& out) {
  // h ratios: the ratio between the two finest levels of each series.
  struct Bound {
    const char* study;
    double lo;
    double hi;
    const char* name;
  };
  const Bound bounds[] = {
      {"shallow_water", 1.4, 2.3, "shallow-water h ratio at the finest level in [1.4, 2.3]"},
      {"convection_diffusion", 1.5, 2.1, "convection-diffusion h ratio at the finest level in [1.5, 2.1]"},
      {"elliptic", 1.8, 2.6, "elliptic h ratio at the finest level in [1.8, 2.6]"},
  };
  for (const auto& b : bounds) {
    std::map<std::string, const RatioRow*> finest;
    for (const auto& r : res.h_ratios) {
      if (r.study != b.study) continue;
      if (r.study == std::string("shallow_water") && r.series.find("dt=0.1") == std::string::npos) continue;
      auto& f = finest[r.series];
      if (!f || r.level > f->level) f = &r;
    }
    if (finest.empty()) continue;
    GateBuilder g(b.name);
    for (const auto& [series, r] : finest) {
      g.check(r->measured >= b.lo && r->measured <= b.hi, series + " " + fmt(r->measured));
    }
    out.push_back(g.finish());
  }
  std::map<int, const RatioRow*> finest;
  for (const auto& r : res.p_ratios) {
    if (r.study != "elliptic") continue;
    auto& f = finest[r.p];
    if (!f || r.h < f->h) f = &r;
  }
  if (!finest.empty()) {
    GateBuilder g("elliptic p ratio within 25% of (p+1)(p+2)/6 at the finest mesh");
    for (const auto& [p, r] : finest) {
      const double target = (p + 1.0) * (p + 2.0) / 6.0;
      g.check(std::abs(r->measured - target) <= 0.25 * target,
              "p=" + std::to_string(p) + " " + fmt(r->measured) + " vs " + fmt(target));
    }
    out.push_back(g.finish());
  }
}

void contraction_gates(const ExperimentResult& res, std::vector<GateCheck>& out) {
  GateBuilder g("measured contraction within the predicted bound");
  for (const auto& r : res.shallow_water) {
    if (!r.estimate.admissible || !ok(r.status) || !(r.contraction > 0.0)) continue;
    g.check(r.contraction <= r.estimate.C, sw_label(r) + " " + fmt(r.contraction) + " > C=" + fmt(r.estimate.C));
  }
  for (const auto& r : res.convection_diffusion) {
    if (!r.estimate.admissible || !ok(r.status) || !(r.contraction > 0.0)) continue;
    g.check(r.contraction <= r.estimate.D, cdr_label(r) + " " + fmt(r.contraction) + " > D=" + fmt(r.estimate.D));
  }
  if (res.shallow_water.empty() && res.convection_diffusion.empty()) return;
  int inadmissible = 0;
  for (const auto& r : res.shallow_water) inadmissible += r.estimate.admissible ? 0 : 1;
  for (const auto& r : res.convection_diffusion) inadmissible += r.estimate.admissible ? 0 : 1;
  GateCheck c = g.finish(std::to_string(inadmissible) + " configs outside the admissible range");
  if (g.checked == 0) {
    c.passed = true;
    c.detail = "no admissible configs; " + c.detail;
  }
  out.push_back(c);
}

void cfl_gates(const ExperimentResult& res, std::vector<GateCheck>& out) {
  const CflRow* one = nullptr;
  const CflRow* five = nullptr;
  for (const auto& r : res.cfl) {
    if (!ok(r.status)) continue;
    if (std::abs(r.cfl - 1.0) < 0.1 && (!one || std::abs(r.cfl - 1.0) < std::abs(one->cfl - 1.0))) one = &r;
    if (std::abs(r.cfl - 5.0) < 0.5 && (!five || std::abs(r.cfl - 5.0) < std::abs(five->cfl - 5.0))) five = &r;
  }
  if (res.cfl.empty()) return;
  GateCheck g;
  g.name = "iterations per step at CFL 5 at most 3x those at CFL 1";
  if (!one || !five) {
    g.passed = false;
    g.detail = "no converged runs near CFL 1 and CFL 5";
  } else {
    g.passed = five->mean_iterations <= 3.0 * one->mean_iterations;
    g.detail = fmt(five->mean_iterations) + " vs " + fmt(one->mean_iterations);
  }
  out.push_back(g);
}

// ---------------------------------------------------------------- output

nlohmann::json estimate_json(const ContractionEstimate& e) {
  nlohmann::json j;
  j["eps"] = e.eps;
  j["B"] = e.B;
  j["admissible"] = e.admissible;
  j["k_pred"] = e.k_pred;
  if (e.Phi > 0.0) {
    j["C"] = e.C;
    j["constraint"] = e.constraint;
  } else {
    j["D"] = e.D;
  }
  return j;
}

double finite_or(double x, double fallback) { return std::isfinite(x) ? x : fallback; }

}  // namespace

bool ExperimentResult::passed() const {
  return std::all_of(gates.begin(), gates.end(), [](const GateCheck& g) { return g.passed; });
}

std::vector<std::string> experiment_names() {
  return {"table2", "table6", "table7", "elliptic_ratios", "cfl", "all"};
}

void validate(const ExperimentConfig& cfg) {
  const auto names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.preset) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown experiment '" + cfg.preset + "' (expected one of " + list + ")");
  }
  for (int n : cfg.meshes) {
    if (n < 1) throw std::invalid_argument("mesh sizes must be >= 1");
  }
  for (int p : cfg.orders) {
    if (p < 1 || p > 10) throw std::invalid_argument("orders must lie in [1, 10]");
  }
  for (double v : cfg.dts) {
    if (!(v > 0.0)) throw std::invalid_argument("time steps must be positive");
  }
  for (double v : cfg.kappas) {
    if (!(v > 0.0)) throw std::invalid_argument("kappa must be positive");
  }
  for (double v : cfg.cfls) {
    if (!(v > 0.0)) throw std::invalid_argument("CFL numbers must be positive");
  }
  if (cfg.dim < 0 || cfg.dim > 3) throw std::invalid_argument("dim must be 0 (default), 1, 2 or 3");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (cfg.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  if (cfg.workers < 1) throw std::invalid_argument("workers must be >= 1");
  if (!(cfg.final_time > 0.0)) throw std::invalid_argument("final_time must be positive");
  if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
}

void apply_setting(ExperimentConfig& cfg, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  auto ints = [&] {
    std::vector<int> v;
    for (const auto& s : split_list(value)) v.push_back(to_int(key, s));
    return v;
  };
  auto doubles = [&] {
    std::vector<double> v;
    for (const auto& s : split_list(value)) v.push_back(to_double(key, s));
    return v;
  };
  if (key == "preset") {
    cfg.preset = value;
  } else if (key == "mesh") {
    cfg.meshes = ints();
  } else if (key == "order") {
    cfg.orders = ints();
  } else if (key == "dt") {
    cfg.dts = doubles();
  } else if (key == "kappa") {
    cfg.kappas = doubles();
  } else if (key == "cfl") {
    cfg.cfls = doubles();
  } else if (key == "scheme") {
    cfg.schemes.clear();
    for (const auto& s : split_list(value)) {
      if (s == "both" || s == "all") {
        cfg.schemes = {Scheme::ihdg1, Scheme::ihdg2};
      } else {
        cfg.schemes.push_back(parse_scheme(s));
      }
    }
  } else if (key == "dim") {
    cfg.dim = to_int(key, value);
  } else if (key == "stop") {
    cfg.stop = parse_stop_rule(value);
  } else if (key == "tol") {
    cfg.tol = to_double(key, value);
  } else if (key == "max_iters" || key == "max-iters") {
    cfg.max_iters = to_int(key, value);
  } else if (key == "workers") {
    cfg.workers = to_int(key, value);
  } else if (key == "final_time" || key == "final-time") {
    cfg.final_time = to_double(key, value);
  } else if (key == "steps") {
    cfg.steps = to_int(key, value);
  } else if (key == "oracle") {
    cfg.oracle = to_bool(key, value);
  } else if (key == "histories") {
    cfg.histories = to_bool(key, value);
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "seed") {
    cfg.seed = static_cast<unsigned>(to_int(key, value));
  } else {
    throw std::invalid_argument("unknown configuration key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open configuration file " + path);
  return parse_config(in);
}

std::vector<GateCheck> evaluate_gates(const ExperimentResult& result) {
  std::vector<GateCheck> out;
  transport_gates(result, out);
  shallow_water_gates(result, out);
  convection_diffusion_gates(result, out);
  ratio_gates(result, out);
  contraction_gates(result, out);
  cfl_gates(result, out);
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  validate(cfg);
  const auto t0 = Clock::now();
  ExperimentResult res;
  const bool all = cfg.preset == "all";
  if (all || cfg.preset == "table2") transport_sweep(cfg, res, log);
  if (all || cfg.preset == "table6") {
    shallow_water_sweep(cfg, res, log);
    shallow_water_ratios(res);
  }
  if (all || cfg.preset == "table7") {
    convection_diffusion_sweep(cfg, res, log);
    convection_diffusion_ratios(res);
  }
  if (all || cfg.preset == "elliptic_ratios") {
    elliptic_sweep(cfg, res, log);
    elliptic_ratios(res);
  }
  if (all || cfg.preset == "cfl") cfl_sweep(cfg, res, log);
  res.gates = evaluate_gates(res);
  res.seconds = seconds_since(t0);
  if (!cfg.out_dir.empty()) write_artifacts(res, cfg);
  return res;
}

void write_artifacts(const ExperimentResult& res, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  if (!res.transport.empty()) {
    CsvWriter w(dir / "transport_iters.csv",
                {"dim", "N", "Nel", "p", "scheme", "status", "iterations", "reported", "predicted_layers", "l2_error",
                 "seconds", "oracle_status", "direct_diff", "layers_ok"});
    for (const auto& r : res.transport) {
      w.row({std::to_string(r.dim), std::to_string(r.N), std::to_string(static_cast<int>(std::pow(r.N, r.dim))),
             std::to_string(r.p), to_string(r.scheme), r.status, std::to_string(r.iterations), fmt(r.reported),
             std::to_string(r.predicted_layers), fmt(r.l2_error), fmt(r.seconds), r.oracle_status,
             fmt(r.direct_diff), r.layers_ok ? "1" : "0"});
    }
  }
  if (!res.shallow_water.empty()) {
    CsvWriter w(dir / "sw_compare.csv",
                {"Nel", "p", "dt", "scheme", "status", "steps", "failed_step", "mean_iterations", "first_iterations",
                 "max_iterations", "reported", "eps", "C", "admissible", "k_pred", "contraction", "seconds"});
    for (const auto& r : res.shallow_water) {
      w.row({std::to_string(r.nel()), std::to_string(r.p), fmt(r.dt), to_string(r.scheme), r.status,
             std::to_string(r.steps), std::to_string(r.failed_step), fmt(r.mean_iterations),
             std::to_string(r.first_iterations), std::to_string(r.max_iterations), fmt(r.reported),
             fmt(r.estimate.eps), fmt(r.estimate.C), r.estimate.admissible ? "1" : "0", fmt(r.estimate.k_pred),
             fmt(r.contraction), fmt(r.seconds)});
    }
  }
  if (!res.convection_diffusion.empty()) {
    CsvWriter w(dir / "cdr_compare.csv", {"h", "p", "kappa", "scheme", "status", "iterations", "reported", "eps", "D",
                                          "admissible", "k_pred", "contraction", "l2_error", "seconds"});
    for (const auto& r : res.convection_diffusion) {
      w.row({fmt(r.h()), std::to_string(r.p), fmt(r.kappa), to_string(r.scheme), r.status,
             std::to_string(r.iterations), fmt(r.reported), fmt(r.estimate.eps), fmt(r.estimate.D),
             r.estimate.admissible ? "1" : "0", fmt(r.estimate.k_pred), fmt(r.contraction), fmt(r.l2_error),
             fmt(r.seconds)});
    }
  }
  if (!res.elliptic.empty()) {
    CsvWriter w(dir / "elliptic_iters.csv", {"dim", "h", "p", "status", "iterations", "k_pred", "seconds"});
    for (const auto& r : res.elliptic) {
      w.row({std::to_string(r.dim), fmt(1.0 / r.N), std::to_string(r.p), r.status, std::to_string(r.iterations),
             fmt(r.estimate.k_pred), fmt(r.seconds)});
    }
  }
  auto ratio_csv = [&](const char* name, const std::vector<RatioRow>& rows) {
    if (rows.empty()) return;
    CsvWriter w(dir / name, {"study", "series", "h", "p", "level", "measured", "predicted", "reported"});
    for (const auto& r : rows) {
      w.row({r.study, r.series, fmt(r.h), std::to_string(r.p), std::to_string(r.level), fmt(r.measured),
             fmt(r.predicted), fmt(r.reported)});
    }
  };
  ratio_csv("h_ratio.csv", res.h_ratios);
  ratio_csv("p_ratio.csv", res.p_ratios);
  if (!res.cfl.empty()) {
    CsvWriter w(dir / "cfl_iters.csv",
                {"N", "p", "dt", "cfl", "status", "steps", "mean_iterations", "max_iterations", "seconds"});
    for (const auto& r : res.cfl) {
      w.row({std::to_string(r.N), std::to_string(r.p), fmt(r.dt), fmt(r.cfl), r.status, std::to_string(r.steps),
             fmt(r.mean_iterations), std::to_string(r.max_iterations), fmt(r.seconds)});
    }
  }

  nlohmann::json j;
  j["experiment"] = cfg.preset;
  j["seconds"] = res.seconds;
  j["passed"] = res.passed();
  j["config"] = {{"tol", cfg.tol}, {"workers", cfg.workers}, {"final_time", cfg.final_time}, {"seed", cfg.seed}};
  for (const auto& g : res.gates) j["gates"].push_back({{"name", g.name}, {"passed", g.passed}, {"detail", g.detail}});
  for (const auto& r : res.shallow_water) {
    j["shallow_water"].push_back({{"Nel", r.nel()}, {"p", r.p}, {"dt", r.dt}, {"scheme", to_string(r.scheme)},
                                  {"status", r.status}, {"mean_iterations", r.mean_iterations},
                                  {"reported", r.reported ? nlohmann::json(*r.reported) : nlohmann::json()},
                                  {"contraction", r.contraction}, {"predictor", estimate_json(r.estimate)}});
  }
  for (const auto& r : res.convection_diffusion) {
    j["convection_diffusion"].push_back(
        {{"h", r.h()}, {"p", r.p}, {"kappa", r.kappa}, {"scheme", to_string(r.scheme)}, {"status", r.status},
         {"iterations", r.iterations}, {"reported", r.reported ? nlohmann::json(*r.reported) : nlohmann::json()},
         {"contraction", finite_or(r.contraction, -1.0)}, {"predictor", estimate_json(r.estimate)}});
  }
  for (const auto& r : res.elliptic) {
    j["elliptic"].push_back({{"h", 1.0 / r.N}, {"p", r.p}, {"status", r.status}, {"iterations", r.iterations},
                             {"predictor", estimate_json(r.estimate)}});
  }
  for (const auto& r : res.transport) {
    j["transport"].push_back({{"dim", r.dim}, {"N", r.N}, {"p", r.p}, {"status", r.status},
                              {"iterations", r.iterations},
                              {"reported", r.reported ? nlohmann::json(*r.reported) : nlohmann::json()},
                              {"predicted_layers", r.predicted_layers}});
  }
  std::ofstream(dir / "summary.json") << j.dump(2) << '\n';
}

std::vector<ScalingRow> thread_scaling_smoke(const ScalingConfig& cfg, std::ostream* log) {
  const Preset preset = make_preset("transport3d_diag");
  const auto d = discretize(preset.problem, 3, cfg.N, cfg.p);
  std::vector<ScalingRow> rows;
  for (int w : cfg.workers) {
    IterationConfig ic;
    ic.stop = StopRule::exact;
    ic.workers = w;
    const auto t0 = Clock::now();
    const IterationReport rep = run(d->mesh, preset.problem, d->ops, ic);
    ScalingRow row;
    row.workers = w;
    row.seconds = seconds_since(t0);
    row.iterations = rep.iterations;
    row.l2_error = rep.history.empty() ? -1.0 : rep.history.back().l2_error;
    rows.push_back(row);
    std::ostringstream msg;
    msg << "scaling workers=" << w << ": " << row.iterations << " iterations, " << std::setprecision(3)
        << row.seconds << " s";
    log_line(log, msg.str());
  }
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    CsvWriter w(std::filesystem::path(cfg.out_dir) / "thread_scaling.csv",
                {"workers", "seconds", "iterations", "l2_error"});
    for (const auto& r : rows) {
      w.row({std::to_string(r.workers), fmt(r.seconds), std::to_string(r.iterations), fmt(r.l2_error)});
    }
  }
  return rows;
}

SingleRunResult run_single(const SingleRunConfig& cfg) {
  SingleRunResult out;
  PresetOptions po;
  po.kappa = cfg.kappa;
  po.dim = cfg.dim;
  const Preset preset = make_preset(cfg.preset, po);
  const int dim = problem_dim(preset.problem);
  const auto d = discretize(preset.problem, dim, cfg.N, cfg.p);
  validate(cfg.iteration);
  const auto t0 = Clock::now();
  if (!is_time_dependent(preset.problem)) {
    std::optional<DirectSolution> ref;
    RunInputs in;
    if (cfg.iteration.stop == StopRule::vs_direct) {
      ref = solve_direct(d->mesh, preset.problem, d->ops);
      in.reference = &ref->volume;
    }
    const IterationReport rep = run(d->mesh, preset.problem, d->ops, cfg.iteration, in);
    out.status = to_string(rep.status);
    out.steps = 1;
    out.iterations.push_back(rep.iterations);
    if (!rep.history.empty()) out.l2_error = rep.history.back().l2_error;
    if (ref) out.direct_diff = l2_diff(rep.solution, ref->volume, d->ops, monitored_components(preset.problem));
    if (!cfg.history_path.empty()) write_history_csv(rep, cfg.history_path);
  } else {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("time-dependent presets need dt > 0");
    const bool sw = std::holds_alternative<ShallowWaterProblem>(preset.problem);
    const TimeScheme scheme =
        sw && !cfg.backward_euler ? TimeScheme::crank_nicolson : TimeScheme::backward_euler;
    const LocalSolverSet solvers(preset.problem, d->mesh, d->ops, {scheme, cfg.dt}, cfg.iteration.scheme,
                                 cfg.iteration.workers);
    const auto exact = exact_solution(preset.problem);
    const FieldState init = project([&](const Point& x) { return exact(x, 0.0); }, num_components(preset.problem),
                                    d->mesh, d->ops);
    const int steps = cfg.final_time > 0.0 ? std::max(1, static_cast<int>(std::lround(cfg.final_time / cfg.dt))) : 1;
    const TimeRunReport tr = run_time_dependent(solvers, init, 0.0, steps, cfg.iteration);
    out.status = tr.failed_step >= 0 ? to_string(tr.steps.back().status) : "converged";
    out.steps = static_cast<int>(tr.steps.size());
    for (const auto& r : tr.steps) out.iterations.push_back(r.iterations);
    if (!tr.steps.empty() && !tr.steps.back().history.empty()) out.l2_error = tr.steps.back().history.back().l2_error;
    if (!cfg.history_path.empty()) write_history_csv(tr.steps.front(), cfg.history_path);
  }
  out.seconds = seconds_since(t0);
  return out;
}

}  // namespace ihdg
