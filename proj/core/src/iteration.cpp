#include "ihdg/iteration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <variant>

namespace ihdg {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Values row_values(const Eigen::Map<const Mat>& T, int q) {
  Values v{};
  for (int c = 0; c < T.cols(); ++c) v[static_cast<std::size_t>(c)] = T(q, c);
  return v;
}

}  // namespace

const char* to_string(StopRule r) {
  switch (r) {
    case StopRule::exact: return "exact";
    case StopRule::successive: return "successive";
    case StopRule::vs_direct: return "vs-direct";
  }
  return "unknown";
}

StopRule parse_stop_rule(const std::string& name) {
  if (name == "exact") return StopRule::exact;
  if (name == "successive") return StopRule::successive;
  if (name == "vs-direct" || name == "vs_direct" || name == "direct") return StopRule::vs_direct;
  throw std::invalid_argument("unknown stopping rule '" + name + "' (exact, successive, vs-direct)");
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged: return "converged";
    case RunStatus::diverged: return "diverged";
    case RunStatus::max_iter: return "max-iter";
  }
  return "unknown";
}

void validate(const IterationConfig& cfg) {
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (cfg.max_iters < 0) throw std::invalid_argument("max iterations must be >= 1 (0 selects the default)");
  if (cfg.workers < 1) throw std::invalid_argument("worker count must be >= 1");
}

int default_max_iterations(const StructuredMesh& mesh, double predicted) {
  const int d = mesh.dim();
  const double layers = d * std::pow(static_cast<double>(mesh.num_elements()), 1.0 / d);
  return std::max(50, static_cast<int>(std::ceil(10.0 * (std::max(predicted, 0.0) + layers))));
}

double interface_trace(const ProblemSpec& problem, const Point& x, const Point& n, const Values& own,
                       const Values& neighbor) {
  const int m = num_components(problem);
  const int r = conserved_row(problem);
  const Point nn{-n[0], -n[1], -n[2]};
  const TraceFlux a = trace_flux(problem, x, n);
  const TraceFlux b = trace_flux(problem, x, nn);
  double num = 0.0;
  for (int c = 0; c < m; ++c) {
    num += a.G(r, c) * own[static_cast<std::size_t>(c)] + b.G(r, c) * neighbor[static_cast<std::size_t>(c)];
  }
  const double den = a.H(r) + b.H(r);
  if (std::abs(den) < 1e-14) {
    return 0.5 * (own[static_cast<std::size_t>(r)] + neighbor[static_cast<std::size_t>(r)]);
  }
  return -num / den;
}

double trace_energy(const ProblemSpec& problem, const StructuredMesh& mesh, const ElementOperators& ops,
                    const FaceTraces& traces) {
  const int nqf = ops.num_face_quad();
  double total = 0.0;
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int f = 0; f < ops.num_faces(); ++f) {
      const Point n = mesh.local_normal(f);
      const Vec& w = ops.face_weights(f);
      const auto T = traces.matrix(e, f);
      for (int q = 0; q < nqf; ++q) {
        double v = 0.0;
        std::visit(overloaded{[&](const TransportProblem&) { v = T(q, 0) * T(q, 0); },
                              [&](const ShallowWaterProblem& sw) {
                                const double un = T(q, 1) * n[0] + T(q, 2) * n[1];
                                v = T(q, 0) * T(q, 0) + sw.Phi * un * un;
                              },
                              [&](const ConvectionDiffusionProblem& cd) {
                                double sn = 0.0;
                                for (int a = 0; a < cd.dim; ++a) sn += T(q, a) * n[static_cast<std::size_t>(a)];
                                v = sn * sn + T(q, cd.dim) * T(q, cd.dim);
                              }},
                   problem);
        total += w(q) * v;
      }
    }
  }
  return total;
}

double trace_energy(const ProblemSpec& problem, const StructuredMesh& mesh, const ElementOperators& ops,
                    const FieldState& state) {
  return trace_energy(problem, mesh, ops, compute_face_traces(state, ops));
}

double trace_jump(const ProblemSpec& problem, const StructuredMesh& mesh, const ElementOperators& ops,
                  const FaceTraces& next, const FaceTraces& previous) {
  const int nqf = ops.num_face_quad();
  double total = 0.0;
  for (const Face& face : mesh.faces()) {
    if (face.is_boundary()) continue;
    const int e = face.owner;
    const int f = face.owner_local;
    const int nb = face.neighbor;
    const Point n = mesh.local_normal(f);
    const Point nn{-n[0], -n[1], -n[2]};
    const auto pts = ops.face_quad_points(mesh, e, f);
    const Vec& w = ops.face_weights(f);
    const auto own_new = next.matrix(e, f);
    const auto own_old = previous.matrix(e, f);
    const auto nb_new = next.matrix(nb, f ^ 1);
    const auto nb_old = previous.matrix(nb, f ^ 1);
    for (int q = 0; q < nqf; ++q) {
      const Point& x = pts[static_cast<std::size_t>(q)];
      const double a = interface_trace(problem, x, n, row_values(own_new, q), row_values(nb_old, q));
      const double b = interface_trace(problem, x, nn, row_values(nb_new, q), row_values(own_old, q));
      total += w(q) * (a - b) * (a - b);
    }
  }
  return std::sqrt(total);
}

IterationReport run(const LocalSolverSet& solvers, const FieldState& base, FieldState initial,
                    const IterationConfig& cfg, const RunInputs& inputs) {
  validate(cfg);
  if (cfg.scheme != solvers.scheme()) {
    throw std::invalid_argument("iteration scheme differs from the factorized local solvers");
  }
  const auto t_start = Clock::now();
  const ProblemSpec& problem = solvers.problem();
  const StructuredMesh& mesh = solvers.mesh();
  const ElementOperators& ops = solvers.ops();
  const ComponentRange monitored = monitored_components(problem);
  const TimeField exact = exact_solution(problem);
  if (cfg.stop == StopRule::exact && !exact) {
    throw std::invalid_argument("exact-solution stopping rule needs a problem with a known solution");
  }
  if ((cfg.stop == StopRule::vs_direct || cfg.track_layers) && inputs.reference == nullptr) {
    throw std::invalid_argument("vs-direct stopping and layer tracking need a reference solution");
  }
  FieldFunction exact_now;
  if (exact) exact_now = [&exact, t = inputs.time](const Point& x) { return exact(x, t); };
  const int max_iters = cfg.max_iters > 0 ? cfg.max_iters : default_max_iterations(mesh);

  IterationReport rep;
  FieldState cur = std::move(initial);
  FieldState next(cur.num_elements(), cur.num_components(), cur.nodes_per_element());
  FaceTraces cur_tr = compute_face_traces(cur, ops, cfg.workers);
  double prev_error = exact ? l2_error(cur, exact_now, mesh, ops, monitored) : -1.0;
  double first_successive = -1.0;
  double log_ratio_sum = 0.0;
  int ratio_count = 0;
  double first_energy = -1.0;

  for (int k = 1; k <= max_iters; ++k) {
    const auto t_it = Clock::now();
    solvers.sweep(base, cur, cur_tr, next, cfg.workers);
    FaceTraces next_tr = compute_face_traces(next, ops, cfg.workers);

    IterationRecord rec;
    rec.iteration = k;
    rec.successive_norm = l2_diff(next, cur, ops, monitored);
    FieldState delta = next;
    for (std::size_t i = 0; i < delta.data().size(); ++i) delta.data()[i] -= cur.data()[i];
    rec.trace_energy = trace_energy(problem, mesh, ops, delta);
    rec.trace_jump = trace_jump(problem, mesh, ops, next_tr, cur_tr);
    if (exact) rec.l2_error = l2_error(next, exact_now, mesh, ops, monitored);
    if (inputs.reference != nullptr && cfg.track_layers) {
      std::vector<int> set;
      for (int e = 0; e < mesh.num_elements(); ++e) {
        if (std::sqrt(element_l2_diff_sq(next, *inputs.reference, e, ops, monitored)) < cfg.layer_tol) {
          set.push_back(e);
        }
      }
      rec.converged_elements = static_cast<int>(set.size());
      rep.converged_sets.push_back(std::move(set));
    }

    if (k >= 2 && rep.history.back().trace_energy > 0.0 && rec.trace_energy > 0.0 &&
        rec.trace_energy > 1e-24 * first_energy) {
      const double ratio = rec.trace_energy / rep.history.back().trace_energy;
      log_ratio_sum += std::log(ratio);
      ++ratio_count;
      rep.max_contraction = std::max(rep.max_contraction, ratio);
    }
    if (first_energy < 0.0) first_energy = rec.trace_energy;

    double criterion = 0.0;
    switch (cfg.stop) {
      case StopRule::exact: criterion = std::abs(rec.l2_error - prev_error); break;
      case StopRule::successive: criterion = rec.successive_norm; break;
      case StopRule::vs_direct: criterion = l2_diff(next, *inputs.reference, ops, monitored); break;
    }
    prev_error = rec.l2_error;
    rec.elapsed_ms = ms_since(t_it);
    rep.history.push_back(rec);
    rep.iterations = k;
    rep.final_criterion = criterion;
    std::swap(cur, next);
    cur_tr = std::move(next_tr);
    cur.iterate = k;

    if (first_successive < 0.0) first_successive = rec.successive_norm;
    if (!std::isfinite(rec.successive_norm) || !std::isfinite(criterion) ||
        rec.successive_norm > cfg.divergence_factor * std::max(first_successive, 1e-300)) {
      rep.status = RunStatus::diverged;
      break;
    }
    if (criterion < cfg.tol) {
      rep.status = RunStatus::converged;
      break;
    }
  }
  if (ratio_count > 0) rep.contraction_factor = std::exp(log_ratio_sum / ratio_count);
  rep.solution = std::move(cur);
  rep.wall_seconds = ms_since(t_start) / 1000.0;
  return rep;
}

IterationReport run(const StructuredMesh& mesh, const ProblemSpec& problem, const ElementOperators& ops,
                    const IterationConfig& cfg, const RunInputs& inputs) {
  if (is_time_dependent(problem)) {
    throw std::invalid_argument("time-dependent problems go through run_time_dependent");
  }
  const LocalSolverSet solvers(problem, mesh, ops, TimeConfig{}, cfg.scheme, cfg.workers);
  const FieldState base = solvers.base_rhs(nullptr, inputs.time, inputs.time);
  FieldState zero(mesh.num_elements(), solvers.num_components(), ops.num_nodes());
  return run(solvers, base, std::move(zero), cfg, inputs);
}

const std::vector<std::vector<int>>& layer_convergence_map(const IterationReport& report) {
  return report.converged_sets;
}

std::vector<int> layer_counts(const IterationReport& report, const StructuredMesh& mesh) {
  std::vector<int> counts;
  counts.reserve(report.converged_sets.size());
  for (const auto& set : report.converged_sets) {
    // Number of complete anti-diagonal layers contained in the set.
    std::vector<int> per_layer_total;
    std::vector<int> per_layer_hit;
    for (int e = 0; e < mesh.num_elements(); ++e) {
      const auto idx = mesh.element_index(e);
      const int layer = idx[0] + idx[1] + idx[2];
      if (layer >= static_cast<int>(per_layer_total.size())) {
        per_layer_total.resize(static_cast<std::size_t>(layer) + 1, 0);
        per_layer_hit.resize(static_cast<std::size_t>(layer) + 1, 0);
      }
      ++per_layer_total[static_cast<std::size_t>(layer)];
    }
    for (int e : set) {
      const auto idx = mesh.element_index(e);
      ++per_layer_hit[static_cast<std::size_t>(idx[0] + idx[1] + idx[2])];
    }
    int complete = 0;
    while (complete < static_cast<int>(per_layer_total.size()) &&
           per_layer_hit[static_cast<std::size_t>(complete)] == per_layer_total[static_cast<std::size_t>(complete)]) {
      ++complete;
    }
    counts.push_back(complete);
  }
  return counts;
}

TimeRunReport run_time_dependent(const LocalSolverSet& solvers, const FieldState& initial, double t0,
                                 int num_steps, const IterationConfig& cfg) {
  if (!solvers.time().transient()) throw std::invalid_argument("local solvers are not time-dependent");
  if (num_steps < 1) throw std::invalid_argument("need at least one time step");
  TimeRunReport out;
  const double dt = solvers.time().dt;
  out.cfl = cfl_number(max_wave_speed(solvers.problem(), solvers.mesh(), solvers.ops()), dt,
                       solvers.ops().order(), solvers.mesh().meshsize());
  FieldState level = initial;
  double t = t0;
  for (int step = 0; step < num_steps; ++step) {
    const double t_next = t0 + (step + 1) * dt;
    const FieldState base = solvers.base_rhs(&level, t, t_next);
    RunInputs inputs;
    inputs.time = t_next;
    IterationReport rep = run(solvers, base, level, cfg, inputs);
    level = std::move(rep.solution);
    level.time_level = step + 1;
    rep.solution = FieldState();
    const bool ok = rep.status == RunStatus::converged;
    out.steps.push_back(std::move(rep));
    t = t_next;
    if (!ok) {
      out.failed_step = step;
      break;
    }
  }
  out.final_state = std::move(level);
  out.final_time = t;
  return out;
}

double cfl_number(double max_speed, double dt, int order, double h) {
  return max_speed * dt * order * order / h;
}

double max_wave_speed(const ProblemSpec& problem, const StructuredMesh& mesh, const ElementOperators& ops) {
  return std::visit(
      overloaded{[](const ShallowWaterProblem& sw) { return std::sqrt(sw.Phi); },
                 [&](const auto& p) {
                   double m = 0.0;
                   for (int e = 0; e < mesh.num_elements(); ++e) {
                     for (const Point& x : ops.quad_points(mesh, e)) {
                       const Point b = p.beta(x);
                       double s = 0.0;
                       for (int a = 0; a < p.dim; ++a) s += b[static_cast<std::size_t>(a)] * b[static_cast<std::size_t>(a)];
                       m = std::max(m, std::sqrt(s));
                     }
                   }
                   return m;
                 }},
      problem);
}

void write_history_csv(const IterationReport& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os.precision(17);
  os << "iteration,l2_error,successive_norm,trace_energy,converged_elements,elapsed_ms\n";
  for (const auto& r : report.history) {
    os << r.iteration << ',' << r.l2_error << ',' << r.successive_norm << ',' << r.trace_energy << ','
       << r.converged_elements << ',' << r.elapsed_ms << '\n';
  }
}

}  // namespace ihdg
