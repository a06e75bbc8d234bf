#include <doctest.h>

#include <cmath>

#include "ihdg/reference_hdg.hpp"
#include "support.hpp"

using namespace ihdg;

namespace {

TransportProblem linear_transport(int dim) {
  // u = 1 + x + 2y (+ 3z), beta = 1: f = beta . grad u
  TransportProblem tp;
  tp.dim = dim;
  tp.beta = [](const Point&) { return Point{1.0, 1.0, 1.0}; };
  auto u = [dim](const Point& x, double) { return 1.0 + x[0] + 2.0 * x[1] + (dim == 3 ? 3.0 * x[2] : 0.0); };
  tp.forcing = [dim](const Point&, double) { return dim == 1 ? 1.0 : (dim == 2 ? 3.0 : 6.0); };
  tp.inflow = u;
  tp.exact = u;
  return tp;
}

TransportProblem zero_transport() {
  TransportProblem tp;
  tp.dim = 2;
  tp.beta = [](const Point&) { return Point{1.0, 0.5, 0.0}; };
  tp.forcing = [](const Point&, double) { return 0.0; };
  tp.inflow = [](const Point&, double) { return 0.0; };
  tp.exact = [](const Point&, double) { return 0.0; };
  return tp;
}

}  // namespace

TEST_CASE("stopping rule names and configuration checks") {
  CHECK(parse_stop_rule("vs-direct") == StopRule::vs_direct);
  CHECK(std::string(to_string(StopRule::successive)) == "successive");
  CHECK_THROWS_AS(parse_stop_rule("never"), std::invalid_argument);
  IterationConfig bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = {};
  bad.workers = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("a zero problem converges in one iteration") {
  const ProblemSpec problem = zero_transport();
  const auto s = test::make_setup(problem, 2, 4, 2);
  for (StopRule rule : {StopRule::exact, StopRule::successive}) {
    IterationConfig cfg;
    cfg.stop = rule;
    const auto rep = run(s->mesh, problem, s->ops, cfg);
    CHECK(rep.status == RunStatus::converged);
    CHECK(rep.iterations == 1);
  }
}

TEST_CASE("linear solutions are reproduced exactly by both solvers") {
  for (int dim : {2, 3}) {
    const ProblemSpec problem = linear_transport(dim);
    const auto s = test::make_setup(problem, dim, 3, 1);
    const auto direct = solve_direct(s->mesh, problem, s->ops);
    const auto exact = exact_solution(problem);
    CHECK(l2_error(direct.volume, [&](const Point& x) { return exact(x, 0.0); }, s->mesh, s->ops) < 1e-12);
    IterationConfig cfg;
    cfg.stop = StopRule::exact;
    const auto rep = run(s->mesh, problem, s->ops, cfg);
    CHECK(rep.status == RunStatus::converged);
    CHECK(rep.history.back().l2_error < 1e-10);
  }
}

TEST_CASE("one-dimensional transport converges after one sweep per element") {
  TransportProblem tp;
  tp.dim = 1;
  tp.beta = [](const Point&) { return Point{1.0, 0.0, 0.0}; };
  tp.forcing = [](const Point& x, double) { return std::cos(x[0]); };
  tp.inflow = [](const Point& x, double) { return std::sin(x[0]); };
  tp.exact = tp.inflow;
  const ProblemSpec problem = tp;
  const auto s = test::make_setup(problem, 1, 5, 3);
  const auto direct = solve_direct(s->mesh, problem, s->ops);
  IterationConfig cfg;
  cfg.stop = StopRule::vs_direct;
  cfg.tol = 1e-12;
  cfg.track_layers = true;
  const auto rep = run(s->mesh, problem, s->ops, cfg, {&direct.volume});
  CHECK(rep.status == RunStatus::converged);
  CHECK(rep.iterations == 5);
  const auto layers = layer_counts(rep, s->mesh);
  CHECK(layers == std::vector<int>{1, 2, 3, 4, 5});
}

TEST_CASE("layer convergence map on a 4x4 transport grid") {
  const Preset preset = make_preset("transport2d_diag");
  const auto s = test::make_setup(preset.problem, 2, 4, 2);
  const auto direct = solve_direct(s->mesh, preset.problem, s->ops);
  IterationConfig cfg;
  cfg.stop = StopRule::vs_direct;
  cfg.tol = 1e-12;
  cfg.track_layers = true;
  const auto rep = run(s->mesh, preset.problem, s->ops, cfg, {&direct.volume});
  const auto layers = layer_counts(rep, s->mesh);
  REQUIRE(!layers.empty());
  CHECK(layers.back() == 7);
  for (std::size_t k = 0; k < layers.size(); ++k) CHECK(layers[k] >= std::min<int>(static_cast<int>(k) + 1, 7));
  CHECK(rep.iterations == 7);
  CHECK(l2_diff(rep.solution, direct.volume, s->ops) < 1e-12);
}

TEST_CASE("starting from the direct solution is a fixed point") {
  for (const char* name : {"transport2d_diag", "elliptic"}) {
    CAPTURE(name);
    const Preset preset = make_preset(name);
    const int dim = problem_dim(preset.problem);
    const auto s = test::make_setup(preset.problem, dim, 4, 2);
    const auto direct = solve_direct(s->mesh, preset.problem, s->ops);
    const LocalSolverSet solvers(preset.problem, s->mesh, s->ops, {}, Scheme::ihdg2);
    IterationConfig cfg;
    cfg.stop = StopRule::vs_direct;
    const auto rep = run(solvers, solvers.source(0.0), direct.volume, cfg, {&direct.volume});
    CHECK(rep.status == RunStatus::converged);
    CHECK(rep.iterations == 1);
  }
}

TEST_CASE("iterates agree across worker counts") {
  const Preset preset = make_preset("cdr_manufactured");
  const auto s = test::make_setup(preset.problem, 3, 3, 2);
  IterationConfig cfg;
  cfg.stop = StopRule::exact;
  const auto one = run(s->mesh, preset.problem, s->ops, cfg);
  cfg.workers = 4;
  const auto four = run(s->mesh, preset.problem, s->ops, cfg);
  CHECK(one.iterations == four.iterations);
  CHECK(one.solution.data() == four.solution.data());
  CHECK(one.history.back().l2_error == four.history.back().l2_error);
}

TEST_CASE("divergence and iteration caps are reported, not thrown") {
  // Table 6 marks iHDG-I at Nel = 64, p = 1, dt = 0.1 as divergent
  const Preset preset = make_preset("sw_standing_wave");
  const auto s = test::make_setup(preset.problem, 2, 8, 1);
  const auto exact = exact_solution(preset.problem);
  const FieldState u0 = project([&](const Point& x) { return exact(x, 0.0); }, 3, s->mesh, s->ops);
  const LocalSolverSet solvers(preset.problem, s->mesh, s->ops, {TimeScheme::crank_nicolson, 0.1}, Scheme::ihdg1);
  IterationConfig cfg;
  cfg.scheme = Scheme::ihdg1;
  cfg.stop = StopRule::exact;
  const auto tr = run_time_dependent(solvers, u0, 0.0, 10, cfg);
  CHECK(tr.failed_step >= 0);
  CHECK(tr.steps.back().status == RunStatus::diverged);

  const Preset tp = make_preset("transport2d_diag");
  const auto t = test::make_setup(tp.problem, 2, 8, 1);
  IterationConfig capped;
  capped.max_iters = 3;
  const auto rep = run(t->mesh, tp.problem, t->ops, capped);
  CHECK(rep.status == RunStatus::max_iter);
  CHECK(rep.iterations == 3);
}

TEST_CASE("shallow-water standing wave stays accurate over one period") {
  const Preset preset = make_preset("sw_standing_wave");
  const auto s = test::make_setup(preset.problem, 2, 8, 3);
  const auto exact = exact_solution(preset.problem);
  const FieldState u0 = project([&](const Point& x) { return exact(x, 0.0); }, 3, s->mesh, s->ops);
  const LocalSolverSet solvers(preset.problem, s->mesh, s->ops, {TimeScheme::crank_nicolson, 0.05}, Scheme::ihdg2);
  IterationConfig cfg;
  cfg.stop = StopRule::successive;
  const auto tr = run_time_dependent(solvers, u0, 0.0, 20, cfg);
  REQUIRE(tr.failed_step < 0);
  CHECK(tr.final_time == doctest::Approx(1.0));
  const double err = l2_error(tr.final_state, [&](const Point& x) { return exact(x, 1.0); }, s->mesh, s->ops);
  CHECK(err < 2e-2);
}

TEST_CASE("convection-diffusion errors converge at rate p + 1") {
  const Preset preset = make_preset("elliptic");
  for (int p : {1, 2}) {
    std::vector<double> errs;
    for (int N : {4, 8}) {
      const auto s = test::make_setup(preset.problem, 2, N, p);
      const auto direct = solve_direct(s->mesh, preset.problem, s->ops);
      const auto exact = exact_solution(preset.problem);
      errs.push_back(l2_error(direct.volume, [&](const Point& x) { return exact(x, 0.0); }, s->mesh, s->ops,
                              monitored_components(preset.problem)));
    }
    CAPTURE(p);
    CHECK(std::log2(errs[0] / errs[1]) > p + 0.7);
  }
}

TEST_CASE("direct solve residuals") {
  const Preset preset = make_preset("cdr_manufactured");
  const auto s = test::make_setup(preset.problem, 3, 2, 2);
  const auto d = solve_direct(s->mesh, preset.problem, s->ops);
  CHECK(d.relative_residual < 1e-10);
  CHECK(d.max_face_residual < 1e-10);
  DirectOptions tiny;
  tiny.max_unknowns = 10;
  CHECK_THROWS_AS(solve_direct(s->mesh, preset.problem, s->ops, {}, nullptr, 0.0, 0.0, tiny), DirectSolveError);
}

TEST_CASE("CFL number and trace energy") {
  CHECK(cfl_number(2.0, 0.1, 3, 0.5) == doctest::Approx(3.6));
  const Preset preset = make_preset("transport3d_timedep");
  const auto s = test::make_setup(preset.problem, 3, 2, 1);
  CHECK(max_wave_speed(preset.problem, s->mesh, s->ops) > 0.0);
  const FieldState zero(s->mesh.num_elements(), 1, s->ops.num_nodes());
  CHECK(trace_energy(preset.problem, s->mesh, s->ops, zero) == 0.0);
  FieldState one = zero;
  for (double& v : one.data()) v = 1.0;
  // sum over elements of the boundary measure of each element: 8 * 6 * (1/2)^2
  CHECK(trace_energy(preset.problem, s->mesh, s->ops, one) == doctest::Approx(12.0));
}
