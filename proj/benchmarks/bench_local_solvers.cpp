#include <benchmark/benchmark.h>

#include <array>
#include <memory>
#include <span>

#include "ihdg/iteration.hpp"

using namespace ihdg;

namespace {

struct Case {
  Preset preset;
  StructuredMesh mesh;
  ElementOperators ops;
};

std::unique_ptr<Case> make_case(const std::string& name, int N, int p) {
  Preset preset = make_preset(name);
  const int dim = problem_dim(preset.problem);
  const std::array<int, 3> cells{N, N, N};
  auto mesh = build_mesh(dim, std::span<const int>(cells.data(), static_cast<std::size_t>(dim)));
  auto ops = build_operators(p, dim, mesh.h());
  auto bound = bind_boundary(std::move(mesh), preset.problem, ops);
  return std::make_unique<Case>(Case{std::move(preset), std::move(bound), std::move(ops)});
}

TimeConfig time_for(const Case& c) {
  return is_time_dependent(c.preset.problem) ? TimeConfig{TimeScheme::crank_nicolson, 0.01} : TimeConfig{};
}

const char* kPresets[] = {"transport3d_diag", "sw_standing_wave", "cdr_manufactured"};

void BM_Factorize(benchmark::State& state) {
  const auto c = make_case(kPresets[state.range(0)], 4, static_cast<int>(state.range(1)));
  for (auto _ : state) {
    LocalSolverSet solvers(c->preset.problem, c->mesh, c->ops, time_for(*c), Scheme::ihdg2);
    benchmark::DoNotOptimize(solvers.num_factorizations());
  }
  state.SetLabel(kPresets[state.range(0)]);
}

void BM_LocalSolve(benchmark::State& state) {
  const auto c = make_case(kPresets[state.range(0)], 4, static_cast<int>(state.range(1)));
  const LocalSolverSet solvers(c->preset.problem, c->mesh, c->ops, time_for(*c), Scheme::ihdg2);
  const FieldState base = solvers.source(0.0);
  FieldState it = base;
  std::vector<double> out(static_cast<std::size_t>(solvers.block_size()));
  const int e = c->mesh.num_elements() / 2;
  for (auto _ : state) {
    solvers.apply_local(e, base, it, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetLabel(kPresets[state.range(0)]);
}

void BM_Sweep(benchmark::State& state) {
  const auto c = make_case("transport3d_diag", static_cast<int>(state.range(0)), static_cast<int>(state.range(1)));
  const LocalSolverSet solvers(c->preset.problem, c->mesh, c->ops, {}, Scheme::ihdg2);
  const FieldState base = solvers.source(0.0);
  FieldState it = base;
  FieldState next = base;
  for (auto _ : state) {
    solvers.sweep(base, it, next);
    std::swap(it, next);
  }
  state.SetItemsProcessed(state.iterations() * c->mesh.num_elements());
}

void BM_SteadySolve(benchmark::State& state) {
  const auto c = make_case("transport2d_diag", static_cast<int>(state.range(0)), 2);
  IterationConfig cfg;
  cfg.stop = StopRule::exact;
  for (auto _ : state) {
    const auto rep = run(c->mesh, c->preset.problem, c->ops, cfg);
    benchmark::DoNotOptimize(rep.iterations);
  }
}

}  // namespace

BENCHMARK(BM_Factorize)->ArgsProduct({{0, 1, 2}, {1, 3}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocalSolve)->ArgsProduct({{0, 1, 2}, {1, 2, 3, 4}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Sweep)->Args({8, 2})->Args({8, 4})->Args({16, 2})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SteadySolve)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
