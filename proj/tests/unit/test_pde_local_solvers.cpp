#include <doctest.h>

#include <cmath>

#include "support.hpp"

using namespace ihdg;

TEST_CASE("preset catalog and scheme names") {
  const auto names = preset_names();
  CHECK(names.size() == 6);
  for (const auto& n : names) CHECK(make_preset(n).name == n);
  CHECK_THROWS_AS(make_preset("nope"), std::invalid_argument);
  CHECK(parse_scheme("iHDG-I") == Scheme::ihdg1);
  CHECK(parse_scheme("ihdg2") == Scheme::ihdg2);
  CHECK_THROWS_AS(parse_scheme("ihdg3"), std::invalid_argument);
  CHECK(num_components(make_preset("cdr_manufactured").problem) == 4);
  CHECK(num_components(make_preset("sw_standing_wave").problem) == 3);
  CHECK(monitored_components(make_preset("cdr_manufactured").problem).first == 3);
}

TEST_CASE("stabilization of the convection-diffusion flux") {
  for (double bn : {-2.0, -0.3, 0.0, 1.5}) {
    const auto s = cdr_stabilization(bn);
    CHECK(s.alpha == doctest::Approx(std::sqrt(bn * bn + 4.0)));
    CHECK(s.tau == doctest::Approx(0.5 * (s.alpha - bn)));
    CHECK(s.tau > 0.0);
    // tau on the two sides adds up to alpha
    CHECK(s.tau + cdr_stabilization(-bn).tau == doctest::Approx(s.alpha));
  }
}

TEST_CASE("upwind flux matrices") {
  ShallowWaterProblem sw;
  sw.Phi = 3.0;
  const Point n{0.6, 0.8, 0.0};
  const auto F = upwind_flux_matrix(sw, {0.3, 0.3, 0.0}, n);
  CHECK((F.absA * F.absA - F.A * F.A).norm() < 1e-12);
  CHECK(F.eigenvalues.cwiseAbs().maxCoeff() == doctest::Approx(std::sqrt(3.0)));
  CHECK((F.R * F.eigenvalues.asDiagonal() * F.R.inverse() - F.A).norm() < 1e-12);
}

TEST_CASE("iHDG-I face coupling splits the iHDG-II self term") {
  for (const char* name : {"transport2d_diag", "sw_standing_wave", "cdr_manufactured"}) {
    CAPTURE(name);
    const Preset preset = make_preset(name);
    const Point x{0.3, 0.6, 0.2};
    for (const Point& n : {Point{1, 0, 0}, Point{0, -1, 0}}) {
      const auto one = interior_coupling(preset.problem, x, n, Scheme::ihdg1);
      const auto two = interior_coupling(preset.problem, x, n, Scheme::ihdg2);
      CHECK(two.R.norm() == 0.0);
      CHECK((one.P + one.R - two.P).norm() < 1e-14);
      CHECK((one.Q - two.Q).norm() < 1e-14);
    }
  }
}

TEST_CASE("declared coefficient bounds are validated") {
  TransportProblem tp;
  tp.dim = 2;
  tp.beta = [](const Point& x) { return Point{1.0 + x[0], 1.0, 0.0}; };
  tp.div_beta = [](const Point&) { return 1.0; };
  tp.forcing = [](const Point&, double) { return 0.0; };
  tp.inflow = [](const Point&, double) { return 0.0; };
  tp.alpha_div = 0.5;  // but -div beta = -1
  const auto s = test::make_setup(tp, 2, 2, 1);
  CHECK_THROWS_AS(validate_problem(tp, s->mesh, s->ops), std::invalid_argument);
  const Preset cdr = make_preset("cdr_manufactured");
  const auto c = test::make_setup(cdr.problem, 3, 2, 1);
  CHECK_NOTHROW(validate_problem(cdr.problem, c->mesh, c->ops));
}

TEST_CASE("blockwise factorization solves the assembled local system") {
  const Preset preset = make_preset("cdr_manufactured");
  const auto s = test::make_setup(preset.problem, 3, 3, 2);
  const LocalSolverSet solvers(preset.problem, s->mesh, s->ops, {}, Scheme::ihdg2);
  CHECK(solvers.num_split_factorizations() > 0);
  const FieldState base = solvers.source(0.0);
  const FieldState zero(s->mesh.num_elements(), 4, s->ops.num_nodes());
  FieldState x = zero;
  for (int e = 0; e < s->mesh.num_elements(); ++e) {
    solvers.apply_local(e, base, zero, x.element(e));
    const Mat A = solvers.local_matrix(e);
    const Eigen::Map<const Vec> xe(x.element(e).data(), solvers.block_size());
    const Eigen::Map<const Vec> be(base.element(e).data(), solvers.block_size());
    CHECK((A * xe - be).norm() <= 1e-10 * (1.0 + be.norm()));
  }
}

TEST_CASE("identical local matrices share a factorization") {
  const Preset preset = make_preset("transport2d_diag");
  const auto s = test::make_setup(preset.problem, 2, 8, 2);
  const LocalSolverSet solvers(preset.problem, s->mesh, s->ops, {}, Scheme::ihdg2);
  // interior, two edge kinds and the corners differ only through boundary faces
  CHECK(solvers.num_factorizations() <= 4);
  CHECK(solvers.matrix_hash(9) == solvers.matrix_hash(18));
}

TEST_CASE("base load of the time schemes") {
  const Preset preset = make_preset("sw_standing_wave");
  const auto s = test::make_setup(preset.problem, 2, 4, 2);
  const auto exact = exact_solution(preset.problem);
  const FieldState u0 = project([&](const Point& x) { return exact(x, 0.0); }, 3, s->mesh, s->ops);
  const FieldState zero(s->mesh.num_elements(), 3, s->ops.num_nodes());
  const double dt = 0.1;
  const LocalSolverSet be(preset.problem, s->mesh, s->ops, {TimeScheme::backward_euler, dt}, Scheme::ihdg2);
  const LocalSolverSet cn(preset.problem, s->mesh, s->ops, {TimeScheme::crank_nicolson, dt}, Scheme::ihdg2);
  // zero previous level: backward Euler load is the source
  const FieldState b0 = be.base_rhs(&zero, 0.0, dt);
  const FieldState s1 = be.source(dt);
  for (std::size_t i = 0; i < b0.data().size(); ++i) CHECK(b0.data()[i] == doctest::Approx(s1.data()[i]));
  // Crank-Nicolson load: M U/dt + (S(t) + S(t+dt))/2 - L(U)/2; unforced, so M U/dt - L(U)/2
  const FieldState b = cn.base_rhs(&u0, 0.0, dt);
  const FieldState L = cn.apply_operator(u0);
  const Mat Mt = time_mass(preset.problem, s->ops);
  for (int e = 0; e < s->mesh.num_elements(); ++e) {
    const Eigen::Map<const Vec> ue(u0.element(e).data(), cn.block_size());
    const Eigen::Map<const Vec> le(L.element(e).data(), cn.block_size());
    const Eigen::Map<const Vec> got(b.element(e).data(), cn.block_size());
    CHECK((got - (Mt * ue / dt - 0.5 * le)).norm() < 1e-10 * (1.0 + got.norm()));
  }
}

TEST_CASE("parallel sweeps are bitwise identical to the serial sweep") {
  const Preset preset = make_preset("transport3d_diag");
  const auto s = test::make_setup(preset.problem, 3, 4, 2);
  const LocalSolverSet solvers(preset.problem, s->mesh, s->ops, {}, Scheme::ihdg2, 3);
  const FieldState base = solvers.source(0.0);
  std::mt19937 rng(9);
  const FieldState it = test::random_state(s->mesh.num_elements(), 1, s->ops.num_nodes(), rng);
  FieldState a = it;
  FieldState b = it;
  solvers.sweep(base, it, a, 1);
  solvers.sweep(base, it, b, 3);
  CHECK(a.data() == b.data());
}
