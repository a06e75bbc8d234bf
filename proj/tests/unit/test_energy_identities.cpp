#include <doctest.h>

#include "identities.hpp"
#include "support.hpp"

using namespace ihdg;

TEST_CASE("transport local solve satisfies the energy identity") {
  for (int p : {1, 3}) {
    CAPTURE(p);
    CHECK(test::transport_identity_error(p, 100, 7 + p) < 1e-9);
  }
}

TEST_CASE("shallow-water local solve satisfies the energy identity") {
  for (int p : {1, 2}) {
    CAPTURE(p);
    CHECK(test::shallow_water_identity_error(p, 100, 11 + p) < 1e-9);
  }
}

TEST_CASE("convection-diffusion local solve satisfies the energy identity") {
  for (int p : {1, 2}) {
    CAPTURE(p);
    CHECK(test::convection_diffusion_identity_error(p, 50, 17 + p) < 1e-9);
  }
}

TEST_CASE("homogeneous local solves return zero") {
  CHECK(test::homogeneous_solve_max() == 0.0);
}

TEST_CASE("local systems are well conditioned") {
  for (const char* name : {"transport3d_diag", "sw_standing_wave", "cdr_manufactured"}) {
    CAPTURE(name);
    const Preset preset = make_preset(name);
    const auto s = test::make_setup(preset.problem, problem_dim(preset.problem), 3, 3);
    const TimeConfig tc =
        is_time_dependent(preset.problem) ? TimeConfig{TimeScheme::crank_nicolson, 0.01} : TimeConfig{};
    for (Scheme scheme : {Scheme::ihdg1, Scheme::ihdg2}) {
      const LocalSolverSet solvers(preset.problem, s->mesh, s->ops, tc, scheme);
      CHECK(solvers.min_rcond() > 1e-8);
    }
  }
}
