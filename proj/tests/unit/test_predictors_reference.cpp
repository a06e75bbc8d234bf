#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ihdg/harness.hpp"
#include "ihdg/reference_counts.hpp"

using namespace ihdg;

TEST_CASE("best epsilon maximizes eps * min(a1 - eps k1, a2 - eps k2)") {
  CHECK(best_epsilon(1.0, 1.0, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK(best_epsilon(-1.0, 1.0, 1.0, 1.0) == 0.0);
  const double e = best_epsilon(2.0, 1.0, 1.0, 3.0);
  double brute = 0.0;
  double arg = 0.0;
  for (int i = 1; i < 100000; ++i) {
    const double x = i * 1e-5;
    const double g = x * std::min(2.0 - x, 1.0 - 3.0 * x);
    if (g > brute) {
      brute = g;
      arg = x;
    }
  }
  CHECK(e == doctest::Approx(arg).epsilon(1e-4));
}

TEST_CASE("shallow-water contraction constant matches its closed form") {
  // h = 1/4, p = 1, CN at dt = 0.01 (backward Euler step dt/2), Phi = 1, c = 1/2:
  // C = (2 / (1 + 2 c h / (dt (p+1)(p+2))))^2 = (2 / (1 + 25/3))^2
  const auto est = predict_sw(0.25, 1, 0.005, 1.0, 0.5);
  CHECK(est.C == doctest::Approx(std::pow(2.0 / (1.0 + 25.0 / 3.0), 2)));
  CHECK(est.C == doctest::Approx(0.0459).epsilon(1e-3));
  CHECK(est.C == doctest::Approx(est.C_closed));
  CHECK(est.admissible);
  CHECK(est.constraint == doctest::Approx(25.0 / 12.0));
}

TEST_CASE("shallow-water estimate outside its admissible range") {
  // CN at dt = 0.1: constraint c h / (dt (p+1)(p+2)) / 2 = 0.125 / 0.3 / 2 < 1/2
  const auto est = predict_sw(0.25, 1, 0.05, 1.0, 0.5);
  CHECK_FALSE(est.admissible);
  CHECK(est.k_pred == doctest::Approx(0.6));  // dt (p+1)(p+2) sqrt(Phi) / (4 c h)
  const auto one = predict_sw(0.25, 1, 0.05, 1.0, 0.5, 0.0, Scheme::ihdg1);
  CHECK_FALSE(one.admissible);
}

TEST_CASE("convection-diffusion constant D by hand") {
  // beta = 0: tau = 1, alpha = 2; h = 1/2, p = 1, d = 2, kappa = lambda = 1, c = 1/2
  StabilizationBounds b;
  b.max_abs_bn = 0.0;
  b.tau_bar = 1.0;
  b.alpha_bar = 2.0;
  b.alpha_star = 2.0;
  const auto est = predict_cdr(0.5, 1, 2, 1.0, 1.0, b, 0.5);
  const double a = 2.0 * 0.5 * 0.5 / 12.0 + 0.25;  // a1 = a2
  const double k = 0.5;                             // k3 = k4 = (1 + tau) / (2 alpha*)
  const double eps = a / (2.0 * k);
  CHECK(est.eps == doctest::Approx(eps));
  CHECK(est.B == doctest::Approx(a / 2.0));
  CHECK(est.D == doctest::Approx((2.0 / (4.0 * eps)) / (a / 2.0)));
  CHECK(est.k_pred == doctest::Approx(3.0));  // d (p+1)(p+2) / (8 alpha_bar c h min(1/kappa, lambda))
  CHECK_FALSE(est.admissible);
  // dt > 0 adds 1/dt to lambda
  CHECK(predict_cdr(0.5, 1, 2, 1.0, 1.0, b, 0.5, 0.5).lambda == doctest::Approx(3.0));
}

TEST_CASE("predicted iteration counts scale like 1/h and (p+1)(p+2)") {
  StabilizationBounds b;
  const auto coarse = predict_cdr(0.5, 2, 2, 1.0, 1.0, b, 0.5);
  const auto fine = predict_cdr(0.25, 2, 2, 1.0, 1.0, b, 0.5);
  CHECK(fine.k_pred / coarse.k_pred == doctest::Approx(2.0));
  const auto p4 = predict_cdr(0.25, 4, 2, 1.0, 1.0, b, 0.5);
  const auto p1 = predict_cdr(0.25, 1, 2, 1.0, 1.0, b, 0.5);
  CHECK(p4.k_pred / p1.k_pred == doctest::Approx(5.0));
  CHECK_THROWS_AS(predict_sw(0.0, 1, 0.1, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("reported iteration counts") {
  CHECK(reported_transport_iterations(2, 16, 2) == 33);
  CHECK(reported_transport_iterations(2, 32, 4) == 64);
  CHECK(reported_transport_iterations(3, 16, 1) == 47);
  CHECK_FALSE(reported_transport_iterations(2, 5, 1).has_value());
  CHECK(reported_sw_iterations(256, 1, 0.01, true) == 10);
  CHECK(reported_sw_iterations(1024, 3, 0.01, false) == kDiverged);
  CHECK(reported_sw_iterations(16, 1, 0.1, false) == 19);
  CHECK(reported_cdr_iterations(0.125, 2, 1e-3, false) == 67);
  CHECK(reported_cdr_iterations(0.125, 2, 1e-3, true) == 43);
  CHECK(reported_cdr_iterations(0.0625, 2, 1e-3, true) == 70);
  CHECK(reported_cdr_iterations(0.0625, 2, 1e-2, false) == kDiverged);
  CHECK(reported_elliptic_p_ratio(4, 3) == doctest::Approx(4.81));
  CHECK_FALSE(reported_elliptic_p_ratio(1, 1).has_value());
}

TEST_CASE("experiment configuration text") {
  std::istringstream in(
      "# transport only\n"
      "preset = table2\n"
      "mesh = 4, 8\n"
      "order = 1,2 # trailing comment\n"
      "scheme = both\n"
      "stop = successive\n"
      "tol = 1e-8\n"
      "oracle = off\n");
  const auto cfg = parse_config(in);
  CHECK(cfg.preset == "table2");
  CHECK(cfg.meshes == std::vector<int>{4, 8});
  CHECK(cfg.orders == std::vector<int>{1, 2});
  CHECK(cfg.schemes.size() == 2);
  CHECK(cfg.stop == StopRule::successive);
  CHECK(cfg.tol == doctest::Approx(1e-8));
  CHECK_FALSE(cfg.oracle);
  CHECK_NOTHROW(validate(cfg));

  std::istringstream bad_key("colour = blue\n");
  CHECK_THROWS_AS(parse_config(bad_key), std::invalid_argument);
  std::istringstream bad_value("mesh = 4, eight\n");
  CHECK_THROWS_AS(parse_config(bad_value), std::invalid_argument);
  std::istringstream no_eq("mesh 4\n");
  CHECK_THROWS_AS(parse_config(no_eq), std::invalid_argument);
  ExperimentConfig unknown;
  unknown.preset = "table9";
  CHECK_THROWS_AS(validate(unknown), std::invalid_argument);
  ExperimentConfig zero_order;
  zero_order.orders = {0};
  CHECK_THROWS_AS(validate(zero_order), std::invalid_argument);
}
