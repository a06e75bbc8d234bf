#pragma once

#include <optional>

#include "ihdg/pde.hpp"

namespace ihdg {

/// Contraction constants and iteration-count estimates of the convergence
/// theorems. Squared skeleton energies contract by C (shallow water) or D
/// (convection-diffusion) per iteration when `admissible`.
struct ContractionEstimate {
  double h = 0.0;
  int p = 1;
  int dim = 2;
  double dt = 0.0;  ///< 0 for steady problems
  double c = 1.0;
  double eps = 0.0;
  Scheme scheme = Scheme::ihdg2;

  // shallow water
  double Phi = 0.0;
  double gamma = 0.0;
  double constraint = 0.0;  ///< (ch / (dt (p+1)(p+2))) / (max{1,Phi} + sqrt(Phi)), must exceed 1/2
  double A = 0.0;
  double G = 0.0;
  double B1 = 0.0;
  double B2 = 0.0;
  double B = 0.0;
  double C = 0.0;
  double C_closed = 0.0;  ///< closed form of C at the canonical epsilon

  // convection-diffusion
  double kappa = 0.0;
  double lambda = 0.0;
  StabilizationBounds bounds;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double C4 = 0.0;
  double D = 0.0;
  double E = 0.0;
  double F = 0.0;

  double k_pred = 0.0;
  bool admissible = false;
};

/// Shallow-water estimate. dt is the backward-Euler step of the local system
/// (use theta * dt for a theta scheme). iHDG-II uses the canonical epsilon
/// unless one is given; iHDG-I uses the epsilon minimizing C.
ContractionEstimate predict_sw(double h, int p, double dt, double Phi, double c, double gamma = 0.0,
                               Scheme scheme = Scheme::ihdg2, std::optional<double> eps = std::nullopt);

/// Convection-diffusion estimate; dt > 0 replaces lambda by lambda + 1/dt.
/// epsilon minimizes D unless given.
ContractionEstimate predict_cdr(double h, int p, int dim, double kappa, double lambda,
                                const StabilizationBounds& bounds, double c, double dt = 0.0,
                                std::optional<double> eps = std::nullopt);

/// argmax over eps in (0, min(a1/k1, a2/k2)) of eps * min(a1 - eps k1, a2 - eps k2),
/// i.e. the epsilon minimizing (K/eps) / min(B1, B2) for B_i = a_i - eps k_i.
/// Returns 0 when no positive epsilon keeps both B_i positive.
double best_epsilon(double a1, double k1, double a2, double k2);

}  // namespace ihdg
