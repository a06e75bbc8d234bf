#include "ihdg/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ihdg {

double best_epsilon(double a1, double k1, double a2, double k2) {
  const double inf = std::numeric_limits<double>::infinity();
  const double hi = std::min(k1 > 0.0 ? a1 / k1 : (a1 > 0.0 ? inf : 0.0),
                             k2 > 0.0 ? a2 / k2 : (a2 > 0.0 ? inf : 0.0));
  if (!(hi > 0.0)) return 0.0;
  auto g = [&](double e) { return e * std::min(a1 - e * k1, a2 - e * k2); };
  std::vector<double> candidates;
  if (k1 > 0.0) candidates.push_back(a1 / (2.0 * k1));
  if (k2 > 0.0) candidates.push_back(a2 / (2.0 * k2));
  if (k1 != k2) candidates.push_back((a1 - a2) / (k1 - k2));
  double best = 0.0;
  double best_g = 0.0;
  for (double e : candidates) {
    if (!(e > 0.0) || !(e < hi)) continue;
    if (g(e) > best_g) {
      best_g = g(e);
      best = e;
    }
  }
  return best;
}

ContractionEstimate predict_sw(double h, int p, double dt, double Phi, double c, double gamma, Scheme scheme,
                               std::optional<double> eps) {
  if (!(h > 0.0) || p < 1 || !(dt > 0.0) || !(Phi > 0.0) || !(c > 0.0) || gamma < 0.0) {
    throw std::invalid_argument("shallow-water predictor needs positive h, p, dt, Phi, c");
  }
  ContractionEstimate est;
  est.h = h;
  est.p = p;
  est.dim = 2;
  est.dt = dt;
  est.c = c;
  est.Phi = Phi;
  est.gamma = gamma;
  est.scheme = scheme;

  const double pp = (p + 1.0) * (p + 2.0);
  const double sq = std::sqrt(Phi);
  const double mx = std::max(1.0, Phi) + sq;
  const double x = c * h / (dt * pp);
  const double y = (gamma + 1.0 / dt) * c * h / pp;
  est.constraint = x / mx;
  est.C_closed = std::pow((mx / sq) / (1.0 + 2.0 * c * h / (sq * dt * pp)), 2);
  est.k_pred = dt * pp * sq / (4.0 * c * h);

  if (scheme == Scheme::ihdg2) {
    est.eps = eps.value_or((2.0 * x + sq) / mx);
    est.B1 = x + (2.0 * sq - (Phi + sq) * est.eps) / 4.0;
    est.B2 = y + (2.0 * sq - (1.0 + sq) * est.eps) / 4.0;
  } else {
    est.eps = eps.value_or(best_epsilon(x + sq, (Phi + sq) / 2.0, y, (1.0 + sq) / 2.0));
    est.B1 = x + (2.0 * sq - (Phi + sq) * est.eps) / 2.0;
    est.B2 = y - (1.0 + sq) * est.eps / 2.0;
  }
  est.B = std::min(est.B1, est.B2);
  if (est.eps > 0.0) {
    est.A = mx / (4.0 * est.eps);
    est.G = est.eps * mx / 4.0;
  }
  est.C = est.B > 0.0 && est.eps > 0.0 ? est.A / est.B : std::numeric_limits<double>::infinity();
  est.admissible = est.B > 0.0 && est.C < 1.0;
  if (scheme == Scheme::ihdg2) est.admissible = est.admissible && est.constraint > 0.5;
  return est;
}

ContractionEstimate predict_cdr(double h, int p, int dim, double kappa, double lambda,
                                const StabilizationBounds& bounds, double c, double dt,
                                std::optional<double> eps) {
  if (!(h > 0.0) || p < 1 || dim < 1 || !(kappa > 0.0) || !(lambda > 0.0) || !(c > 0.0) || dt < 0.0) {
    throw std::invalid_argument("convection-diffusion predictor needs positive h, p, kappa, lambda, c");
  }
  ContractionEstimate est;
  est.h = h;
  est.p = p;
  est.dim = dim;
  est.dt = dt;
  est.c = c;
  est.kappa = kappa;
  est.lambda = dt > 0.0 ? lambda + 1.0 / dt : lambda;
  est.bounds = bounds;

  const double pp = (p + 1.0) * (p + 2.0);
  const double tb = bounds.tau_bar;
  const double bn = bounds.max_abs_bn;
  const double as = bounds.alpha_star;
  const double ab = bounds.alpha_bar;
  const double kinv = 1.0 / kappa;
  const double lam = est.lambda;
  const double a1 = 2.0 * c * h * kinv / (dim * pp) + 1.0 / (2.0 * ab);
  const double a2 = 2.0 * c * h * lam / (dim * pp) + 1.0 / ab;
  const double k4 = (1.0 + tb + bn) / (2.0 * as);
  const double k3 = tb * k4;
  est.eps = eps.value_or(best_epsilon(a1, k4, a2, k3));
  const double e = est.eps;
  est.C3 = e * k3;
  est.C4 = e * k4;
  est.B1 = a1 - est.C4;
  est.B2 = a2 - est.C3;
  est.B = std::min(est.B1, est.B2);
  const double mn = std::min(kinv, lam);
  if (e > 0.0) {
    est.C1 = (bn + tb) * (tb + 1.0) / (2.0 * e * as);
    est.C2 = (tb + 1.0) / (2.0 * e * as);
    est.A = std::max(est.C1, est.C2);
  }
  est.D = est.B > 0.0 && e > 0.0 ? est.A / est.B : std::numeric_limits<double>::infinity();
  est.E = std::max(est.C3, est.C4) / mn;
  est.F = est.A / mn;
  est.k_pred = dim * pp / (8.0 * ab * c * h * mn);
  est.admissible = est.B > 0.0 && est.D < 1.0;
  return est;
}

}  // namespace ihdg
