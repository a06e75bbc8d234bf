#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "ihdg/basis.hpp"
#include "ihdg/mesh.hpp"

namespace ihdg {

using ScalarField = std::function<double(const Point&, double)>;
using TimeField = std::function<Values(const Point&, double)>;

/// beta . grad u = f (steady) or u_t + beta . grad u = f, u = g on the inflow boundary.
struct TransportProblem {
  int dim = 2;
  VelocityField beta;
  std::function<double(const Point&)> div_beta;  ///< empty means divergence-free
  ScalarField forcing;
  ScalarField inflow;
  ScalarField exact;  ///< optional
  bool time_dependent = false;
  /// Declared lower bound alpha_div of -div beta; 0 means no bound is declared.
  double alpha_div = 0.0;
};

/// Linearized shallow water system in (phi, u, v) on a 2D box with walls.
struct ShallowWaterProblem {
  double Phi = 1.0;
  double gamma = 0.0;
  double f0 = 0.0;
  double beta_cor = 0.0;
  double y_m = 0.0;
  double tau_x = 0.0;
  double tau_y = 0.0;
  double rho = 1.0;
  TimeField exact;  ///< optional (phi, u, v)

  double coriolis(const Point& x) const { return f0 + beta_cor * (x[1] - y_m); }
};

/// First-order convection-diffusion-reaction: kappa^{-1} sigma + grad u = 0,
/// div sigma + beta . grad u + nu u = f, u = g_D on the boundary.
/// Unknown layout: sigma_1..sigma_d, u.
struct ConvectionDiffusionProblem {
  int dim = 3;
  double kappa = 1.0;
  VelocityField beta;
  std::function<double(const Point&)> div_beta;
  std::function<double(const Point&)> nu;
  ScalarField forcing;
  ScalarField dirichlet;
  TimeField exact;  ///< optional (sigma_1..sigma_d, u)
  double lambda = 1.0;  ///< coercivity margin nu - div(beta)/2 >= lambda
  bool time_dependent = false;
};

using ProblemSpec = std::variant<TransportProblem, ShallowWaterProblem, ConvectionDiffusionProblem>;

enum class Scheme { ihdg1, ihdg2 };
const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

int problem_dim(const ProblemSpec& p);
int num_components(const ProblemSpec& p);
bool is_time_dependent(const ProblemSpec& p);
bool has_exact(const ProblemSpec& p);
/// Exact solution in unknown layout, or an empty function.
TimeField exact_solution(const ProblemSpec& p);
/// Components monitored by stopping rules and the per-element convergence map:
/// u for transport and convection-diffusion, all of (phi, u, v) for shallow water.
ComponentRange monitored_components(const ProblemSpec& p);
std::vector<std::string> component_labels(const ProblemSpec& p);

/// Tags the boundary of a mesh as the problem requires.
StructuredMesh bind_boundary(StructuredMesh mesh, const ProblemSpec& p, const ElementOperators& ops);

/// Directional flux matrix A = sum_k A_k n_k and |A| = R |S| R^{-1}.
/// Shallow water uses the symmetrized variables (phi, sqrt(Phi) u, sqrt(Phi) v);
/// convection-diffusion returns the advective part beta.n together with tau.
struct FluxMatrices {
  Mat A;
  Mat absA;
  Vec eigenvalues;
  Mat R;
};
FluxMatrices upwind_flux_matrix(const ProblemSpec& p, const Point& x, const Point& n);

struct Stabilization {
  double bn = 0.0;
  double abs_bn = 0.0;
  double alpha = 2.0;  ///< sqrt(bn^2 + 4)
  double tau = 1.0;    ///< (alpha - bn) / 2
};
Stabilization cdr_stabilization(double bn);

/// Global stabilization bounds over the skeleton quadrature points.
struct StabilizationBounds {
  double max_abs_bn = 0.0;
  double tau_bar = 1.0;
  double alpha_bar = 2.0;
  double alpha_star = 2.0;
};
StabilizationBounds stabilization_bounds(const ConvectionDiffusionProblem& p,
                                         const StructuredMesh& mesh, const ElementOperators& ops);

/// Pointwise face coupling of the substituted local solve. At a face quadrature
/// point of element K with outward normal n the face integrand tested against
/// the element's test functions is
///   P U_K^{k+1} + R U_K^k + Q U_nb^k
/// (rows in the unknown layout). R vanishes for iHDG-II, P_I + R_I = P_II.
struct PointCoupling {
  Mat P;
  Mat R;
  Mat Q;
};
PointCoupling interior_coupling(const ProblemSpec& p, const Point& x, const Point& n, Scheme s);

/// Boundary face integrand P U_K + data, with the exterior state built from the
/// boundary condition at time t (treated implicitly by both schemes).
struct BoundaryCoupling {
  Mat P;
  Values data{};
};
BoundaryCoupling boundary_coupling(const ProblemSpec& p, BoundaryTag tag, const Point& x,
                                   const Point& n, double t);

/// Unsubstituted upwind HDG flux F.n + |A|(U - U_hat) = G U + H U_hat with a scalar
/// trace unknown (u for transport and convection-diffusion, phi for shallow water).
struct TraceFlux {
  Mat G;
  Vec H;
};
TraceFlux trace_flux(const ProblemSpec& p, const Point& x, const Point& n);
/// Index of the conserved row whose jump defines the trace equation.
int conserved_row(const ProblemSpec& p);
/// Boundary trace U_hat = r . U_K + data.
struct BoundaryTrace {
  Values r{};
  double data = 0.0;
};
BoundaryTrace boundary_trace(const ProblemSpec& p, BoundaryTag tag, const Point& x,
                             const Point& n, double t);

/// Element volume data: spatial operator volume part L_V (test rows x trial cols),
/// time mass M_t and forcing load at time t.
Mat volume_operator(const ProblemSpec& p, const StructuredMesh& mesh, const ElementOperators& ops,
                    int element);
Mat time_mass(const ProblemSpec& p, const ElementOperators& ops);
Vec volume_load(const ProblemSpec& p, const StructuredMesh& mesh, const ElementOperators& ops,
                int element, double t);

/// Spot-checks the declared coefficient bounds (-div beta >= alpha_div for
/// transport, nu - div(beta)/2 >= lambda for convection-diffusion) at the
/// quadrature points of `samples` pseudo-random elements. Throws
/// std::invalid_argument naming the violated bound.
void validate_problem(const ProblemSpec& p, const StructuredMesh& mesh, const ElementOperators& ops,
                      int samples = 100, unsigned seed = 1);

struct PresetOptions {
  double kappa = 1e-2;
  int dim = 0;  ///< elliptic preset only; 0 selects the default (2)
};

struct Preset {
  std::string name;
  std::string description;
  ProblemSpec problem;
};

std::vector<std::string> preset_names();
Preset make_preset(const std::string& name, const PresetOptions& opts = {});

}  // namespace ihdg
