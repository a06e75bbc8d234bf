#include "identities.hpp"

#include <algorithm>
#include <cmath>

#include "support.hpp"

namespace ihdg::test {

namespace {

int center_element(const StructuredMesh& mesh) {
  return mesh.element_id({1, mesh.dim() > 1 ? 1 : 0, mesh.dim() > 2 ? 1 : 0});
}

struct FaceData {
  Mat own;       // new iterate on K at the face points
  Mat neighbor;  // old neighbor iterate at the same points
  Vec w;
  std::vector<Point> x;
  double sign = 1.0;  // outward normal is sign * e_axis
  int axis = 0;
};

FaceData face_data(const StructuredMesh& mesh, const ElementOperators& ops, const FieldState& next,
                   const FieldState& old, int e, int f) {
  const int nb = mesh.neighbor(e, f);
  if (nb < 0) throw std::logic_error("identity element touches the boundary");
  FaceData d;
  d.own = ops.face_interp(f) * next.element_matrix(e);
  d.neighbor = ops.face_interp(f ^ 1) * old.element_matrix(nb);
  d.w = ops.face_weights(f);
  d.x = ops.face_quad_points(mesh, e, f);
  d.axis = f / 2;
  d.sign = mesh.local_normal(f)[static_cast<std::size_t>(d.axis)];
  return d;
}

double relative(double lhs, double rhs) {
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
}

// Runs `samples` local solves of the center element from random old iterates
// and returns the worst mismatch of identity(next, old).
template <class Identity>
double worst(const ProblemSpec& problem, int p, TimeConfig time, int samples, unsigned seed, Identity identity) {
  const int dim = problem_dim(problem);
  const int m = num_components(problem);
  const auto s = make_setup(problem, dim, 3, p);
  const LocalSolverSet solvers(problem, s->mesh, s->ops, time, Scheme::ihdg2);
  const int e = center_element(s->mesh);
  const FieldState zero(s->mesh.num_elements(), m, s->ops.num_nodes());
  std::mt19937 rng(seed);
  double err = 0.0;
  for (int k = 0; k < samples; ++k) {
    const FieldState old = random_state(s->mesh.num_elements(), m, s->ops.num_nodes(), rng);
    FieldState next = zero;
    solvers.apply_local(e, zero, old, next.element(e));
    const auto [lhs, rhs] = identity(*s, e, next, old);
    err = std::max(err, relative(lhs, rhs));
  }
  return err;
}

}  // namespace

double transport_identity_error(int p, int samples, unsigned seed) {
  TransportProblem tp;
  tp.dim = 2;
  tp.beta = [](const Point& x) { return Point{1.0 + 0.3 * x[0], 0.6 - 0.2 * x[1], 0.0}; };
  tp.div_beta = [](const Point&) { return 0.1; };
  tp.forcing = [](const Point&, double) { return 0.0; };
  tp.inflow = [](const Point&, double) { return 0.0; };
  return worst(tp, p, {}, samples, seed, [&](const Setup& s, int e, const FieldState& next, const FieldState& old) {
    // ||u||^2_{-div beta/2, K} + ||u||^2_{|beta.n|/2, dK} = 1/2 <(beta.n+ + |beta.n|) u_nb^k, u>
    const Vec uq = s.ops.vol_interp() * next.element_matrix(e).col(0);
    double lhs = -0.05 * dot(uq, uq, s.ops.vol_weights());
    double rhs = 0.0;
    for (int f = 0; f < s.ops.num_faces(); ++f) {
      const FaceData d = face_data(s.mesh, s.ops, next, old, e, f);
      for (int q = 0; q < d.w.size(); ++q) {
        const double bn = d.sign * tp.beta(d.x[static_cast<std::size_t>(q)])[static_cast<std::size_t>(d.axis)];
        lhs += 0.5 * std::abs(bn) * d.w[q] * d.own(q, 0) * d.own(q, 0);
        rhs += 0.5 * (std::abs(bn) - bn) * d.w[q] * d.neighbor(q, 0) * d.own(q, 0);
      }
    }
    return std::pair{lhs, rhs};
  });
}

double shallow_water_identity_error(int p, int samples, unsigned seed) {
  ShallowWaterProblem sw;
  sw.Phi = 2.0;
  sw.gamma = 0.3;
  sw.f0 = 0.7;
  const double dt = 0.05;
  const double sq = std::sqrt(sw.Phi);
  const TimeConfig time{TimeScheme::backward_euler, dt};
  return worst(sw, p, time, samples, seed, [&](const Setup& s, int e, const FieldState& next, const FieldState& old) {
    const Mat U = s.ops.vol_interp() * next.element_matrix(e);
    const Vec& w = s.ops.vol_weights();
    double lhs = dot(U.col(0), U.col(0), w) / dt +
                 (sw.gamma + 1.0 / dt) * sw.Phi * (dot(U.col(1), U.col(1), w) + dot(U.col(2), U.col(2), w));
    double rhs = 0.0;
    for (int f = 0; f < s.ops.num_faces(); ++f) {
      const FaceData d = face_data(s.mesh, s.ops, next, old, e, f);
      for (int q = 0; q < d.w.size(); ++q) {
        const double phi = d.own(q, 0);
        const double vn = d.sign * d.own(q, 1 + d.axis);
        const double phi_nb = d.neighbor(q, 0);
        const double vn_nb = -d.sign * d.neighbor(q, 1 + d.axis);
        lhs += d.w[q] * 0.5 * sq * (phi * phi + sw.Phi * vn * vn);
        rhs += d.w[q] * (0.5 * sq * (phi_nb + sq * vn_nb) * phi - 0.5 * sw.Phi * (phi_nb + sq * vn_nb) * vn);
      }
    }
    return std::pair{lhs, rhs};
  });
}

double convection_diffusion_identity_error(int p, int samples, unsigned seed) {
  PresetOptions po;
  po.kappa = 0.05;
  const Preset preset = make_preset("cdr_manufactured", po);
  const auto& cd = std::get<ConvectionDiffusionProblem>(preset.problem);
  const int dim = cd.dim;
  return worst(preset.problem, p, {}, samples, seed,
               [&](const Setup& s, int e, const FieldState& next, const FieldState& old) {
                 const Mat U = s.ops.vol_interp() * next.element_matrix(e);
                 const Vec& w = s.ops.vol_weights();
                 const auto xq = s.ops.quad_points(s.mesh, e);
                 double lhs = 0.0;
                 for (int i = 0; i < dim; ++i) lhs += dot(U.col(i), U.col(i), w) / cd.kappa;
                 for (int q = 0; q < w.size(); ++q) {
                   const Point& x = xq[static_cast<std::size_t>(q)];
                   lhs += w[q] * (cd.nu(x) - 0.5 * cd.div_beta(x)) * U(q, dim) * U(q, dim);
                 }
                 double rhs = 0.0;
                 for (int f = 0; f < s.ops.num_faces(); ++f) {
                   const FaceData d = face_data(s.mesh, s.ops, next, old, e, f);
                   for (int q = 0; q < d.w.size(); ++q) {
                     const double bn = d.sign * cd.beta(d.x[static_cast<std::size_t>(q)])[static_cast<std::size_t>(d.axis)];
                     const double alpha = std::sqrt(bn * bn + 4.0);
                     const double tau_m = 0.5 * (alpha - bn);
                     const double tau_p = 0.5 * (alpha + bn);
                     const double u = d.own(q, dim);
                     const double sn = d.sign * d.own(q, d.axis);
                     const double u_nb = d.neighbor(q, dim);
                     const double sn_nb = -d.sign * d.neighbor(q, d.axis);
                     lhs += d.w[q] * ((bn * bn + 2.0) / (2.0 * alpha) * u * u + sn * sn / alpha + bn / alpha * u * sn);
                     rhs += d.w[q] * (-sn * sn_nb / alpha - (tau_p - bn) / alpha * sn * u_nb +
                                      tau_m / alpha * u * sn_nb + tau_m * (tau_p - bn) / alpha * u * u_nb);
                   }
                 }
                 return std::pair{lhs, rhs};
               });
}

double homogeneous_solve_max() {
  double mx = 0.0;
  for (const char* name : {"transport2d_diag", "sw_standing_wave", "cdr_manufactured"}) {
    const Preset preset = make_preset(name);
    const int dim = problem_dim(preset.problem);
    const int m = num_components(preset.problem);
    const auto s = make_setup(preset.problem, dim, 3, 2);
    const TimeConfig tc =
        is_time_dependent(preset.problem) ? TimeConfig{TimeScheme::crank_nicolson, 0.1} : TimeConfig{};
    for (Scheme scheme : {Scheme::ihdg1, Scheme::ihdg2}) {
      const LocalSolverSet solvers(preset.problem, s->mesh, s->ops, tc, scheme);
      const FieldState zero(s->mesh.num_elements(), m, s->ops.num_nodes());
      std::mt19937 rng(3);
      FieldState out = random_state(s->mesh.num_elements(), m, s->ops.num_nodes(), rng);
      for (int e = 0; e < s->mesh.num_elements(); ++e) solvers.apply_local(e, zero, zero, out.element(e));
      for (double v : out.data()) mx = std::max(mx, std::abs(v));
    }
  }
  return mx;
}

}  // namespace ihdg::test
