#include "ihdg/reference_hdg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace ihdg {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

// Pieces of the spatial HDG operator:
//   [ L_UU  L_UT ] [U]   [S]
//   [ A_TU  A_TT ] [T] = [0]
// with A_TT diagonal.
struct SpatialSystem {
  SpMat L_UU;
  SpMat L_UT;
  SpMat A_TU;
  Vec A_TT;
};

struct Layout {
  int np = 0;
  int m = 0;
  int block = 0;
  int nqf = 0;
  std::vector<int> interior;  ///< interior face ids in mesh order
  std::size_t nu = 0;
  std::size_t nt = 0;

  Eigen::Index u(int e, int c, int i) const {
    return static_cast<Eigen::Index>(e) * block + c * np + i;
  }
  Eigen::Index t(int k, int q) const { return static_cast<Eigen::Index>(k) * nqf + q; }
};

Layout make_layout(const StructuredMesh& mesh, const ProblemSpec& problem, const ElementOperators& ops) {
  Layout L;
  L.np = ops.num_nodes();
  L.m = num_components(problem);
  L.block = L.np * L.m;
  L.nqf = ops.num_face_quad();
  for (int id = 0; id < static_cast<int>(mesh.faces().size()); ++id) {
    if (!mesh.face(id).is_boundary()) L.interior.push_back(id);
  }
  L.nu = static_cast<std::size_t>(mesh.num_elements()) * static_cast<std::size_t>(L.block);
  L.nt = L.interior.size() * static_cast<std::size_t>(L.nqf);
  return L;
}

// Adds E^T diag(w) (coef) E coupling of component rows to component columns of one element.
void add_face_matrix(Mat& K, int np, const Mat& E, const Vec& w, const std::vector<Mat>& coef) {
  const int m = static_cast<int>(coef.front().rows());
  Vec c(E.rows());
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      bool any = false;
      for (Eigen::Index q = 0; q < E.rows(); ++q) {
        c(q) = w(q) * coef[static_cast<std::size_t>(q)](a, b);
        any = any || c(q) != 0.0;
      }
      if (any) K.block(a * np, b * np, np, np).noalias() += E.transpose() * c.asDiagonal() * E;
    }
  }
}

SpatialSystem assemble_spatial(const StructuredMesh& mesh, const ProblemSpec& problem,
                               const ElementOperators& ops, const Layout& L) {
  const int r = conserved_row(problem);
  Triplets tuu;
  Triplets tut;
  Triplets ttu;
  SpatialSystem sys;
  sys.A_TT = Vec::Zero(static_cast<Eigen::Index>(L.nt));

  for (int e = 0; e < mesh.num_elements(); ++e) {
    Mat K = volume_operator(problem, mesh, ops, e);
    for (int f = 0; f < ops.num_faces(); ++f) {
      const Face& face = mesh.face(mesh.face_of(e, f));
      if (!face.is_boundary()) continue;
      const auto pts = ops.face_quad_points(mesh, e, f);
      const Point n = mesh.local_normal(f);
      std::vector<Mat> coef;
      for (const Point& x : pts) {
        const TraceFlux fl = trace_flux(problem, x, n);
        const BoundaryTrace bt = boundary_trace(problem, face.tag, x, n, 0.0);
        Mat P = fl.G;
        for (int a = 0; a < L.m; ++a) {
          for (int b = 0; b < L.m; ++b) P(a, b) += fl.H(a) * bt.r[static_cast<std::size_t>(b)];
        }
        coef.push_back(P);
      }
      add_face_matrix(K, L.np, ops.face_interp(f), ops.face_weights(f), coef);
    }
    // Own-side G on interior faces.
    for (int f = 0; f < ops.num_faces(); ++f) {
      if (mesh.neighbor(e, f) < 0) continue;
      const auto pts = ops.face_quad_points(mesh, e, f);
      const Point n = mesh.local_normal(f);
      std::vector<Mat> coef;
      for (const Point& x : pts) coef.push_back(trace_flux(problem, x, n).G);
      add_face_matrix(K, L.np, ops.face_interp(f), ops.face_weights(f), coef);
    }
    for (Eigen::Index j = 0; j < K.cols(); ++j) {
      for (Eigen::Index i = 0; i < K.rows(); ++i) {
        if (K(i, j) != 0.0) {
          tuu.emplace_back(L.u(e, 0, 0) + i, L.u(e, 0, 0) + j, K(i, j));
        }
      }
    }
  }

  for (std::size_t k = 0; k < L.interior.size(); ++k) {
    const Face& face = mesh.face(L.interior[k]);
    const int side_elem[2] = {face.owner, face.neighbor};
    const int side_face[2] = {face.owner_local, face.owner_local ^ 1};
    const Point n = mesh.local_normal(face.owner_local);
    const Point normals[2] = {n, Point{-n[0], -n[1], -n[2]}};
    const auto pts = ops.face_quad_points(mesh, face.owner, face.owner_local);
    const Vec& w = ops.face_weights(face.owner_local);
    for (int q = 0; q < L.nqf; ++q) {
      const Eigen::Index t = L.t(static_cast<int>(k), q);
      const TraceFlux fl[2] = {trace_flux(problem, pts[static_cast<std::size_t>(q)], normals[0]),
                               trace_flux(problem, pts[static_cast<std::size_t>(q)], normals[1])};
      const double den = fl[0].H(r) + fl[1].H(r);
      const bool average = std::abs(den) < 1e-14;
      sys.A_TT(t) = average ? 1.0 : w(q) * den;
      for (int s = 0; s < 2; ++s) {
        const int e = side_elem[s];
        const Mat& E = ops.face_interp(side_face[s]);
        for (int i = 0; i < L.np; ++i) {
          const double phi = E(q, i);
          if (phi == 0.0) continue;
          for (int c = 0; c < L.m; ++c) {
            // Element rows: E^T W H T.
            const double h = w(q) * fl[s].H(c) * phi;
            if (h != 0.0) tut.emplace_back(L.u(e, c, i), t, h);
            // Trace row: conservation of row r.
            const double g = average ? (c == r ? -0.5 * phi : 0.0) : w(q) * fl[s].G(r, c) * phi;
            if (g != 0.0) ttu.emplace_back(t, L.u(e, c, i), g);
          }
        }
      }
    }
  }
  const auto nu = static_cast<Eigen::Index>(L.nu);
  const auto nt = static_cast<Eigen::Index>(L.nt);
  sys.L_UU.resize(nu, nu);
  sys.L_UU.setFromTriplets(tuu.begin(), tuu.end());
  sys.L_UT.resize(nu, nt);
  sys.L_UT.setFromTriplets(tut.begin(), tut.end());
  sys.A_TU.resize(nt, nu);
  sys.A_TU.setFromTriplets(ttu.begin(), ttu.end());
  return sys;
}

// Forcing minus boundary data, S(t).
Vec assemble_source(const StructuredMesh& mesh, const ProblemSpec& problem, const ElementOperators& ops,
                    const Layout& L, double t) {
  Vec S(static_cast<Eigen::Index>(L.nu));
  for (int e = 0; e < mesh.num_elements(); ++e) {
    auto s = S.segment(L.u(e, 0, 0), L.block);
    s = volume_load(problem, mesh, ops, e, t);
    for (int f = 0; f < ops.num_faces(); ++f) {
      const Face& face = mesh.face(mesh.face_of(e, f));
      if (!face.is_boundary()) continue;
      const auto pts = ops.face_quad_points(mesh, e, f);
      const Point n = mesh.local_normal(f);
      const Vec& w = ops.face_weights(f);
      const Mat& E = ops.face_interp(f);
      for (int q = 0; q < L.nqf; ++q) {
        const Point& x = pts[static_cast<std::size_t>(q)];
        const TraceFlux fl = trace_flux(problem, x, n);
        const double g = boundary_trace(problem, face.tag, x, n, t).data;
        if (g == 0.0) continue;
        for (int c = 0; c < L.m; ++c) {
          s.segment(c * L.np, L.np) -= (w(q) * fl.H(c) * g) * E.row(q).transpose();
        }
      }
    }
  }
  return S;
}

SpMat block_mass(const Mat& Mt, const Layout& L, int nel, double scale) {
  Triplets tr;
  for (int e = 0; e < nel; ++e) {
    for (Eigen::Index j = 0; j < Mt.cols(); ++j) {
      for (Eigen::Index i = 0; i < Mt.rows(); ++i) {
        if (Mt(i, j) != 0.0) tr.emplace_back(L.u(e, 0, 0) + i, L.u(e, 0, 0) + j, scale * Mt(i, j));
      }
    }
  }
  SpMat M(static_cast<Eigen::Index>(L.nu), static_cast<Eigen::Index>(L.nu));
  M.setFromTriplets(tr.begin(), tr.end());
  return M;
}

}  // namespace

DirectSolution solve_direct(const StructuredMesh& mesh, const ProblemSpec& problem, const ElementOperators& ops,
                            const TimeConfig& time, const FieldState* previous, double t_prev, double t_next,
                            const DirectOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const Layout L = make_layout(mesh, problem, ops);
  if (L.nu + L.nt > options.max_unknowns) {
    throw DirectSolveError("direct solve needs " + std::to_string(L.nu + L.nt) + " unknowns, limit is " +
                           std::to_string(options.max_unknowns));
  }
  if (time.transient() && previous == nullptr) {
    throw std::invalid_argument("time step of the direct solver needs the previous level");
  }
  const SpatialSystem sys = assemble_spatial(mesh, problem, ops, L);
  const double theta = time.theta();

  SpMat A_UU;
  SpMat A_UT;
  Vec b_U;
  if (!time.transient()) {
    A_UU = sys.L_UU;
    A_UT = sys.L_UT;
    b_U = assemble_source(mesh, problem, ops, L, t_next);
  } else {
    const Mat Mt = time_mass(problem, ops);
    const SpMat M = block_mass(Mt, L, mesh.num_elements(), 1.0 / time.dt);
    A_UU = M + theta * sys.L_UU;
    A_UT = theta * sys.L_UT;
    const Vec Um = Eigen::Map<const Vec>(previous->data().data(), static_cast<Eigen::Index>(L.nu));
    b_U = M * Um + theta * assemble_source(mesh, problem, ops, L, t_next);
    if (theta < 1.0) {
      const Vec Tm = -(sys.A_TU * Um).cwiseQuotient(sys.A_TT);
      b_U += (1.0 - theta) *
             (assemble_source(mesh, problem, ops, L, t_prev) - sys.L_UU * Um - sys.L_UT * Tm);
    }
  }

  // Coupled matrix K = [A_UU A_UT; A_TU diag(A_TT)].
  const auto nu = static_cast<Eigen::Index>(L.nu);
  const auto nt = static_cast<Eigen::Index>(L.nt);
  Triplets kt;
  kt.reserve(static_cast<std::size_t>(A_UU.nonZeros() + A_UT.nonZeros() + sys.A_TU.nonZeros() + nt));
  for (Eigen::Index j = 0; j < A_UU.outerSize(); ++j) {
    for (SpMat::InnerIterator it(A_UU, j); it; ++it) kt.emplace_back(it.row(), it.col(), it.value());
  }
  for (Eigen::Index j = 0; j < A_UT.outerSize(); ++j) {
    for (SpMat::InnerIterator it(A_UT, j); it; ++it) kt.emplace_back(it.row(), nu + it.col(), it.value());
  }
  for (Eigen::Index j = 0; j < sys.A_TU.outerSize(); ++j) {
    for (SpMat::InnerIterator it(sys.A_TU, j); it; ++it) kt.emplace_back(nu + it.row(), it.col(), it.value());
  }
  for (Eigen::Index t = 0; t < nt; ++t) kt.emplace_back(nu + t, nu + t, sys.A_TT(t));
  SpMat K(nu + nt, nu + nt);
  K.setFromTriplets(kt.begin(), kt.end());
  kt.clear();
  kt.shrink_to_fit();

  // The trace block is diagonal: eliminate it exactly and factor the volume system.
  const Vec inv_tt = sys.A_TT.cwiseInverse();
  const SpMat reduced = A_UU - A_UT * (inv_tt.asDiagonal() * sys.A_TU);
  Eigen::SparseLU<SpMat> lu;
  lu.analyzePattern(reduced);
  lu.factorize(reduced);
  if (lu.info() != Eigen::Success) {
    throw DirectSolveError("sparse LU of the HDG system failed: " + lu.lastErrorMessage());
  }
  const Vec U = lu.solve(b_U);
  if (lu.info() != Eigen::Success || !U.allFinite()) throw DirectSolveError("HDG system solve failed");
  const Vec T = -(sys.A_TU * U).cwiseProduct(inv_tt);

  DirectSolution out;
  out.volume_unknowns = L.nu;
  out.trace_unknowns = L.nt;
  out.nonzeros = static_cast<std::size_t>(K.nonZeros());
  Vec x(nu + nt);
  x << U, T;
  Vec b = Vec::Zero(nu + nt);
  b.head(nu) = b_U;
  const Vec res = K * x - b;
  const double bn = b.norm();
  out.relative_residual = res.norm() / (bn > 0.0 ? bn : 1.0);
  for (std::size_t k = 0; k < L.interior.size(); ++k) {
    double face_res = 0.0;
    for (int q = 0; q < L.nqf; ++q) face_res += std::abs(res(nu + L.t(static_cast<int>(k), q)));
    out.max_face_residual = std::max(out.max_face_residual, face_res);
  }
  out.volume = FieldState(mesh.num_elements(), L.m, L.np);
  Eigen::Map<Vec>(out.volume.data().data(), nu) = U;
  out.traces.assign(T.data(), T.data() + nt);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace ihdg
