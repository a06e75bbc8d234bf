#include "ihdg/local_solvers.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <unordered_map>

#include "ihdg/parallel.hpp"

namespace ihdg {

namespace {

// Above this many distinct local matrices the duplicate search is abandoned:
// variable-coefficient problems then factor every element independently.
constexpr int kMaxSharedFactorizations = 64;
constexpr double kSingularRcond = 1e-14;

}  // namespace

const char* to_string(TimeScheme s) {
  switch (s) {
    case TimeScheme::steady: return "steady";
    case TimeScheme::backward_euler: return "backward_euler";
    case TimeScheme::crank_nicolson: return "crank_nicolson";
  }
  return "unknown";
}

SingularLocalSystem::SingularLocalSystem(int element, double rcond)
    : std::runtime_error("singular local matrix at element " + std::to_string(element) +
                         " (rcond estimate " + std::to_string(rcond) + ")"),
      element_(element),
      rcond_(rcond) {}

FaceTraces::FaceTraces(int num_elements, int faces_per_element, int points, int components)
    : faces_(faces_per_element),
      points_(points),
      components_(components),
      data_(static_cast<std::size_t>(num_elements) * faces_per_element * points * components, 0.0) {}

FaceTraces compute_face_traces(const FieldState& state, const ElementOperators& ops, int workers) {
  const int nf = ops.num_faces();
  const int nqf = ops.num_face_quad();
  const int m = state.num_components();
  FaceTraces tr(state.num_elements(), nf, nqf, m);
  parallel_for(state.num_elements(), workers, [&](int begin, int end) {
    for (int e = begin; e < end; ++e) {
      const auto U = state.element_matrix(e);
      for (int f = 0; f < nf; ++f) {
        Eigen::Map<Mat>(tr.at(e, f).data(), nqf, m).noalias() = ops.face_interp(f) * U;
      }
    }
  });
  return tr;
}

std::uint64_t hash_matrix(const Mat& A) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(A.data());
  const std::size_t n = static_cast<std::size_t>(A.size()) * sizeof(double);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  h ^= static_cast<std::uint64_t>(A.rows()) * 0x9E3779B97F4A7C15ULL;
  return h;
}

LocalSolverSet::LocalSolverSet(ProblemSpec problem, const StructuredMesh& mesh,
                               const ElementOperators& ops, TimeConfig time, Scheme scheme,
                               int workers)
    : problem_(std::move(problem)),
      mesh_(&mesh),
      ops_(&ops),
      time_(time),
      scheme_(scheme),
      components_(::ihdg::num_components(problem_)) {
  if (problem_dim(problem_) != mesh.dim() || ops.dim() != mesh.dim()) {
    throw std::invalid_argument("problem, mesh and operators disagree on the dimension");
  }
  if (time_.transient() && !(time_.dt > 0.0)) {
    throw std::invalid_argument("time-dependent mode needs dt > 0");
  }
  time_mass_ = ::ihdg::time_mass(problem_, ops);

  const int nel = mesh.num_elements();
  const int nf = ops.num_faces();
  const int nqf = ops.num_face_quad();
  const std::size_t mm = static_cast<std::size_t>(components_ * components_);
  const std::size_t total = static_cast<std::size_t>(nel) * nf * nqf * mm;
  Q_.assign(total, 0.0);
  if (scheme_ == Scheme::ihdg1) R_.assign(total, 0.0);

  parallel_for(nel, workers, [&](int begin, int end) {
    for (int e = begin; e < end; ++e) {
      for (int f = 0; f < nf; ++f) {
        if (mesh.neighbor(e, f) < 0) continue;
        const auto pts = ops.face_quad_points(mesh, e, f);
        const Point n = mesh.local_normal(f);
        for (int q = 0; q < nqf; ++q) {
          const auto c = interior_coupling(problem_, pts[static_cast<std::size_t>(q)], n, scheme_);
          std::memcpy(&Q_[coupling_offset(e, f, q)], c.Q.data(), mm * sizeof(double));
          if (scheme_ == Scheme::ihdg1) {
            std::memcpy(&R_[coupling_offset(e, f, q)], c.R.data(), mm * sizeof(double));
          }
        }
      }
    }
  });

  prepare_split();

  factor_of_.assign(static_cast<std::size_t>(nel), -1);
  hash_.assign(static_cast<std::size_t>(nel), 0);
  std::unordered_map<std::uint64_t, std::vector<std::pair<int, Mat>>> reps;
  std::vector<int> pending;
  bool dedupe = true;
  for (int e = 0; e < nel; ++e) {
    if (!dedupe) {
      pending.push_back(e);
      continue;
    }
    Mat A = assemble(e);
    const std::uint64_t h = hash_matrix(A);
    hash_[static_cast<std::size_t>(e)] = h;
    int found = -1;
    auto it = reps.find(h);
    if (it != reps.end()) {
      for (const auto& [id, rep] : it->second) {
        if (rep.rows() == A.rows() &&
            std::memcmp(rep.data(), A.data(), static_cast<std::size_t>(A.size()) * sizeof(double)) == 0) {
          found = id;
          break;
        }
      }
    }
    if (found >= 0) {
      factor_of_[static_cast<std::size_t>(e)] = found;
      continue;
    }
    if (static_cast<int>(factors_.size()) >= kMaxSharedFactorizations) {
      dedupe = false;
      reps.clear();
      pending.push_back(e);
      continue;
    }
    ElementFactor F = factor(e, A);
    if (!(F.rcond > kSingularRcond) || !std::isfinite(F.rcond)) throw SingularLocalSystem(e, F.rcond);
    const int id = static_cast<int>(factors_.size());
    factors_.push_back(std::move(F));
    reps[h].emplace_back(id, std::move(A));
    factor_of_[static_cast<std::size_t>(e)] = id;
  }
  reps.clear();

  if (!pending.empty()) {
    const int base = static_cast<int>(factors_.size());
    factors_.resize(factors_.size() + pending.size());
    std::vector<int> failed(pending.size(), 0);
    parallel_for(static_cast<int>(pending.size()), workers, [&](int begin, int end) {
      for (int i = begin; i < end; ++i) {
        const int e = pending[static_cast<std::size_t>(i)];
        Mat A = assemble(e);
        hash_[static_cast<std::size_t>(e)] = hash_matrix(A);
        auto& F = factors_[static_cast<std::size_t>(base + i)];
        F = factor(e, A);
        factor_of_[static_cast<std::size_t>(e)] = base + i;
        if (!(F.rcond > kSingularRcond) || !std::isfinite(F.rcond)) failed[static_cast<std::size_t>(i)] = 1;
      }
    });
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (failed[i]) {
        throw SingularLocalSystem(pending[i], factors_[static_cast<std::size_t>(base) + i].rcond);
      }
    }
  }
}

void LocalSolverSet::prepare_split() {
  const auto* cd = std::get_if<ConvectionDiffusionProblem>(&problem_);
  if (cd == nullptr || components_ < 3 || mesh_->num_elements() < 2) return;
  const int np = ops_->num_nodes();
  const int d = components_ - 1;
  const int nel = mesh_->num_elements();
  const int nf = ops_->num_faces();
  const int nqf = ops_->num_face_quad();
  const double theta = time_.theta();
  Mat V = volume_operator(problem_, *mesh_, *ops_, 0);
  if (time_.transient()) V = time_mass_ / time_.dt + theta * V;
  split_vol_B_.clear();
  split_vol_C_.clear();
  for (int i = 0; i < d; ++i) {
    split_vol_B_.push_back(V.block(i * np, d * np, np, np));
    split_vol_C_.push_back(V.block(d * np, i * np, np, np));
  }
  const std::size_t total = static_cast<std::size_t>(nel) * nf * d * nqf;
  split_face_B_.assign(total, 0.0);
  split_face_C_.assign(total, 0.0);
  for (int e = 0; e < nel; ++e) {
    for (int f = 0; f < nf; ++f) {
      const auto pts = ops_->face_quad_points(*mesh_, e, f);
      const Point n = mesh_->local_normal(f);
      const Face& face = mesh_->face(mesh_->face_of(e, f));
      const Vec& w = ops_->face_weights(f);
      for (int q = 0; q < nqf; ++q) {
        const Point& x = pts[static_cast<std::size_t>(q)];
        const Mat P = face.is_boundary() ? boundary_coupling(problem_, face.tag, x, n, 0.0).P
                                         : interior_coupling(problem_, x, n, scheme_).P;
        for (int i = 0; i < d; ++i) {
          const std::size_t k = ((static_cast<std::size_t>(e) * nf + f) * d + i) * nqf + q;
          split_face_B_[k] = theta * w(q) * P(i, d);
          split_face_C_[k] = theta * w(q) * P(d, i);
        }
      }
    }
  }
  try_split_ = true;
}

bool LocalSolverSet::splittable(int element, const Mat& A) const {
  if (!try_split_) return false;
  const int np = ops_->num_nodes();
  const int d = components_ - 1;
  const int nf = ops_->num_faces();
  const int nqf = ops_->num_face_quad();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (i != j && A.block(i * np, j * np, np, np).cwiseAbs().maxCoeff() != 0.0) return false;
    }
  }
  const double tol = 1e-12 * (1.0 + A.cwiseAbs().maxCoeff());
  for (int i = 0; i < d; ++i) {
    Mat B = split_vol_B_[static_cast<std::size_t>(i)];
    Mat C = split_vol_C_[static_cast<std::size_t>(i)];
    for (int f = 0; f < nf; ++f) {
      const std::size_t k = ((static_cast<std::size_t>(element) * nf + f) * d + i) * nqf;
      Eigen::Map<const Vec> cb(&split_face_B_[k], nqf);
      Eigen::Map<const Vec> cc(&split_face_C_[k], nqf);
      const Mat& E = ops_->face_interp(f);
      if (cb.cwiseAbs().maxCoeff() != 0.0) B.noalias() += E.transpose() * cb.asDiagonal() * E;
      if (cc.cwiseAbs().maxCoeff() != 0.0) C.noalias() += E.transpose() * cc.asDiagonal() * E;
    }
    if ((B - A.block(i * np, d * np, np, np)).cwiseAbs().maxCoeff() > tol) return false;
    if ((C - A.block(d * np, i * np, np, np)).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

LocalSolverSet::ElementFactor LocalSolverSet::factor(int element, const Mat& A) const {
  ElementFactor F;
  if (!splittable(element, A)) {
    F.lu.emplace_back(A);
    F.rcond = F.lu.front().rcond();
    return F;
  }
  const int np = ops_->num_nodes();
  const int d = components_ - 1;
  Mat S = A.block(d * np, d * np, np, np);
  F.rcond = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i) {
    F.lu.emplace_back(A.block(i * np, i * np, np, np));
    F.rcond = std::min(F.rcond, F.lu.back().rcond());
    S.noalias() -= A.block(d * np, i * np, np, np) * F.lu.back().solve(A.block(i * np, d * np, np, np));
  }
  F.lu.emplace_back(S);
  F.rcond = std::min(F.rcond, F.lu.back().rcond());
  return F;
}

void LocalSolverSet::solve_split(int element, const ElementFactor& F, Vec& x) const {
  const int np = ops_->num_nodes();
  const int d = components_ - 1;
  const int nf = ops_->num_faces();
  const int nqf = ops_->num_face_quad();
  auto face_apply = [&](const std::vector<double>& coef, int i, const Vec& v, Vec& out) {
    for (int f = 0; f < nf; ++f) {
      const std::size_t k = ((static_cast<std::size_t>(element) * nf + f) * d + i) * nqf;
      Eigen::Map<const Vec> c(&coef[k], nqf);
      if (c.cwiseAbs().maxCoeff() == 0.0) continue;
      const Mat& E = ops_->face_interp(f);
      out.noalias() += E.transpose() * (c.cwiseProduct(E * v));
    }
  };
  std::vector<Vec> y(static_cast<std::size_t>(d));
  Vec g = x.segment(d * np, np);
  Vec t(np);
  for (int i = 0; i < d; ++i) {
    auto& yi = y[static_cast<std::size_t>(i)];
    yi = F.lu[static_cast<std::size_t>(i)].solve(x.segment(i * np, np));
    t.noalias() = split_vol_C_[static_cast<std::size_t>(i)] * yi;
    face_apply(split_face_C_, i, yi, t);
    g -= t;
  }
  const Vec u = F.lu[static_cast<std::size_t>(d)].solve(g);
  x.segment(d * np, np) = u;
  for (int i = 0; i < d; ++i) {
    t.noalias() = split_vol_B_[static_cast<std::size_t>(i)] * u;
    face_apply(split_face_B_, i, u, t);
    x.segment(i * np, np) = y[static_cast<std::size_t>(i)] - F.lu[static_cast<std::size_t>(i)].solve(t);
  }
}

int LocalSolverSet::num_split_factorizations() const {
  int n = 0;
  for (const auto& F : factors_) n += F.lu.size() > 1 ? 1 : 0;
  return n;
}

std::size_t LocalSolverSet::coupling_offset(int element, int face, int point) const {
  const std::size_t mm = static_cast<std::size_t>(components_ * components_);
  return ((static_cast<std::size_t>(element) * static_cast<std::size_t>(ops_->num_faces()) +
           static_cast<std::size_t>(face)) *
              static_cast<std::size_t>(ops_->num_face_quad()) +
          static_cast<std::size_t>(point)) *
         mm;
}

Eigen::Map<const Mat> LocalSolverSet::coupling_Q(int element, int face, int point) const {
  return {Q_.data() + coupling_offset(element, face, point), components_, components_};
}

Eigen::Map<const Mat> LocalSolverSet::coupling_R(int element, int face, int point) const {
  if (R_.empty()) throw std::logic_error("R coupling is only stored for iHDG-I");
  return {R_.data() + coupling_offset(element, face, point), components_, components_};
}

namespace {

// A.block(i, j) += E^T diag(coef) E for every component pair with a nonzero coefficient.
void add_face_block(Mat& A, int np, const Mat& E, const std::vector<Mat>& P, const Vec& w) {
  const int m = static_cast<int>(P.front().rows());
  const int nq = static_cast<int>(P.size());
  Vec c(nq);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      bool any = false;
      for (int q = 0; q < nq; ++q) {
        c(q) = w(q) * P[static_cast<std::size_t>(q)](i, j);
        any = any || c(q) != 0.0;
      }
      if (!any) continue;
      A.block(i * np, j * np, np, np).noalias() += E.transpose() * c.asDiagonal() * E;
    }
  }
}

}  // namespace

Mat LocalSolverSet::assemble(int element) const {
  const int np = ops_->num_nodes();
  Mat L = volume_operator(problem_, *mesh_, *ops_, element);
  for (int f = 0; f < ops_->num_faces(); ++f) {
    const auto pts = ops_->face_quad_points(*mesh_, element, f);
    const Point n = mesh_->local_normal(f);
    std::vector<Mat> P;
    P.reserve(pts.size());
    const Face& face = mesh_->face(mesh_->face_of(element, f));
    for (const Point& x : pts) {
      if (face.is_boundary()) {
        P.push_back(boundary_coupling(problem_, face.tag, x, n, 0.0).P);
      } else {
        P.push_back(interior_coupling(problem_, x, n, scheme_).P);
      }
    }
    add_face_block(L, np, ops_->face_interp(f), P, ops_->face_weights(f));
  }
  const double theta = time_.theta();
  if (!time_.transient()) return L;
  return time_mass_ / time_.dt + theta * L;
}

Mat LocalSolverSet::local_matrix(int element) const { return assemble(element); }

std::uint64_t LocalSolverSet::matrix_hash(int element) const {
  return hash_[static_cast<std::size_t>(element)];
}

double LocalSolverSet::rcond(int element) const {
  return factors_[static_cast<std::size_t>(factor_of_[static_cast<std::size_t>(element)])].rcond;
}

double LocalSolverSet::min_rcond() const {
  double r = 1e300;
  for (const auto& F : factors_) r = std::min(r, F.rcond);
  return r;
}

FieldState LocalSolverSet::source(double t) const {
  const int np = ops_->num_nodes();
  FieldState S(mesh_->num_elements(), components_, np);
  for (int e = 0; e < mesh_->num_elements(); ++e) {
    Eigen::Map<Vec> s(S.element(e).data(), block_size());
    s = volume_load(problem_, *mesh_, *ops_, e, t);
    for (int f = 0; f < ops_->num_faces(); ++f) {
      const Face& face = mesh_->face(mesh_->face_of(e, f));
      if (!face.is_boundary()) continue;
      const auto pts = ops_->face_quad_points(*mesh_, e, f);
      const Point n = mesh_->local_normal(f);
      const Vec& w = ops_->face_weights(f);
      Mat g(static_cast<Eigen::Index>(pts.size()), components_);
      for (std::size_t q = 0; q < pts.size(); ++q) {
        const auto bc = boundary_coupling(problem_, face.tag, pts[q], n, t);
        for (int c = 0; c < components_; ++c) {
          g(static_cast<Eigen::Index>(q), c) = w(static_cast<Eigen::Index>(q)) * bc.data[static_cast<std::size_t>(c)];
        }
      }
      for (int c = 0; c < components_; ++c) {
        s.segment(c * np, np).noalias() -= ops_->face_interp(f).transpose() * g.col(c);
      }
    }
  }
  return S;
}

FieldState LocalSolverSet::apply_operator(const FieldState& state) const {
  const int np = ops_->num_nodes();
  const int m = components_;
  FieldState out(mesh_->num_elements(), m, np);
  const FaceTraces tr = compute_face_traces(state, *ops_);
  for (int e = 0; e < mesh_->num_elements(); ++e) {
    Eigen::Map<Vec> o(out.element(e).data(), block_size());
    Eigen::Map<const Vec> u(state.element(e).data(), block_size());
    o = volume_operator(problem_, *mesh_, *ops_, e) * u;
    for (int f = 0; f < ops_->num_faces(); ++f) {
      const Face& face = mesh_->face(mesh_->face_of(e, f));
      const int nb = mesh_->neighbor(e, f);
      const auto pts = ops_->face_quad_points(*mesh_, e, f);
      const Point n = mesh_->local_normal(f);
      const Vec& w = ops_->face_weights(f);
      const auto To = tr.matrix(e, f);
      Mat g(static_cast<Eigen::Index>(pts.size()), m);
      for (std::size_t q = 0; q < pts.size(); ++q) {
        const auto qi = static_cast<Eigen::Index>(q);
        Vec val;
        if (face.is_boundary()) {
          val = boundary_coupling(problem_, face.tag, pts[q], n, 0.0).P * To.row(qi).transpose();
        } else {
          const auto c = interior_coupling(problem_, pts[q], n, Scheme::ihdg2);
          val = c.P * To.row(qi).transpose() + c.Q * tr.matrix(nb, f ^ 1).row(qi).transpose();
        }
        g.row(qi) = w(qi) * val.transpose();
      }
      for (int c = 0; c < m; ++c) {
        o.segment(c * np, np).noalias() += ops_->face_interp(f).transpose() * g.col(c);
      }
    }
  }
  return out;
}

FieldState LocalSolverSet::base_rhs(const FieldState* previous, double t_prev, double t_next) const {
  if (!time_.transient()) return source(t_next);
  if (previous == nullptr) throw std::invalid_argument("time-dependent load needs the previous level");
  FieldState b = source(t_next);
  const double dt = time_.dt;
  if (time_.scheme == TimeScheme::crank_nicolson) {
    const FieldState s_prev = source(t_prev);
    const FieldState Lu = apply_operator(*previous);
    auto& bd = b.data();
    for (std::size_t i = 0; i < bd.size(); ++i) {
      bd[i] = 0.5 * (bd[i] + s_prev.data()[i]) - 0.5 * Lu.data()[i];
    }
  }
  for (int e = 0; e < mesh_->num_elements(); ++e) {
    Eigen::Map<Vec> be(b.element(e).data(), block_size());
    Eigen::Map<const Vec> u(previous->element(e).data(), block_size());
    be.noalias() += time_mass_ * u / dt;
  }
  return b;
}

void LocalSolverSet::solve_element(int e, const FieldState& base, const FieldState& iterate,
                                   const FaceTraces* traces, std::span<double> out) const {
  const int np = ops_->num_nodes();
  const int m = components_;
  const int nqf = ops_->num_face_quad();
  const double theta = time_.theta();
  Vec rhs = Eigen::Map<const Vec>(base.element(e).data(), block_size());
  Mat To(nqf, m);
  Mat Tn(nqf, m);
  Mat g(nqf, m);
  for (int f = 0; f < ops_->num_faces(); ++f) {
    const int nb = mesh_->neighbor(e, f);
    if (nb < 0) continue;
    const Mat& E = ops_->face_interp(f);
    if (traces != nullptr) {
      To = traces->matrix(e, f);
      Tn = traces->matrix(nb, f ^ 1);
    } else {
      To.noalias() = E * iterate.element_matrix(e);
      Tn.noalias() = ops_->face_interp(f ^ 1) * iterate.element_matrix(nb);
    }
    const Vec& w = ops_->face_weights(f);
    for (int q = 0; q < nqf; ++q) {
      const double* Q = &Q_[coupling_offset(e, f, q)];
      const double* R = R_.empty() ? nullptr : &R_[coupling_offset(e, f, q)];
      for (int i = 0; i < m; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) {
          acc += Q[static_cast<std::size_t>(j * m + i)] * Tn(q, j);
          if (R != nullptr) acc += R[static_cast<std::size_t>(j * m + i)] * To(q, j);
        }
        g(q, i) = -theta * w(q) * acc;
      }
    }
    for (int c = 0; c < m; ++c) rhs.segment(c * np, np).noalias() += E.transpose() * g.col(c);
  }
  const ElementFactor& F = factors_[static_cast<std::size_t>(factor_of_[static_cast<std::size_t>(e)])];
  if (F.lu.size() > 1) {
    solve_split(e, F, rhs);
    Eigen::Map<Vec>(out.data(), block_size()) = rhs;
  } else {
    Eigen::Map<Vec>(out.data(), block_size()) = F.lu.front().solve(rhs);
  }
}

void LocalSolverSet::apply_local(int element, const FieldState& base, const FieldState& iterate,
                                 std::span<double> out) const {
  solve_element(element, base, iterate, nullptr, out);
}

void LocalSolverSet::sweep(const FieldState& base, const FieldState& iterate, FieldState& next,
                           int workers) const {
  const FaceTraces tr = compute_face_traces(iterate, *ops_, workers);
  sweep(base, iterate, tr, next, workers);
}

void LocalSolverSet::sweep(const FieldState& base, const FieldState& iterate, const FaceTraces& traces,
                           FieldState& next, int workers) const {
  parallel_for(mesh_->num_elements(), workers, [&](int begin, int end) {
    for (int e = begin; e < end; ++e) solve_element(e, base, iterate, &traces, next.element(e));
  });
}

LocalSolverSet assemble_transport(const TransportProblem& problem, const StructuredMesh& mesh,
                                  const ElementOperators& ops, TimeConfig time, Scheme scheme) {
  return LocalSolverSet(problem, mesh, ops, time, scheme);
}

LocalSolverSet assemble_shallow_water(const ShallowWaterProblem& problem, const StructuredMesh& mesh,
                                      const ElementOperators& ops, TimeConfig time, Scheme scheme) {
  if (!time.transient()) throw std::invalid_argument("shallow water needs a time step");
  return LocalSolverSet(problem, mesh, ops, time, scheme);
}

LocalSolverSet assemble_convection_diffusion(const ConvectionDiffusionProblem& problem,
                                             const StructuredMesh& mesh, const ElementOperators& ops,
                                             TimeConfig time, Scheme scheme) {
  return LocalSolverSet(problem, mesh, ops, time, scheme);
}

}  // namespace ihdg
