#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ihdg/basis.hpp"
#include "ihdg/mesh.hpp"
#include "ihdg/pde.hpp"

namespace ihdg {

enum class TimeScheme { steady, backward_euler, crank_nicolson };
const char* to_string(TimeScheme s);

struct TimeConfig {
  TimeScheme scheme = TimeScheme::steady;
  double dt = 0.0;

  bool transient() const { return scheme != TimeScheme::steady; }
  /// Implicit weight of the spatial operator: 1 for steady and backward Euler, 1/2 for CN.
  double theta() const { return scheme == TimeScheme::crank_nicolson ? 0.5 : 1.0; }
};

class SingularLocalSystem : public std::runtime_error {
 public:
  SingularLocalSystem(int element, double rcond);
  int element() const { return element_; }
  double rcond() const { return rcond_; }

 private:
  int element_;
  double rcond_;
};

/// Per-element trace values of a state on every local face:
/// [element][face] -> (face quadrature points x components), column-major.
class FaceTraces {
 public:
  FaceTraces() = default;
  FaceTraces(int num_elements, int faces_per_element, int points, int components);

  std::span<double> at(int element, int face) {
    return {data_.data() + offset(element, face), static_cast<std::size_t>(points_ * components_)};
  }
  std::span<const double> at(int element, int face) const {
    return {data_.data() + offset(element, face), static_cast<std::size_t>(points_ * components_)};
  }
  Eigen::Map<const Mat> matrix(int element, int face) const {
    return {data_.data() + offset(element, face), points_, components_};
  }
  int points() const { return points_; }
  int components() const { return components_; }

 private:
  std::size_t offset(int element, int face) const {
    return (static_cast<std::size_t>(element) * static_cast<std::size_t>(faces_) +
            static_cast<std::size_t>(face)) *
           static_cast<std::size_t>(points_ * components_);
  }
  int faces_ = 0;
  int points_ = 0;
  int components_ = 0;
  std::vector<double> data_;
};

FaceTraces compute_face_traces(const FieldState& state, const ElementOperators& ops, int workers = 1);

/// Element-local systems of iHDG-I / iHDG-II for one (problem, mesh, order,
/// time step, scheme) configuration.
///
/// The local system of element K reads
///   A_K U_K^{k+1} = b_K - theta * sum_faces <R U_K^k + Q U_nb^k, v>
/// where A_K = M_t/dt + theta (L_V + sum_faces <P U, v>) is factorized once and
/// b_K (forcing, boundary data, previous time level) is rebuilt once per time
/// level. Identical matrices are detected and share one factorization.
/// Convection-diffusion systems whose flux components decouple from each other
/// are factored blockwise (one LU per flux component plus the Schur complement
/// of the scalar), which needs a quarter of the memory of a dense LU in 3D.
class LocalSolverSet {
 public:
  LocalSolverSet(ProblemSpec problem, const StructuredMesh& mesh, const ElementOperators& ops,
                 TimeConfig time, Scheme scheme, int workers = 1);

  const ProblemSpec& problem() const { return problem_; }
  const StructuredMesh& mesh() const { return *mesh_; }
  const ElementOperators& ops() const { return *ops_; }
  const TimeConfig& time() const { return time_; }
  Scheme scheme() const { return scheme_; }
  int num_components() const { return components_; }
  int block_size() const { return components_ * ops_->num_nodes(); }

  /// Reassembles the local matrix A_K (not stored to save memory).
  Mat local_matrix(int element) const;
  /// Hash of the bytes of A_K recorded at factorization time.
  std::uint64_t matrix_hash(int element) const;
  /// Reciprocal condition number estimate (1-norm) of A_K.
  double rcond(int element) const;
  double min_rcond() const;
  int num_factorizations() const { return static_cast<int>(factors_.size()); }
  /// Number of distinct factorizations stored in block (Schur) form.
  int num_split_factorizations() const;

  /// Load b_K for the next level. Steady: source S(t_next). Backward Euler:
  /// M_t U^m / dt + S(t_next). Crank-Nicolson additionally averages the source
  /// and subtracts half the full spatial operator applied to U^m.
  FieldState base_rhs(const FieldState* previous, double t_prev, double t_next) const;

  /// One block-Jacobi sweep: every element solved against the frozen iterate.
  void sweep(const FieldState& base, const FieldState& iterate, FieldState& next,
             int workers = 1) const;
  void sweep(const FieldState& base, const FieldState& iterate, const FaceTraces& traces,
             FieldState& next, int workers = 1) const;

  /// Single local solve from the iterate (pure function of its inputs).
  void apply_local(int element, const FieldState& base, const FieldState& iterate,
                   std::span<double> out) const;

  /// Full spatial operator L(U) (iHDG-II face split with U on both sides),
  /// i.e. the HDG operator without sources; used by Crank-Nicolson and diagnostics.
  FieldState apply_operator(const FieldState& state) const;
  /// Source S(t): forcing minus boundary data.
  FieldState source(double t) const;

  /// Coupling coefficients at interior face quadrature points (for diagnostics):
  /// matrices Q (and R) of element e, local face f, point q.
  Eigen::Map<const Mat> coupling_Q(int element, int face, int point) const;
  Eigen::Map<const Mat> coupling_R(int element, int face, int point) const;

 private:
  struct ElementFactor {
    std::vector<Eigen::PartialPivLU<Mat>> lu;  ///< one dense LU, or flux blocks followed by the Schur complement
    double rcond = 0.0;
  };

  Mat assemble(int element) const;
  ElementFactor factor(int element, const Mat& A) const;
  bool splittable(int element, const Mat& A) const;
  void prepare_split();
  void solve_split(int element, const ElementFactor& F, Vec& x) const;
  std::size_t coupling_offset(int element, int face, int point) const;
  void solve_element(int element, const FieldState& base, const FieldState& iterate,
                     const FaceTraces* traces, std::span<double> out) const;

  ProblemSpec problem_;
  const StructuredMesh* mesh_;
  const ElementOperators* ops_;
  TimeConfig time_;
  Scheme scheme_;
  int components_;

  Mat time_mass_;
  std::vector<ElementFactor> factors_;
  std::vector<int> factor_of_;
  std::vector<std::uint64_t> hash_;
  std::vector<double> Q_;
  std::vector<double> R_;

  // Block form: flux/scalar volume couplings shared by all elements and
  // per face point coefficients of the face terms (theta and weights applied).
  bool try_split_ = false;
  std::vector<Mat> split_vol_B_;
  std::vector<Mat> split_vol_C_;
  std::vector<double> split_face_B_;
  std::vector<double> split_face_C_;
};

std::uint64_t hash_matrix(const Mat& A);

/// Per-PDE entry points; all three build the same LocalSolverSet machinery.
LocalSolverSet assemble_transport(const TransportProblem& problem, const StructuredMesh& mesh,
                                  const ElementOperators& ops, TimeConfig time, Scheme scheme);
LocalSolverSet assemble_shallow_water(const ShallowWaterProblem& problem, const StructuredMesh& mesh,
                                      const ElementOperators& ops, TimeConfig time, Scheme scheme);
LocalSolverSet assemble_convection_diffusion(const ConvectionDiffusionProblem& problem,
                                             const StructuredMesh& mesh, const ElementOperators& ops,
                                             TimeConfig time, Scheme scheme);

}  // namespace ihdg
