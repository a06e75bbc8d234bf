#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ihdg/local_solvers.hpp"

namespace ihdg {

class DirectSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DirectOptions {
  /// Volume plus trace unknowns above which solve_direct refuses to run.
  std::size_t max_unknowns = 400000;
};

/// HDG solution from one global solve.
///
/// Unknowns: all volume coefficients (element-major, as in FieldState), then
/// one scalar trace value per interior face quadrature point (faces in mesh
/// order, owner-side point order). Boundary traces follow from the boundary
/// condition. Each interior trace row imposes conservation of the conserved
/// flux component across the face.
struct DirectSolution {
  FieldState volume;
  std::vector<double> traces;
  std::size_t volume_unknowns = 0;
  std::size_t trace_unknowns = 0;
  std::size_t nonzeros = 0;
  double relative_residual = 0.0;  ///< ||K x - b|| / ||b|| of the coupled system
  double max_face_residual = 0.0;  ///< largest flux-conservation residual over interior faces
  double seconds = 0.0;
};

/// Steady solve (time.scheme == steady) at time t_next, or one step of the
/// theta scheme from `previous` at t_prev to t_next.
DirectSolution solve_direct(const StructuredMesh& mesh, const ProblemSpec& problem, const ElementOperators& ops,
                            const TimeConfig& time = {}, const FieldState* previous = nullptr,
                            double t_prev = 0.0, double t_next = 0.0, const DirectOptions& options = {});

}  // namespace ihdg
