#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ihdg/mesh.hpp"

namespace ihdg {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Maximum number of solution components of any supported PDE
/// (convection-diffusion in 3D: sigma_1..sigma_3, u).
inline constexpr int kMaxComponents = 4;
using Values = std::array<double, kMaxComponents>;
using FieldFunction = std::function<Values(const Point&)>;

struct Quadrature1D {
  std::vector<double> points;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
Quadrature1D gauss_legendre(int n);
/// n Gauss-Lobatto-Legendre nodes on [-1, 1] (n >= 2), ascending.
std::vector<double> gauss_lobatto_nodes(int n);
/// Legendre polynomial P_n and its derivative at x.
std::pair<double, double> legendre(int n, double x);

/// Values of the Lagrange polynomials through `nodes` at `x`: (x.size() x nodes.size()).
Mat lagrange_matrix(std::span<const double> nodes, std::span<const double> x);
/// First derivatives of the Lagrange polynomials at `x`.
Mat lagrange_derivative_matrix(std::span<const double> nodes, std::span<const double> x);

/// Per-order nodal tensor-product operators for an axis-aligned element of
/// size h. Nodes are Gauss-Lobatto-Legendre points, integrals use the
/// (p+2)-point Gauss-Legendre rule per dimension for volumes and faces.
///
/// Node and quadrature indices are tensor products with x running fastest.
/// Face quadrature points of local face f = 2*axis+side run over the
/// remaining axes in increasing order, which is what StructuredMesh::face_points
/// produces, so both sides of an interior face see identical point orderings.
class ElementOperators {
 public:
  static constexpr int kMaxOrder = 10;

  ElementOperators(int order, int dim, const Point& h);

  int order() const { return order_; }
  int dim() const { return dim_; }
  const Point& h() const { return h_; }
  int nodes_1d() const { return order_ + 1; }
  int quad_1d() const { return order_ + 2; }
  int num_nodes() const { return num_nodes_; }
  int num_quad() const { return num_quad_; }
  int num_face_quad() const { return num_face_quad_; }
  int num_faces() const { return 2 * dim_; }

  const std::vector<double>& nodes1d() const { return nodes1d_; }
  const Quadrature1D& quadrature1d() const { return quad1d_; }
  /// Reference 1D mass matrix on [-1, 1].
  const Mat& reference_mass1d() const { return mass1d_; }
  /// Reference nodal differentiation matrix on [-1, 1] (nodes x nodes).
  const Mat& reference_diff1d() const { return diff1d_; }

  /// Volume nodes -> volume quadrature points.
  const Mat& vol_interp() const { return vol_interp_; }
  /// Physical partial derivative along `axis` evaluated at quadrature points.
  const Mat& vol_grad(int axis) const { return vol_grad_[static_cast<std::size_t>(axis)]; }
  /// Physical quadrature weights (include the Jacobian).
  const Vec& vol_weights() const { return vol_weights_; }
  /// Physical consistent mass matrix.
  const Mat& mass() const { return mass_; }
  /// Volume nodes -> quadrature points of local face f.
  const Mat& face_interp(int f) const { return face_interp_[static_cast<std::size_t>(f)]; }
  /// Physical face quadrature weights of local face f.
  const Vec& face_weights(int f) const { return face_weights_[static_cast<std::size_t>(f)]; }

  /// Physical coordinates of the volume nodes / quadrature points of an element.
  std::vector<Point> node_points(const StructuredMesh& mesh, int element) const;
  std::vector<Point> quad_points(const StructuredMesh& mesh, int element) const;
  std::vector<Point> face_quad_points(const StructuredMesh& mesh, int element, int f) const;

 private:
  int order_;
  int dim_;
  Point h_;
  int num_nodes_;
  int num_quad_;
  int num_face_quad_;
  std::vector<double> nodes1d_;
  Quadrature1D quad1d_;
  Mat mass1d_;
  Mat diff1d_;
  Mat vol_interp_;
  std::array<Mat, 3> vol_grad_;
  Vec vol_weights_;
  Mat mass_;
  std::array<Mat, 6> face_interp_;
  std::array<Vec, 6> face_weights_;
};

ElementOperators build_operators(int order, int dim, const Point& h);

/// Per-element nodal coefficients of all solution components.
/// Layout: element-major, then component, then node, so one element's block
/// maps onto a column-major (nodes x components) matrix.
class FieldState {
 public:
  FieldState() = default;
  FieldState(int num_elements, int num_components, int nodes_per_element);

  int num_elements() const { return num_elements_; }
  int num_components() const { return num_components_; }
  int nodes_per_element() const { return nodes_; }
  int block_size() const { return num_components_ * nodes_; }

  std::span<double> element(int e) {
    return {data_.data() + static_cast<std::size_t>(e) * block_size(),
            static_cast<std::size_t>(block_size())};
  }
  std::span<const double> element(int e) const {
    return {data_.data() + static_cast<std::size_t>(e) * block_size(),
            static_cast<std::size_t>(block_size())};
  }
  Eigen::Map<Mat> element_matrix(int e) {
    return {data_.data() + static_cast<std::size_t>(e) * block_size(), nodes_, num_components_};
  }
  Eigen::Map<const Mat> element_matrix(int e) const {
    return {data_.data() + static_cast<std::size_t>(e) * block_size(), nodes_, num_components_};
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }
  bool all_finite() const;

  int iterate = 0;
  int time_level = 0;

 private:
  int num_elements_ = 0;
  int num_components_ = 0;
  int nodes_ = 0;
  std::vector<double> data_;
};

/// Contiguous range of components a norm is taken over (count < 0: to the end).
struct ComponentRange {
  int first = 0;
  int count = -1;
};

/// Nodal interpolant (collocation at the GLL nodes) of `f`.
FieldState project(const FieldFunction& f, int num_components, const StructuredMesh& mesh,
                   const ElementOperators& ops);

double l2_norm(const FieldState& state, const ElementOperators& ops, ComponentRange range = {});
double l2_error(const FieldState& state, const FieldFunction& exact, const StructuredMesh& mesh,
                const ElementOperators& ops, ComponentRange range = {});
/// Squared L2 norm of the difference restricted to one element.
double element_l2_diff_sq(const FieldState& a, const FieldState& b, int element,
                          const ElementOperators& ops, ComponentRange range = {});
double l2_diff(const FieldState& a, const FieldState& b, const ElementOperators& ops,
               ComponentRange range = {});

/// Sharp constant c of the inverse trace inequality
///   ||v||_K^2 >= 2 c h / (d (p+1)(p+2)) ||v||_dK^2
/// for the polynomial space of `ops`, from the extreme generalized eigenvalue of
/// the boundary mass matrix against the volume mass matrix. h is the element
/// edge length (uniform elements).
double trace_inequality_constant(const ElementOperators& ops);

/// ||v||_dK^2 / ||v||_K^2 for nodal coefficients v of one element.
double trace_to_volume_ratio(const ElementOperators& ops, const Vec& v);

}  // namespace ihdg
