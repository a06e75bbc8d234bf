#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ihdg {

using Point = std::array<double, 3>;

struct Box {
  Point lower{0.0, 0.0, 0.0};
  Point upper{1.0, 1.0, 1.0};
};

enum class BoundaryTag : std::uint8_t { none, inflow, outflow, wall, dirichlet };

const char* to_string(BoundaryTag tag);

/// One geometric face of the skeleton. Interior faces are owned by the element
/// on their low side, so the owner normal points in the +axis direction.
struct Face {
  int owner = -1;
  int neighbor = -1;  ///< -1 on the domain boundary
  int owner_local = -1;
  int neighbor_local = -1;
  int axis = 0;
  Point normal{};  ///< unit outward normal of the owner side
  Point centroid{};
  double measure = 0.0;
  BoundaryTag tag = BoundaryTag::none;
  /// Per face-quadrature-point tags, filled by classify_boundary_faces.
  std::vector<BoundaryTag> point_tags;

  bool is_boundary() const { return neighbor < 0; }
};

/// Uniform axis-aligned tensor-product mesh of a box in 1, 2 or 3 dimensions.
///
/// Elements are numbered lexicographically with the x index running fastest.
/// Local face `f` of an element is `2 * axis + side`, where side 0 is the low
/// face (outward normal -e_axis) and side 1 the high face.
class StructuredMesh {
 public:
  StructuredMesh(int dim, std::array<int, 3> cells, const Box& box);

  int dim() const { return dim_; }
  const std::array<int, 3>& cells() const { return cells_; }
  const Box& box() const { return box_; }
  const Point& h() const { return h_; }
  /// Largest edge length over the axes in use.
  double meshsize() const;
  int num_elements() const { return num_elements_; }
  int faces_per_element() const { return 2 * dim_; }

  const std::vector<Face>& faces() const { return faces_; }
  const Face& face(int id) const { return faces_[static_cast<std::size_t>(id)]; }
  Face& mutable_face(int id) { return faces_[static_cast<std::size_t>(id)]; }

  int face_of(int element, int local) const {
    return element_faces_[static_cast<std::size_t>(element * 2 * dim_ + local)];
  }
  /// Neighbor across local face `local`, or -1 on the boundary.
  int neighbor(int element, int local) const;

  std::array<int, 3> element_index(int element) const;
  int element_id(const std::array<int, 3>& index) const;
  Point element_lower(int element) const;
  Point element_center(int element) const;

  /// Outward unit normal of local face `local` (same for every element).
  Point local_normal(int local) const;

  /// Physical coordinates of points on local face `local` of `element`.
  /// `ref1d` are reference coordinates in [-1, 1] used per tangential axis,
  /// the first tangential axis running fastest.
  std::vector<Point> face_points(int element, int local,
                                 std::span<const double> ref1d) const;

 private:
  int dim_;
  std::array<int, 3> cells_;
  Box box_;
  Point h_{};
  int num_elements_ = 0;
  std::vector<Face> faces_;
  std::vector<int> element_faces_;
};

StructuredMesh build_mesh(int dim, std::span<const int> cells_per_dim,
                          const Box& box = {});

using VelocityField = std::function<Point(const Point&)>;

/// Tags boundary faces as inflow (beta.n < 0) or outflow (beta.n >= 0) at the
/// given reference points of every boundary face. Faces with mixed signs keep
/// per-point tags and carry the face tag `inflow`.
StructuredMesh classify_boundary_faces(StructuredMesh mesh, const VelocityField& beta,
                                       std::span<const double> ref1d);

/// Assigns one tag to every boundary face (walls, Dirichlet data).
StructuredMesh tag_boundary(StructuredMesh mesh, BoundaryTag tag);

}  // namespace ihdg
