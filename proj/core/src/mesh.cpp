#include "ihdg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ihdg {

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::none: return "none";
    case BoundaryTag::inflow: return "inflow";
    case BoundaryTag::outflow: return "outflow";
    case BoundaryTag::wall: return "wall";
    case BoundaryTag::dirichlet: return "dirichlet";
  }
  return "unknown";
}

StructuredMesh::StructuredMesh(int dim, std::array<int, 3> cells, const Box& box)
    : dim_(dim), cells_(cells), box_(box) {
  if (dim < 1 || dim > 3) {
    throw std::invalid_argument("mesh dimension must be 1, 2 or 3, got " + std::to_string(dim));
  }
  num_elements_ = 1;
  for (int a = 0; a < 3; ++a) {
    if (a >= dim) {
      cells_[a] = 1;
      h_[a] = 0.0;
      continue;
    }
    if (cells_[a] < 1) {
      throw std::invalid_argument("cells per dimension must be positive");
    }
    const double extent = box.upper[a] - box.lower[a];
    if (!(extent > 0.0) || !std::isfinite(extent)) {
      throw std::invalid_argument("degenerate box along axis " + std::to_string(a));
    }
    h_[a] = extent / cells_[a];
    num_elements_ *= cells_[a];
  }

  element_faces_.assign(static_cast<std::size_t>(num_elements_ * 2 * dim_), -1);

  // Faces grouped by axis, then lexicographic over the face grid (x fastest).
  for (int axis = 0; axis < dim_; ++axis) {
    std::array<int, 3> extent{1, 1, 1};
    for (int a = 0; a < dim_; ++a) extent[a] = cells_[a] + (a == axis ? 1 : 0);
    for (int k = 0; k < extent[2]; ++k) {
      for (int j = 0; j < extent[1]; ++j) {
        for (int i = 0; i < extent[0]; ++i) {
          std::array<int, 3> idx{i, j, k};
          const int plane = idx[axis];
          Face face;
          face.axis = axis;
          std::array<int, 3> low = idx;
          low[axis] = plane - 1;
          std::array<int, 3> high = idx;
          if (plane > 0) {
            face.owner = element_id(low);
            face.owner_local = 2 * axis + 1;
            face.normal[axis] = 1.0;
            if (plane < cells_[axis]) {
              face.neighbor = element_id(high);
              face.neighbor_local = 2 * axis;
            }
          } else {
            face.owner = element_id(high);
            face.owner_local = 2 * axis;
            face.normal[axis] = -1.0;
          }
          double measure = 1.0;
          for (int a = 0; a < dim_; ++a) {
            if (a == axis) {
              face.centroid[a] = box.lower[a] + plane * h_[a];
            } else {
              face.centroid[a] = box.lower[a] + (idx[a] + 0.5) * h_[a];
              measure *= h_[a];
            }
          }
          face.measure = measure;
          const int id = static_cast<int>(faces_.size());
          element_faces_[static_cast<std::size_t>(face.owner * 2 * dim_ + face.owner_local)] = id;
          if (face.neighbor >= 0) {
            element_faces_[static_cast<std::size_t>(face.neighbor * 2 * dim_ +
                                                    face.neighbor_local)] = id;
          }
          faces_.push_back(std::move(face));
        }
      }
    }
  }
}

double StructuredMesh::meshsize() const {
  double h = 0.0;
  for (int a = 0; a < dim_; ++a) h = std::max(h, h_[a]);
  return h;
}

int StructuredMesh::neighbor(int element, int local) const {
  const Face& f = face(face_of(element, local));
  if (f.is_boundary()) return -1;
  return f.owner == element ? f.neighbor : f.owner;
}

std::array<int, 3> StructuredMesh::element_index(int element) const {
  std::array<int, 3> idx{0, 0, 0};
  idx[0] = element % cells_[0];
  idx[1] = (element / cells_[0]) % cells_[1];
  idx[2] = element / (cells_[0] * cells_[1]);
  return idx;
}

int StructuredMesh::element_id(const std::array<int, 3>& index) const {
  return index[0] + cells_[0] * (index[1] + cells_[1] * index[2]);
}

Point StructuredMesh::element_lower(int element) const {
  const auto idx = element_index(element);
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = box_.lower[a] + idx[a] * h_[a];
  return x;
}

Point StructuredMesh::element_center(int element) const {
  Point x = element_lower(element);
  for (int a = 0; a < dim_; ++a) x[a] += 0.5 * h_[a];
  return x;
}

Point StructuredMesh::local_normal(int local) const {
  Point n{0.0, 0.0, 0.0};
  n[local / 2] = (local % 2 == 0) ? -1.0 : 1.0;
  return n;
}

std::vector<Point> StructuredMesh::face_points(int element, int local,
                                               std::span<const double> ref1d) const {
  const int axis = local / 2;
  const Point lower = element_lower(element);
  Point base = lower;
  base[axis] += (local % 2 == 0) ? 0.0 : h_[axis];

  std::array<int, 2> tangential{-1, -1};
  int nt = 0;
  for (int a = 0; a < dim_; ++a) {
    if (a != axis) tangential[nt++] = a;
  }
  const int n = static_cast<int>(ref1d.size());
  const int count = nt == 0 ? 1 : (nt == 1 ? n : n * n);
  std::vector<Point> pts(static_cast<std::size_t>(count), base);
  for (int q = 0; q < count; ++q) {
    Point& x = pts[static_cast<std::size_t>(q)];
    if (nt >= 1) {
      const int a0 = tangential[0];
      x[a0] = lower[a0] + 0.5 * (ref1d[static_cast<std::size_t>(q % n)] + 1.0) * h_[a0];
    }
    if (nt == 2) {
      const int a1 = tangential[1];
      x[a1] = lower[a1] + 0.5 * (ref1d[static_cast<std::size_t>(q / n)] + 1.0) * h_[a1];
    }
  }
  return pts;
}

StructuredMesh build_mesh(int dim, std::span<const int> cells_per_dim, const Box& box) {
  if (dim < 1 || dim > 3) {
    throw std::invalid_argument("mesh dimension must be 1, 2 or 3");
  }
  if (static_cast<int>(cells_per_dim.size()) < dim) {
    throw std::invalid_argument("need one cell count per dimension");
  }
  std::array<int, 3> cells{1, 1, 1};
  for (int a = 0; a < dim; ++a) cells[a] = cells_per_dim[static_cast<std::size_t>(a)];
  return StructuredMesh(dim, cells, box);
}

StructuredMesh classify_boundary_faces(StructuredMesh mesh, const VelocityField& beta,
                                       std::span<const double> ref1d) {
  for (std::size_t id = 0; id < mesh.faces().size(); ++id) {
    Face& f = mesh.mutable_face(static_cast<int>(id));
    if (!f.is_boundary()) continue;
    const auto pts = mesh.face_points(f.owner, f.owner_local, ref1d);
    f.point_tags.resize(pts.size());
    bool any_inflow = false;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const Point b = beta(pts[q]);
      double bn = 0.0;
      for (int a = 0; a < mesh.dim(); ++a) bn += b[a] * f.normal[a];
      // beta.n == 0 carries no inflow weight and counts as outflow.
      f.point_tags[q] = bn < 0.0 ? BoundaryTag::inflow : BoundaryTag::outflow;
      any_inflow = any_inflow || bn < 0.0;
    }
    f.tag = any_inflow ? BoundaryTag::inflow : BoundaryTag::outflow;
  }
  return mesh;
}

StructuredMesh tag_boundary(StructuredMesh mesh, BoundaryTag tag) {
  for (std::size_t id = 0; id < mesh.faces().size(); ++id) {
    Face& f = mesh.mutable_face(static_cast<int>(id));
    if (!f.is_boundary()) continue;
    f.tag = tag;
    f.point_tags.clear();
  }
  return mesh;
}

}  // namespace ihdg
