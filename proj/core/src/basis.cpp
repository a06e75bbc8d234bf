#include "ihdg/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ihdg {

std::pair<double, double> legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p0 = 1.0;
  double p1 = x;
  double d0 = 0.0;
  double d1 = 1.0;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    const double d2 = d0 + (2.0 * k - 1.0) * p1;
    p0 = p1;
    p1 = p2;
    d0 = d1;
    d1 = d2;
  }
  return {p1, d1};
}

Quadrature1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss rule needs at least one point");
  Quadrature1D q;
  q.points.resize(static_cast<std::size_t>(n));
  q.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = -std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [p, dp] = legendre(n, x);
    (void)p;
    q.points[static_cast<std::size_t>(i)] = x;
    q.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

std::vector<double> gauss_lobatto_nodes(int n) {
  if (n < 2) throw std::invalid_argument("Gauss-Lobatto rule needs at least two nodes");
  const int N = n - 1;
  std::vector<double> x(static_cast<std::size_t>(n));
  x.front() = -1.0;
  x.back() = 1.0;
  for (int i = 1; i < N; ++i) {
    double xi = -std::cos(std::numbers::pi * i / N);
    // Interior nodes are the roots of P_N'.
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(N, xi);
      const double d2p = (2.0 * xi * dp - N * (N + 1.0) * p) / (1.0 - xi * xi);
      const double dx = dp / d2p;
      xi -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    x[static_cast<std::size_t>(i)] = xi;
  }
  return x;
}

namespace {

std::vector<double> barycentric_weights(std::span<const double> nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> w(n, 1.0);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t m = 0; m < n; ++m) {
      if (m != j) w[j] /= (nodes[j] - nodes[m]);
    }
  }
  return w;
}

Mat nodal_diff_matrix(std::span<const double> nodes) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  const auto w = barycentric_weights(nodes);
  Mat D = Mat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      D(i, j) = (w[uj] / w[ui]) / (nodes[ui] - nodes[uj]);
      diag -= D(i, j);
    }
    D(i, i) = diag;
  }
  return D;
}

}  // namespace

Mat lagrange_matrix(std::span<const double> nodes, std::span<const double> x) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  const auto m = static_cast<Eigen::Index>(x.size());
  Mat L = Mat::Zero(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      double v = 1.0;
      const double xj = nodes[static_cast<std::size_t>(j)];
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k == j) continue;
        const double xk = nodes[static_cast<std::size_t>(k)];
        v *= (xi - xk) / (xj - xk);
      }
      L(i, j) = v;
    }
  }
  return L;
}

Mat lagrange_derivative_matrix(std::span<const double> nodes, std::span<const double> x) {
  return lagrange_matrix(nodes, x) * nodal_diff_matrix(nodes);
}

namespace {

// Tensor product of 1D matrices, mats[0] acting on x (fastest index).
Mat tensor(const std::vector<const Mat*>& mats) {
  Mat out = *mats[0];
  for (std::size_t a = 1; a < mats.size(); ++a) {
    const Mat& B = *mats[a];
    Mat next(out.rows() * B.rows(), out.cols() * B.cols());
    for (Eigen::Index i = 0; i < B.rows(); ++i) {
      for (Eigen::Index j = 0; j < B.cols(); ++j) {
        next.block(i * out.rows(), j * out.cols(), out.rows(), out.cols()) = B(i, j) * out;
      }
    }
    out = std::move(next);
  }
  return out;
}

Vec tensor_weights(const std::vector<Vec>& w) {
  Vec out = w[0];
  for (std::size_t a = 1; a < w.size(); ++a) {
    Vec next(out.size() * w[a].size());
    for (Eigen::Index i = 0; i < w[a].size(); ++i) {
      next.segment(i * out.size(), out.size()) = w[a](i) * out;
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace

ElementOperators::ElementOperators(int order, int dim, const Point& h)
    : order_(order), dim_(dim), h_(h) {
  if (order < 1 || order > kMaxOrder) {
    throw std::invalid_argument("polynomial order must be in [1, 10], got " +
                                std::to_string(order));
  }
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  for (int a = 0; a < dim; ++a) {
    if (!(h[static_cast<std::size_t>(a)] > 0.0)) {
      throw std::invalid_argument("element size must be positive");
    }
  }

  const int np = order + 1;
  const int nq = order + 2;
  nodes1d_ = gauss_lobatto_nodes(np);
  quad1d_ = gauss_legendre(nq);
  num_nodes_ = 1;
  num_quad_ = 1;
  for (int a = 0; a < dim; ++a) {
    num_nodes_ *= np;
    num_quad_ *= nq;
  }
  num_face_quad_ = num_quad_ / nq;

  const Mat I1 = lagrange_matrix(nodes1d_, quad1d_.points);
  const Mat D1 = lagrange_derivative_matrix(nodes1d_, quad1d_.points);
  const Vec w1 = Eigen::Map<const Vec>(quad1d_.weights.data(), nq);
  diff1d_ = nodal_diff_matrix(nodes1d_);
  mass1d_ = I1.transpose() * w1.asDiagonal() * I1;

  std::vector<const Mat*> factors(static_cast<std::size_t>(dim), &I1);
  vol_interp_ = tensor(factors);
  std::vector<Vec> wfac;
  for (int a = 0; a < dim; ++a) wfac.push_back(w1 * (0.5 * h[static_cast<std::size_t>(a)]));
  vol_weights_ = tensor_weights(wfac);
  for (int a = 0; a < dim; ++a) {
    auto f = factors;
    f[static_cast<std::size_t>(a)] = &D1;
    vol_grad_[static_cast<std::size_t>(a)] = tensor(f) * (2.0 / h[static_cast<std::size_t>(a)]);
  }
  mass_ = vol_interp_.transpose() * vol_weights_.asDiagonal() * vol_interp_;

  const std::array<double, 1> lo{-1.0};
  const std::array<double, 1> hi{1.0};
  const Mat E0 = lagrange_matrix(nodes1d_, lo);
  const Mat E1 = lagrange_matrix(nodes1d_, hi);
  for (int f = 0; f < 2 * dim; ++f) {
    const int axis = f / 2;
    auto fac = factors;
    fac[static_cast<std::size_t>(axis)] = (f % 2 == 0) ? &E0 : &E1;
    face_interp_[static_cast<std::size_t>(f)] = tensor(fac);
    std::vector<Vec> fw;
    for (int a = 0; a < dim; ++a) {
      if (a == axis) continue;
      fw.push_back(w1 * (0.5 * h[static_cast<std::size_t>(a)]));
    }
    face_weights_[static_cast<std::size_t>(f)] = fw.empty() ? Vec::Ones(1) : tensor_weights(fw);
  }
}

ElementOperators build_operators(int order, int dim, const Point& h) {
  return ElementOperators(order, dim, h);
}

namespace {

std::vector<Point> tensor_points(const Point& lower, const Point& h, int dim,
                                 const std::vector<double>& ref) {
  const int n = static_cast<int>(ref.size());
  int count = 1;
  for (int a = 0; a < dim; ++a) count *= n;
  std::vector<Point> pts(static_cast<std::size_t>(count), lower);
  for (int q = 0; q < count; ++q) {
    int r = q;
    for (int a = 0; a < dim; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      pts[static_cast<std::size_t>(q)][ua] =
          lower[ua] + 0.5 * (ref[static_cast<std::size_t>(r % n)] + 1.0) * h[ua];
      r /= n;
    }
  }
  return pts;
}

}  // namespace

std::vector<Point> ElementOperators::node_points(const StructuredMesh& mesh, int element) const {
  return tensor_points(mesh.element_lower(element), h_, dim_, nodes1d_);
}

std::vector<Point> ElementOperators::quad_points(const StructuredMesh& mesh, int element) const {
  return tensor_points(mesh.element_lower(element), h_, dim_, quad1d_.points);
}

std::vector<Point> ElementOperators::face_quad_points(const StructuredMesh& mesh, int element,
                                                      int f) const {
  return mesh.face_points(element, f, quad1d_.points);
}

FieldState::FieldState(int num_elements, int num_components, int nodes_per_element)
    : num_elements_(num_elements),
      num_components_(num_components),
      nodes_(nodes_per_element),
      data_(static_cast<std::size_t>(num_elements) * num_components * nodes_per_element, 0.0) {}

bool FieldState::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

std::pair<int, int> resolve(const FieldState& s, ComponentRange r) {
  const int first = r.first;
  const int last = r.count < 0 ? s.num_components() : std::min(s.num_components(), first + r.count);
  return {first, last};
}

}  // namespace

FieldState project(const FieldFunction& f, int num_components, const StructuredMesh& mesh,
                   const ElementOperators& ops) {
  FieldState s(mesh.num_elements(), num_components, ops.num_nodes());
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto pts = ops.node_points(mesh, e);
    auto U = s.element_matrix(e);
    for (int i = 0; i < ops.num_nodes(); ++i) {
      const Values v = f(pts[static_cast<std::size_t>(i)]);
      for (int c = 0; c < num_components; ++c) U(i, c) = v[static_cast<std::size_t>(c)];
    }
  }
  return s;
}

double element_l2_diff_sq(const FieldState& a, const FieldState& b, int element,
                          const ElementOperators& ops, ComponentRange range) {
  const auto [first, last] = resolve(a, range);
  const Mat diff = a.element_matrix(element).middleCols(first, last - first) -
                   b.element_matrix(element).middleCols(first, last - first);
  const Mat q = ops.vol_interp() * diff;
  double sum = 0.0;
  for (Eigen::Index c = 0; c < q.cols(); ++c) {
    sum += ops.vol_weights().dot(q.col(c).cwiseAbs2());
  }
  return sum;
}

double l2_diff(const FieldState& a, const FieldState& b, const ElementOperators& ops,
               ComponentRange range) {
  double sum = 0.0;
  for (int e = 0; e < a.num_elements(); ++e) sum += element_l2_diff_sq(a, b, e, ops, range);
  return std::sqrt(sum);
}

double l2_norm(const FieldState& state, const ElementOperators& ops, ComponentRange range) {
  const auto [first, last] = resolve(state, range);
  double sum = 0.0;
  for (int e = 0; e < state.num_elements(); ++e) {
    const Mat q = ops.vol_interp() * state.element_matrix(e).middleCols(first, last - first);
    for (Eigen::Index c = 0; c < q.cols(); ++c) {
      sum += ops.vol_weights().dot(q.col(c).cwiseAbs2());
    }
  }
  return std::sqrt(sum);
}

double l2_error(const FieldState& state, const FieldFunction& exact, const StructuredMesh& mesh,
                const ElementOperators& ops, ComponentRange range) {
  const auto [first, last] = resolve(state, range);
  double sum = 0.0;
  for (int e = 0; e < state.num_elements(); ++e) {
    const auto pts = ops.quad_points(mesh, e);
    const Mat q = ops.vol_interp() * state.element_matrix(e);
    for (int i = 0; i < ops.num_quad(); ++i) {
      const Values v = exact(pts[static_cast<std::size_t>(i)]);
      double local = 0.0;
      for (int c = first; c < last; ++c) {
        const double d = q(i, c) - v[static_cast<std::size_t>(c)];
        local += d * d;
      }
      sum += ops.vol_weights()(i) * local;
    }
  }
  return std::sqrt(sum);
}

namespace {

Mat boundary_mass(const ElementOperators& ops) {
  Mat B = Mat::Zero(ops.num_nodes(), ops.num_nodes());
  for (int f = 0; f < ops.num_faces(); ++f) {
    const Mat& E = ops.face_interp(f);
    B += E.transpose() * ops.face_weights(f).asDiagonal() * E;
  }
  return B;
}

}  // namespace

double trace_inequality_constant(const ElementOperators& ops) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> eig(boundary_mass(ops), ops.mass(),
                                                    Eigen::EigenvaluesOnly);
  const double lambda_max = eig.eigenvalues().maxCoeff();
  const int p = ops.order();
  return ops.dim() * (p + 1.0) * (p + 2.0) / (2.0 * ops.h()[0] * lambda_max);
}

double trace_to_volume_ratio(const ElementOperators& ops, const Vec& v) {
  const Mat B = boundary_mass(ops);
  return v.dot(B * v) / v.dot(ops.mass() * v);
}

}  // namespace ihdg
