#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "support.hpp"

using namespace ihdg;

TEST_CASE("structured mesh counts and connectivity") {
  for (int dim : {1, 2, 3}) {
    CAPTURE(dim);
    const std::array<int, 3> cells{3, 4, 2};
    const auto mesh = build_mesh(dim, std::span<const int>(cells.data(), static_cast<std::size_t>(dim)));
    int nel = 1;
    int faces = 0;
    for (int a = 0; a < dim; ++a) nel *= cells[static_cast<std::size_t>(a)];
    for (int a = 0; a < dim; ++a) faces += nel / cells[static_cast<std::size_t>(a)] * (cells[static_cast<std::size_t>(a)] + 1);
    CHECK(mesh.num_elements() == nel);
    CHECK(static_cast<int>(mesh.faces().size()) == faces);
    for (int e = 0; e < nel; ++e) {
      CHECK(mesh.element_id(mesh.element_index(e)) == e);
      for (int f = 0; f < mesh.faces_per_element(); ++f) {
        const int nb = mesh.neighbor(e, f);
        if (nb >= 0) CHECK(mesh.neighbor(nb, f ^ 1) == e);
      }
    }
    for (const auto& face : mesh.faces()) {
      double len = 0.0;
      for (double c : face.normal) len += c * c;
      CHECK(std::abs(std::sqrt(len) - 1.0) < 1e-14);
    }
  }
}

TEST_CASE("element indices run x fastest") {
  const std::array<int, 3> cells{3, 2, 1};
  const auto mesh = build_mesh(2, std::span<const int>(cells.data(), 2));
  CHECK(mesh.element_index(4) == std::array<int, 3>{1, 1, 0});
  CHECK(mesh.meshsize() == doctest::Approx(0.5));
}

TEST_CASE("binding a problem tags every boundary face exactly once") {
  for (const auto& name : preset_names()) {
    CAPTURE(name);
    const Preset preset = make_preset(name);
    const int dim = problem_dim(preset.problem);
    const auto s = test::make_setup(preset.problem, dim, 3, 1);
    for (const auto& face : s->mesh.faces()) {
      if (face.is_boundary()) {
        CHECK(face.tag != BoundaryTag::none);
      } else {
        CHECK(face.tag == BoundaryTag::none);
      }
    }
  }
  const Preset tr = make_preset("transport2d_diag");
  const auto s = test::make_setup(tr.problem, 2, 2, 1);
  for (const auto& face : s->mesh.faces()) {
    if (!face.is_boundary()) continue;
    // beta = (1, 1): inflow on the low faces
    const bool low = face.normal[0] + face.normal[1] < 0.0;
    CHECK(face.tag == (low ? BoundaryTag::inflow : BoundaryTag::outflow));
  }
}

TEST_CASE("Gauss-Legendre rules integrate degree 2n-1 exactly") {
  for (int n = 1; n <= 8; ++n) {
    const auto q = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += q.weights[static_cast<std::size_t>(i)] * std::pow(q.points[static_cast<std::size_t>(i)], k);
      const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("Gauss-Lobatto nodes and Legendre values") {
  const auto n3 = gauss_lobatto_nodes(3);
  CHECK(n3[0] == doctest::Approx(-1.0));
  CHECK(n3[1] == doctest::Approx(0.0));
  const auto n4 = gauss_lobatto_nodes(4);
  CHECK(n4[2] == doctest::Approx(1.0 / std::sqrt(5.0)));
  const auto [p2, d2] = legendre(2, 0.5);
  CHECK(p2 == doctest::Approx(-0.125));
  CHECK(d2 == doctest::Approx(1.5));
}

TEST_CASE("Lagrange basis reproduces polynomials and their derivatives") {
  const auto nodes = gauss_lobatto_nodes(5);
  const std::vector<double> x{-0.9, -0.3, 0.2, 0.77};
  const Mat L = lagrange_matrix(nodes, x);
  const Mat D = lagrange_derivative_matrix(nodes, x);
  Vec f(5);
  for (int i = 0; i < 5; ++i) f[i] = std::pow(nodes[static_cast<std::size_t>(i)], 4) - nodes[static_cast<std::size_t>(i)];
  for (std::size_t k = 0; k < x.size(); ++k) {
    CHECK((L * f)[static_cast<Eigen::Index>(k)] == doctest::Approx(std::pow(x[k], 4) - x[k]));
    CHECK((D * f)[static_cast<Eigen::Index>(k)] == doctest::Approx(4 * std::pow(x[k], 3) - 1.0));
  }
}

TEST_CASE("element operators integrate and differentiate polynomials exactly") {
  for (int dim : {2, 3}) {
    for (int p : {1, 3}) {
      CAPTURE(dim);
      CAPTURE(p);
      const Point h{0.25, 0.5, 0.125};
      const auto ops = build_operators(p, dim, h);
      double vol = 1.0;
      for (int a = 0; a < dim; ++a) vol *= h[static_cast<std::size_t>(a)];
      CHECK(ops.mass().sum() == doctest::Approx(vol));
      CHECK(ops.vol_weights().sum() == doctest::Approx(vol));
      const std::array<int, 3> cells{4, 2, 8};
      const auto mesh = build_mesh(dim, std::span<const int>(cells.data(), static_cast<std::size_t>(dim)));
      const int e = mesh.num_elements() - 1;
      const auto xn = ops.node_points(mesh, e);
      const auto xq = ops.quad_points(mesh, e);
      auto f = [p](const Point& x) { return std::pow(x[0], p) + 2.0 * x[1] * std::pow(x[0], p - 1); };
      Vec fn(ops.num_nodes());
      for (int i = 0; i < ops.num_nodes(); ++i) fn[i] = f(xn[static_cast<std::size_t>(i)]);
      const Vec fq = ops.vol_interp() * fn;
      const Vec gx = ops.vol_grad(0) * fn;
      for (int q = 0; q < ops.num_quad(); ++q) {
        const Point& x = xq[static_cast<std::size_t>(q)];
        CHECK(fq[q] == doctest::Approx(f(x)));
        const double dfx = p * std::pow(x[0], p - 1) + (p > 1 ? 2.0 * (p - 1) * x[1] * std::pow(x[0], p - 2) : 0.0);
        CHECK(gx[q] == doctest::Approx(dfx));
      }
      double area = 0.0;
      for (int f2 = 0; f2 < ops.num_faces(); ++f2) area += ops.face_weights(f2).sum();
      double expect = 0.0;
      for (int a = 0; a < dim; ++a) expect += 2.0 * vol / h[static_cast<std::size_t>(a)];
      CHECK(area == doctest::Approx(expect));
    }
  }
}

TEST_CASE("both sides of an interior face see the same quadrature points") {
  const std::array<int, 3> cells{3, 3, 3};
  const auto mesh = build_mesh(3, std::span<const int>(cells.data(), 3));
  const auto ops = build_operators(2, 3, mesh.h());
  for (int f = 0; f < 6; ++f) {
    const int e = 13;
    const int nb = mesh.neighbor(e, f);
    const auto a = ops.face_quad_points(mesh, e, f);
    const auto b = ops.face_quad_points(mesh, nb, f ^ 1);
    for (std::size_t q = 0; q < a.size(); ++q) {
      for (int c = 0; c < 3; ++c) CHECK(a[q][static_cast<std::size_t>(c)] == doctest::Approx(b[q][static_cast<std::size_t>(c)]));
    }
  }
}

TEST_CASE("trace inequality constant bounds the trace of every polynomial") {
  for (int dim : {2, 3}) {
    for (int p : {1, 2, 4}) {
      const double h = 0.25;
      const auto ops = build_operators(p, dim, {h, h, h});
      const double c = trace_inequality_constant(ops);
      CHECK(c > 0.0);
      const double bound = dim * (p + 1.0) * (p + 2.0) / (2.0 * c * h);
      std::mt19937 rng(5);
      std::uniform_real_distribution<double> d(-1.0, 1.0);
      double worst = 0.0;
      for (int k = 0; k < 50; ++k) {
        Vec v(ops.num_nodes());
        for (int i = 0; i < v.size(); ++i) v[i] = d(rng);
        worst = std::max(worst, trace_to_volume_ratio(ops, v));
      }
      CHECK(worst <= bound * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("projection is exact on the polynomial space and L2 norms agree") {
  const std::array<int, 3> cells{2, 3, 1};
  const auto mesh = build_mesh(2, std::span<const int>(cells.data(), 2));
  const auto ops = build_operators(2, 2, mesh.h());
  auto f = [](const Point& x) { return Values{x[0] * x[1] + x[0] * x[0], 1.0, 0.0, 0.0}; };
  const FieldState s = project(f, 2, mesh, ops);
  CHECK(l2_error(s, f, mesh, ops) < 1e-13);
  // integral of 1 over the unit square
  CHECK(l2_norm(s, ops, {1, 1}) == doctest::Approx(1.0));
  // integral of (xy + x^2)^2: 1/9 + 2/8 + 1/5
  CHECK(l2_norm(s, ops, {0, 1}) == doctest::Approx(std::sqrt(1.0 / 9 + 0.25 + 0.2)));
}
