#pragma once

#include <array>
#include <memory>
#include <random>
#include <span>

#include "ihdg/iteration.hpp"

namespace ihdg::test {

struct Setup {
  StructuredMesh mesh;
  ElementOperators ops;
};

inline std::unique_ptr<Setup> make_setup(const ProblemSpec& problem, int dim, int N, int p) {
  const std::array<int, 3> cells{N, N, N};
  auto mesh = build_mesh(dim, std::span<const int>(cells.data(), static_cast<std::size_t>(dim)));
  auto ops = build_operators(p, dim, mesh.h());
  auto bound = bind_boundary(std::move(mesh), problem, ops);
  return std::make_unique<Setup>(Setup{std::move(bound), std::move(ops)});
}

inline FieldState random_state(int elements, int components, int nodes, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  FieldState s(elements, components, nodes);
  for (double& v : s.data()) v = d(rng);
  return s;
}

inline double dot(const Vec& a, const Vec& b, const Vec& w) { return (a.array() * b.array() * w.array()).sum(); }

}  // namespace ihdg::test
