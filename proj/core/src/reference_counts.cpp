#include "ihdg/reference_counts.hpp"

#include <array>
#include <cmath>

namespace ihdg {

namespace {

constexpr int X = kDiverged;

// [p-1][level]
constexpr int kTransport2D[4][4] = {{9, 17, 33, 65}, {9, 17, 33, 65}, {9, 17, 33, 65}, {9, 17, 33, 64}};
constexpr int kTransport3D[4][4] = {{6, 12, 23, 47}, {6, 12, 23, 47}, {7, 12, 23, 47}, {6, 12, 24, 48}};

// [p-1][level] -> iHDG-I dt=0.1, iHDG-I dt=0.01, iHDG-II dt=0.1, iHDG-II dt=0.01
constexpr int kShallowWater[4][4][4] = {
    {{19, 6, 14, 6}, {X, 6, 18, 9}, {X, 7, 32, 10}, {X, 9, 59, 8}},
    {{X, 9, 15, 9}, {X, 11, 19, 9}, {X, 13, 32, 11}, {X, 15, 59, 12}},
    {{X, 7, 16, 8}, {X, 9, 20, 8}, {X, 12, 31, 10}, {X, X, 59, 12}},
    {{X, 10, 17, 9}, {X, 12, 32, 10}, {X, X, 60, 9}, {X, X, 112, 13}},
};

// [p-1][level] -> iHDG-I kappa = 1e-2, 1e-3, 1e-6, then iHDG-II
constexpr int kConvectionDiffusion[4][4][6] = {
    {{24, 23, 23, 17, 17, 17}, {30, 34, 35, 25, 25, 26}, {50, 55, 56, 35, 37, 38}, {90, 94, 97, 62, 64, 65}},
    {{26, 24, 25, 17, 19, 19}, {41, 42, 42, 27, 27, 27}, {66, 67, 67, 42, 43, 43}, {X, 109, 110, 67, 70, 71}},
    {{27, 31, 31, 19, 19, 19}, {33, 33, 38, 24, 26, 27}, {X, 58, 60, 38, 39, 41}, {X, 102, 106, 69, 69, 71}},
    {{26, 27, 27, 17, 19, 19}, {50, 41, 43, 26, 27, 27}, {X, 71, 72, 42, 45, 46}, {X, 123, 125, 73, 78, 79}},
};

constexpr double kEllipticRatio[3][3] = {{2.41, 2.11, 2.03}, {4.07, 3.55, 3.17}, {6.09, 5.23, 4.81}};
constexpr double kShallowWaterRatio[3][4] = {{1.07, 1.06, 1.0, 1.0}, {1.14, 1.11, 0.97, 1.0}, {1.21, 1.78, 1.87, 1.9}};

int level_of(int value, std::array<int, 4> levels) {
  for (int i = 0; i < 4; ++i) {
    if (levels[static_cast<std::size_t>(i)] == value) return i;
  }
  return -1;
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::abs(b); }

}  // namespace

std::optional<int> reported_transport_iterations(int dim, int N, int p) {
  if (p < 1 || p > 4) return std::nullopt;
  if (dim == 2) {
    const int l = level_of(N, {4, 8, 16, 32});
    if (l < 0) return std::nullopt;
    return kTransport2D[p - 1][l];
  }
  if (dim == 3) {
    const int l = level_of(N, {2, 4, 8, 16});
    if (l < 0) return std::nullopt;
    return kTransport3D[p - 1][l];
  }
  return std::nullopt;
}

std::optional<int> reported_sw_iterations(int nel, int p, double dt, bool ihdg2) {
  if (p < 1 || p > 4) return std::nullopt;
  const int l = level_of(nel, {16, 64, 256, 1024});
  if (l < 0) return std::nullopt;
  int col;
  if (near(dt, 0.1)) {
    col = 0;
  } else if (near(dt, 0.01)) {
    col = 1;
  } else {
    return std::nullopt;
  }
  return kShallowWater[p - 1][l][(ihdg2 ? 2 : 0) + col];
}

std::optional<int> reported_cdr_iterations(double h, int p, double kappa, bool ihdg2) {
  if (p < 1 || p > 4) return std::nullopt;
  int l = -1;
  const double hs[4] = {0.5, 0.25, 0.125, 0.0625};
  for (int i = 0; i < 4; ++i) {
    if (near(h, hs[i])) l = i;
  }
  int k = -1;
  const double ks[3] = {1e-2, 1e-3, 1e-6};
  for (int i = 0; i < 3; ++i) {
    if (near(kappa, ks[i])) k = i;
  }
  if (l < 0 || k < 0) return std::nullopt;
  return kConvectionDiffusion[p - 1][l][(ihdg2 ? 3 : 0) + k];
}

std::optional<double> reported_elliptic_p_ratio(int p, int level) {
  if (p < 2 || p > 4 || level < 1 || level > 3) return std::nullopt;
  return kEllipticRatio[p - 2][level - 1];
}

std::optional<double> reported_sw_p_ratio(int p, int level) {
  if (p < 2 || p > 4 || level < 1 || level > 4) return std::nullopt;
  return kShallowWaterRatio[p - 2][level - 1];
}

}  // namespace ihdg
