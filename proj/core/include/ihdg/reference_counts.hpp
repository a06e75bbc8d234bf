#pragma once

#include <optional>

namespace ihdg {

/// Published iteration counts of the reference experiments. A value of
/// kDiverged marks a configuration reported as divergent; std::nullopt means
/// the configuration was not reported.
inline constexpr int kDiverged = -1;

/// Steady diagonal transport, iHDG-II, exact-solution stopping rule.
/// N elements per direction: 2D N in {4, 8, 16, 32}, 3D N in {2, 4, 8, 16}.
std::optional<int> reported_transport_iterations(int dim, int N, int p);

/// Shallow-water standing wave, Crank-Nicolson, Nel = N^2 in {16, 64, 256, 1024}.
std::optional<int> reported_sw_iterations(int nel, int p, double dt, bool ihdg2);

/// 3D convection-diffusion, h in {0.5, 0.25, 0.125, 0.0625}, kappa in {1e-2, 1e-3, 1e-6}.
std::optional<int> reported_cdr_iterations(double h, int p, double kappa, bool ihdg2);

/// Elliptic iHDG-II iteration ratio k(p) / k(1) on mesh level 1..3 (coarse to fine), p in {2, 3, 4}.
std::optional<double> reported_elliptic_p_ratio(int p, int level);

/// Shallow-water iHDG-II ratio k(p) / k(1) at dt = 0.1 on mesh level 1..4, p in {2, 3, 4}.
std::optional<double> reported_sw_p_ratio(int p, int level);

}  // namespace ihdg
