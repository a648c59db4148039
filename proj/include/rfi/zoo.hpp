#pragma once

#include <string>
#include <vector>

#include "rfi/geometry.hpp"

namespace rfi::zoo {

/// Flat R^n, n in [1, kMaxDim]. Injectivity radius +infinity.
ManifoldChart euclidean(int n);

/// R^n / (periods) with the flat metric; injectivity radius min(period)/2.
ManifoldChart flat_torus(const std::vector<double>& periods);

/// Round sphere of the given radius in (theta, phi) coordinates. The chart
/// keeps theta in [0.2, pi - 0.2] so the pole singularity never enters.
ManifoldChart sphere2(double radius = 1.0);

inline constexpr double kSpherePoleMargin = 0.2;

/// Poincare disk, g = 4 |dy|^2 / (1 - |y|^2)^2, chart box [-0.6, 0.6]^2 (corners stay inside the unit disk).
ManifoldChart poincare_disk();

inline constexpr double kPoincareChartRadius = 0.6;

enum class RevolutionProfile {
  /// r(z) = c cosh(z / c): negative curvature, waist of length 2 pi c.
  catenoid,
  /// r(z) = c: flat cylinder.
  cylinder,
};

/// Surface of revolution in (z, phi), g = diag(1 + r'(z)^2, r(z)^2),
/// z in [-z_max, z_max], phi periodic.
ManifoldChart surface_of_revolution(RevolutionProfile profile, double c = 1.0, double z_max = 1.5);

/// Name-based lookup used by the experiment config. Parameters are read from
/// `params` positionally: sphere2 {radius}, flat_torus {periods...},
/// euclidean {n}, surface_of_revolution {c, z_max} with `variant` naming the
/// profile. Throws UnknownManifold.
ManifoldChart by_name(const std::string& name, const std::vector<double>& params,
                      const std::string& variant = {});

}  // namespace rfi::zoo
