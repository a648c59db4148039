#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rfi/geometry.hpp"
#include "rfi/tensor.hpp"

namespace rfi::props {

/// One invariant checked on one manifold.
struct CheckResult {
  std::string name;
  std::string manifold;
  int samples = 0;
  int failures = 0;
  double worst = 0.0;
  double tolerance = 0.0;
};

struct PropertySummary {
  std::uint64_t seed = 0;
  bool fault_injected = false;
  std::vector<CheckResult> checks;

  int total_failures() const;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  /// Replace every chart's connection by a corrupted one before checking.
  bool inject_fault = false;
  int semigroup_samples = 50;
  int derivative_samples = 20;
  int transport_samples = 20;
  int generic_samples = 5;
  int inversion_samples = 2;
};

/// Manifolds the suite runs on, with their display names.
struct ZooEntry {
  std::string label;
  ManifoldChart chart;
};
std::vector<ZooEntry> property_zoo();

/// Deterministic random draws tied to (seed, manifold index, check index).
class Sampler {
 public:
  Sampler(std::uint64_t seed, std::uint64_t manifold, std::uint64_t check);

  /// Point at least `inset` (chart units) inside every bounded axis.
  ChartPoint point(const ManifoldChart& chart, double inset = 0.15);
  /// g-unit tangent vector at x, chart components.
  Vec unit_vector(const ManifoldChart& chart, const ChartPoint& x);
  FiberValue fiber(TensorType type, int n);
  double uniform(double lo, double hi);
  std::uint64_t next_seed();
  /// Haar-distributed orthogonal n x n matrix.
  Mat orthogonal(int n);

 private:
  void draw_box(const ManifoldChart& chart, double inset, ChartPoint& p);

  std::mt19937_64 rng_;
};

/// Radius of a safe xi-ball at x: 0.9 times the admissible window support.
double safe_radius(const ManifoldChart& chart, const ChartPoint& x);

// Individual checks; the suite runs all of them, the acceptance tests pick
// the ones they need.
CheckResult check_semigroup(const ZooEntry& m, Sampler& s, int samples, int steps = 512);
CheckResult check_exp_derivative(const ZooEntry& m, Sampler& s, int p, int samples);
CheckResult check_polarization(const ZooEntry& m, Sampler& s, int p, int samples);
CheckResult check_transport_isometry(const ZooEntry& m, Sampler& s, TensorType type, int samples);
CheckResult check_metric_compatibility(const ZooEntry& m, Sampler& s, int samples);

/// |holonomy - rotation by the enclosed area| for the right-angled octant
/// triangle on the unit sphere, in the orthonormal frame at the first vertex.
double sphere_holonomy_residual(int steps = 256);

PropertySummary run_property_suite(const SuiteOptions& options);

}  // namespace rfi::props
