#pragma once

#include <vector>

#include "rfi/geometry.hpp"

namespace rfi {

struct GeodesicState {
  ChartPoint position;
  Vec velocity;
};

/// States at uniform parameter steps on [0, t_final]; positions are left
/// unwrapped so consecutive states stay continuous across periodic seams.
struct GeodesicPath {
  std::vector<GeodesicState> states;
  double t_final = 1.0;
  int step_count = 0;

  const GeodesicState& start() const { return states.front(); }
  const GeodesicState& end() const { return states.back(); }
};

inline constexpr int kMinGeodesicSteps = 8;

/// RK4 solution of gamma'' + Gamma(gamma', gamma') = 0 with gamma(0) = x,
/// gamma'(0) = xi over [0, t_final]. The endpoint at t_final = 1 is exp_x(xi).
/// Throws OutsideInjectivity when |xi| >= inj radius, LeftChart when the path
/// leaves the chart.
GeodesicPath exp_map(const ManifoldChart& chart, const ChartPoint& x, const TangentVector& xi,
                     int steps, double t_final = 1.0);

/// Endpoint plus the outward parallel-transport matrix (tangent components at
/// x to tangent components at the endpoint), integrated jointly with the same
/// RK4 steps as exp_map. No path storage.
struct FlowEndpoint {
  ChartPoint position;
  Vec velocity;
  Mat outward_transport;
};

FlowEndpoint flow_with_transport(const ManifoldChart& chart, const ChartPoint& x, const Vec& xi,
                                 int steps, double t_final = 1.0);

/// Endpoint only (outward_transport left empty); the geodesic arithmetic is
/// identical to flow_with_transport.
FlowEndpoint flow_endpoint(const ManifoldChart& chart, const ChartPoint& x, const Vec& xi, int steps,
                           double t_final = 1.0);

/// Chart distance between exp_{gamma_s}(t gamma'_s) and gamma_{t+s}, where
/// gamma is the geodesic from x with velocity eta.
double geodesic_flow_compose_check(const ManifoldChart& chart, const ChartPoint& x,
                                   const TangentVector& eta, double t, double s, int steps);

/// Smoothed step built from f(s) = exp(-sharpness / s): identically 1 on
/// [0, 1], identically 0 on [2, inf), C-infinity and nonincreasing between.
class CutoffProfile {
 public:
  explicit CutoffProfile(double sharpness = 2.0);

  double operator()(double t) const;
  double sharpness() const { return sharpness_; }

 private:
  double sharpness_;
};

struct CutoffWindow {
  double epsilon = 1.0;
  CutoffProfile profile;

  /// chi(|xi| / epsilon) for a tangent vector of g-norm `norm`.
  double value(double norm) const { return profile(norm / epsilon); }
  double support_radius() const { return 2.0 * epsilon; }
};

inline constexpr double kWindowSafety = 0.99;

/// epsilon = min(epsilon_cap, safety * inj_radius(x) / 2).
/// Throws ZeroInjectivityRadius.
CutoffWindow make_window(const ManifoldChart& chart, const ChartPoint& x, double epsilon_cap,
                         CutoffProfile profile = CutoffProfile{});

/// Largest epsilon whose 2*epsilon ball stays inside the chart box:
/// safety * chart_margin(x) / 2. Infinite for unbounded charts.
double chart_epsilon_limit(const ManifoldChart& chart, const ChartPoint& x);

}  // namespace rfi
