#include "rfi/geodesics.hpp"

#include <cmath>
#include <limits>

#include "rfi/errors.hpp"

namespace rfi {

namespace {

struct FlowState {
  Vec x;
  Vec v;
  Mat frame;  // empty when transport is not requested
};

Christoffel connection_along(const ManifoldChart& chart, const Vec& coords) {
  const ChartPoint p{coords};
  if (!chart.contains(p))
    throw Error(ErrorCode::LeftChart, chart.name() + ": geodesic left the chart");
  return chart.christoffel_at(p);
}

FlowState rate(const ManifoldChart& chart, const FlowState& s) {
  const int n = static_cast<int>(s.x.size());
  const Christoffel gamma = connection_along(chart, s.x);
  FlowState d{s.v, Vec::Zero(n), Mat()};
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) acc += gamma(k, i, j) * s.v[i] * s.v[j];
    d.v[k] = -acc;
  }
  if (s.frame.size() != 0) {
    d.frame = Mat::Zero(n, n);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        double coeff = 0.0;
        for (int i = 0; i < n; ++i) coeff += gamma(k, i, j) * s.v[i];
        if (coeff != 0.0) d.frame.row(k) -= coeff * s.frame.row(j);
      }
  }
  return d;
}

FlowState axpy(const FlowState& s, double h, const FlowState& d) {
  FlowState out{s.x + h * d.x, s.v + h * d.v, Mat()};
  if (s.frame.size() != 0) out.frame = s.frame + h * d.frame;
  return out;
}

void rk4_step(const ManifoldChart& chart, FlowState& s, double h) {
  const FlowState k1 = rate(chart, s);
  const FlowState k2 = rate(chart, axpy(s, 0.5 * h, k1));
  const FlowState k3 = rate(chart, axpy(s, 0.5 * h, k2));
  const FlowState k4 = rate(chart, axpy(s, h, k3));
  const double w = h / 6.0;
  s.x += w * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x);
  s.v += w * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
  if (s.frame.size() != 0) s.frame += w * (k1.frame + 2.0 * k2.frame + 2.0 * k3.frame + k4.frame);
}

void require_steps(int steps) {
  if (steps < kMinGeodesicSteps)
    throw Error(ErrorCode::ConfigError, "geodesic integration needs at least 8 steps");
}

void require_within_injectivity(const ManifoldChart& chart, const ChartPoint& x, const Vec& xi,
                                double t_final) {
  const double len = norm(chart, TangentVector{x, xi}) * std::abs(t_final);
  const double inj = chart.inj_radius_at(x);
  if (!(len < inj))
    throw Error(ErrorCode::OutsideInjectivity,
                chart.name() + ": |xi| = " + std::to_string(len) + " >= inj radius " + std::to_string(inj));
}

}  // namespace

GeodesicPath exp_map(const ManifoldChart& chart, const ChartPoint& x, const TangentVector& xi,
                     int steps, double t_final) {
  require_steps(steps);
  if (xi.base.coords != x.coords)
    throw Error(ErrorCode::BaseMismatch, "exp_map: tangent vector not based at x");
  require_within_injectivity(chart, x, xi.comps, t_final);

  GeodesicPath path;
  path.t_final = t_final;
  path.step_count = steps;
  path.states.reserve(static_cast<std::size_t>(steps) + 1);
  FlowState s{x.coords, xi.comps, Mat()};
  path.states.push_back({ChartPoint{s.x}, s.v});
  const double h = t_final / steps;
  for (int i = 0; i < steps; ++i) {
    rk4_step(chart, s, h);
    path.states.push_back({ChartPoint{s.x}, s.v});
  }
  if (!chart.contains(ChartPoint{s.x}))
    throw Error(ErrorCode::LeftChart, chart.name() + ": geodesic endpoint outside the chart");
  return path;
}

namespace {

FlowEndpoint integrate_flow(const ManifoldChart& chart, const ChartPoint& x, const Vec& xi, int steps,
                            double t_final, bool with_transport) {
  require_steps(steps);
  require_within_injectivity(chart, x, xi, t_final);
  const int n = chart.dim();
  FlowState s{x.coords, xi, with_transport ? Mat(Mat::Identity(n, n)) : Mat()};
  const double h = t_final / steps;
  for (int i = 0; i < steps; ++i) rk4_step(chart, s, h);
  if (!chart.contains(ChartPoint{s.x}))
    throw Error(ErrorCode::LeftChart, chart.name() + ": geodesic endpoint outside the chart");
  return FlowEndpoint{ChartPoint{s.x}, s.v, s.frame};
}

}  // namespace

FlowEndpoint flow_with_transport(const ManifoldChart& chart, const ChartPoint& x, const Vec& xi,
                                 int steps, double t_final) {
  return integrate_flow(chart, x, xi, steps, t_final, true);
}

FlowEndpoint flow_endpoint(const ManifoldChart& chart, const ChartPoint& x, const Vec& xi, int steps,
                           double t_final) {
  return integrate_flow(chart, x, xi, steps, t_final, false);
}

double geodesic_flow_compose_check(const ManifoldChart& chart, const ChartPoint& x,
                                   const TangentVector& eta, double t, double s, int steps) {
  // First leg lands on gamma_s with velocity gamma'_s; the second leg
  // restarts from exactly that integrated state.
  const GeodesicPath first = exp_map(chart, x, eta, steps, s);
  const GeodesicState& mid = first.end();
  const GeodesicPath second = exp_map(chart, mid.position, TangentVector{mid.position, mid.velocity}, steps, t);
  const GeodesicPath direct = exp_map(chart, x, eta, steps, t + s);
  return chart.displacement(direct.end().position, second.end().position).norm();
}

CutoffProfile::CutoffProfile(double sharpness) : sharpness_(sharpness) {
  if (!(sharpness > 0.0)) throw Error(ErrorCode::ConfigError, "cutoff sharpness must be positive");
}

double CutoffProfile::operator()(double t) const {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  const double s = t - 1.0;
  const double rising = std::exp(-sharpness_ / s);
  const double falling = std::exp(-sharpness_ / (1.0 - s));
  return falling / (rising + falling);
}

CutoffWindow make_window(const ManifoldChart& chart, const ChartPoint& x, double epsilon_cap,
                         CutoffProfile profile) {
  if (!(epsilon_cap > 0.0)) throw Error(ErrorCode::ConfigError, "epsilon cap must be positive");
  const double inj = chart.inj_radius_at(x);
  if (!(inj > 0.0)) throw Error(ErrorCode::ZeroInjectivityRadius, chart.name() + ": zero injectivity radius");
  const double eps = std::isinf(inj) ? epsilon_cap : std::min(epsilon_cap, 0.5 * kWindowSafety * inj);
  return CutoffWindow{eps, profile};
}

double chart_epsilon_limit(const ManifoldChart& chart, const ChartPoint& x) {
  const double margin = chart.chart_margin_at(x);
  if (std::isinf(margin)) return std::numeric_limits<double>::infinity();
  return 0.5 * kWindowSafety * margin;
}

}  // namespace rfi
