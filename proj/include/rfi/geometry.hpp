#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rfi/numerics.hpp"

namespace rfi {

struct ChartPoint {
  Vec coords;

  int dim() const { return static_cast<int>(coords.size()); }
};

/// Tangent vector in the chart coordinate frame.
struct TangentVector {
  ChartPoint base;
  Vec comps;
};

/// Cotangent vector in the chart coordinate coframe. Pairing with a tangent
/// vector at the same base is the plain component contraction.
struct CotangentVector {
  ChartPoint base;
  Vec comps;
};

double pairing(const CotangentVector& lambda, const TangentVector& xi);

/// Connection coefficients Gamma^k_ij, stored with fixed capacity.
class Christoffel {
 public:
  explicit Christoffel(int n = 0) : n_(n) { data_.fill(0.0); }

  int dim() const { return n_; }
  double& operator()(int k, int i, int j) { return data_[(k * kMaxDim + i) * kMaxDim + j]; }
  double operator()(int k, int i, int j) const { return data_[(k * kMaxDim + i) * kMaxDim + j]; }

  /// max |Gamma^k_ij - Gamma^k_ji|
  double symmetry_residual() const;
  double max_abs_difference(const Christoffel& other) const;

 private:
  int n_;
  std::array<double, kMaxDim * kMaxDim * kMaxDim> data_;
};

struct ChartBox {
  Vec lo;
  Vec hi;
};

enum class ChristoffelSource { closed_form, finite_difference };

/// Exact exponential map and parallel transport, available for some zoo
/// members and used only as test oracles.
struct ClosedFormGeodesics {
  /// exp_x(xi), returned wrapped into the chart.
  std::function<ChartPoint(const ChartPoint& x, const Vec& xi)> exp;
  /// Matrix sending tangent components at exp_x(xi) back to x along the
  /// radial geodesic.
  std::function<Mat(const ChartPoint& x, const Vec& xi)> transport_to_base;
};

/// The closed-form ingredients a zoo member hands to ManifoldChart.
struct ChartDefinition {
  std::string name;
  int dim = 0;
  ChartBox bounds;
  /// Per-axis period; an axis with a period wraps into [lo, lo + period).
  std::vector<std::optional<double>> periods;
  std::function<Mat(const Vec&)> metric;
  /// Empty when only finite-difference connection coefficients are available.
  std::function<Christoffel(const Vec&)> christoffel;
  std::function<double(const Vec&)> inj_radius;
  /// Lower bound on the metric distance from a point to the chart boundary
  /// (+infinity for unbounded or periodic charts).
  std::function<double(const Vec&)> chart_margin;
  std::optional<ClosedFormGeodesics> oracles;
};

/// A Riemannian manifold realized in a single chart. Immutable; copies share
/// the definition.
class ManifoldChart {
 public:
  explicit ManifoldChart(ChartDefinition def);

  const std::string& name() const { return def_->name; }
  int dim() const { return def_->dim; }
  const ChartBox& bounds() const { return def_->bounds; }
  const std::vector<std::optional<double>>& periods() const { return def_->periods; }
  ChristoffelSource christoffel_source() const { return source_; }
  double fd_step() const { return fd_step_; }
  const std::optional<ClosedFormGeodesics>& oracles() const { return def_->oracles; }

  /// Symmetric positive definite metric components g_ij. Throws OutOfChart or
  /// NotSPD.
  Mat metric_at(const ChartPoint& x) const;
  Mat inverse_metric_at(const ChartPoint& x) const;
  Christoffel christoffel_at(const ChartPoint& x) const;
  double inj_radius_at(const ChartPoint& x) const;
  double chart_margin_at(const ChartPoint& x) const;

  /// Periodic axes wrapped into their fundamental interval.
  ChartPoint wrap(const ChartPoint& x) const;
  bool contains(const ChartPoint& x) const;
  /// to - from, with periodic axes reduced to the shortest representative.
  Vec displacement(const ChartPoint& from, const ChartPoint& to) const;

  /// Same chart, connection from central differences of the metric.
  ManifoldChart with_finite_difference_christoffels(double step = 1e-4) const;
  /// Fault injection: every connection coefficient scaled by (1 + scale).
  /// Breaks metric compatibility; used to check that the property suite notices.
  ManifoldChart with_corrupted_christoffels(double scale) const;

  /// Metric compatibility residual max_{ijk} |d_k g_ij - G^l_ki g_lj - G^l_kj g_il|
  /// with d_k g from central differences of the given step.
  double metric_compatibility_residual(const ChartPoint& x, double step = 1e-5) const;

 private:
  void require_inside(const ChartPoint& x) const;
  Mat raw_metric(const Vec& coords) const;
  Christoffel fd_christoffel(const Vec& coords) const;

  std::shared_ptr<const ChartDefinition> def_;
  ChristoffelSource source_ = ChristoffelSource::closed_form;
  double fd_step_ = 1e-4;
  double corruption_ = 0.0;
};

/// Orthonormal frame at a point. Columns of `frame` are g-orthonormal tangent
/// vectors; columns of `coframe` are the dual covectors (coframe = frame^{-T}).
struct OrthonormalFrame {
  ChartPoint base;
  Mat frame;
  Mat coframe;

  /// Chart components of the tangent vector with frame coordinates c.
  Vec to_chart_vector(const Vec& c) const { return frame * c; }
  /// Chart components of the covector with coframe coordinates c.
  Vec to_chart_covector(const Vec& c) const { return coframe * c; }
  /// Same base, frame rotated by an orthogonal matrix q (frame * q).
  OrthonormalFrame rotated(const Mat& q) const;
};

Mat metric_at(const ManifoldChart& chart, const ChartPoint& x);
Christoffel christoffel_at(const ManifoldChart& chart, const ChartPoint& x);

/// Frame from the lower Cholesky factor L of g(x): frame = L^{-T}, coframe = L.
/// Deterministic for a given point.
OrthonormalFrame orthonormal_frame_at(const ManifoldChart& chart, const ChartPoint& x);

double norm(const ManifoldChart& chart, const TangentVector& v);
double norm(const ManifoldChart& chart, const CotangentVector& v);

}  // namespace rfi
