#include "rfi/geometry.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rfi/errors.hpp"

namespace rfi {

namespace {

std::string describe(const ChartPoint& x) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < x.dim(); ++i) os << (i ? ", " : "") << x.coords[i];
  os << ")";
  return os.str();
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::OutOfChart: return "OutOfChart";
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::UnknownManifold: return "UnknownManifold";
    case ErrorCode::OutsideInjectivity: return "OutsideInjectivity";
    case ErrorCode::LeftChart: return "LeftChart";
    case ErrorCode::ZeroInjectivityRadius: return "ZeroInjectivityRadius";
    case ErrorCode::SingularTransport: return "SingularTransport";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::BaseMismatch: return "BaseMismatch";
    case ErrorCode::PlanMismatch: return "PlanMismatch";
    case ErrorCode::OrderTooHigh: return "OrderTooHigh";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

double pairing(const CotangentVector& lambda, const TangentVector& xi) {
  return lambda.comps.dot(xi.comps);
}

double Christoffel::symmetry_residual() const {
  double worst = 0.0;
  for (int k = 0; k < n_; ++k)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        worst = std::max(worst, std::abs((*this)(k, i, j) - (*this)(k, j, i)));
  return worst;
}

double Christoffel::max_abs_difference(const Christoffel& other) const {
  double worst = 0.0;
  for (int k = 0; k < n_; ++k)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        worst = std::max(worst, std::abs((*this)(k, i, j) - other(k, i, j)));
  return worst;
}

ManifoldChart::ManifoldChart(ChartDefinition def)
    : def_(std::make_shared<const ChartDefinition>(std::move(def))) {
  if (def_->dim < 1 || def_->dim > kMaxDim)
    throw Error(ErrorCode::UnknownManifold, "chart dimension out of range: " + def_->name);
  if (!def_->christoffel) source_ = ChristoffelSource::finite_difference;
}

ChartPoint ManifoldChart::wrap(const ChartPoint& x) const {
  ChartPoint out = x;
  for (int i = 0; i < dim(); ++i) {
    const auto& period = def_->periods[static_cast<std::size_t>(i)];
    if (!period) continue;
    const double lo = def_->bounds.lo[i];
    double r = std::fmod(out.coords[i] - lo, *period);
    if (r < 0.0) r += *period;
    out.coords[i] = lo + r;
  }
  return out;
}

bool ManifoldChart::contains(const ChartPoint& x) const {
  if (x.dim() != dim()) return false;
  const ChartPoint w = wrap(x);
  for (int i = 0; i < dim(); ++i) {
    if (!std::isfinite(w.coords[i])) return false;
    if (def_->periods[static_cast<std::size_t>(i)]) continue;
    if (w.coords[i] < def_->bounds.lo[i] || w.coords[i] > def_->bounds.hi[i]) return false;
  }
  return true;
}

Vec ManifoldChart::displacement(const ChartPoint& from, const ChartPoint& to) const {
  Vec d = to.coords - from.coords;
  for (int i = 0; i < dim(); ++i) {
    const auto& period = def_->periods[static_cast<std::size_t>(i)];
    if (!period) continue;
    d[i] -= *period * std::round(d[i] / *period);
  }
  return d;
}

void ManifoldChart::require_inside(const ChartPoint& x) const {
  if (!contains(x))
    throw Error(ErrorCode::OutOfChart, def_->name + " point " + describe(x) + " outside chart");
}

Mat ManifoldChart::raw_metric(const Vec& coords) const { return def_->metric(coords); }

Mat ManifoldChart::metric_at(const ChartPoint& x) const {
  require_inside(x);
  const Mat g = raw_metric(wrap(x).coords);
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::NotSPD, def_->name + " metric not symmetric at " + describe(x));
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorCode::NotSPD, def_->name + " metric not positive definite at " + describe(x));
  return g;
}

Mat ManifoldChart::inverse_metric_at(const ChartPoint& x) const {
  const Mat g = metric_at(x);
  return g.llt().solve(Mat::Identity(dim(), dim()));
}

Christoffel ManifoldChart::fd_christoffel(const Vec& coords) const {
  const int n = dim();
  const double h = fd_step_;
  // dg[l] = d_l g
  std::array<Mat, kMaxDim> dg;
  for (int l = 0; l < n; ++l) {
    Vec plus = coords, minus = coords;
    plus[l] += h;
    minus[l] -= h;
    dg[static_cast<std::size_t>(l)] = (raw_metric(plus) - raw_metric(minus)) / (2.0 * h);
  }
  const Mat ginv = raw_metric(coords).llt().solve(Mat::Identity(n, n));
  Christoffel gamma(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double acc = 0.0;
        for (int l = 0; l < n; ++l) {
          const double first = dg[static_cast<std::size_t>(i)](j, l) +
                               dg[static_cast<std::size_t>(j)](i, l) -
                               dg[static_cast<std::size_t>(l)](i, j);
          acc += ginv(k, l) * first;
        }
        gamma(k, i, j) = 0.5 * acc;
        gamma(k, j, i) = 0.5 * acc;
      }
  return gamma;
}

Christoffel ManifoldChart::christoffel_at(const ChartPoint& x) const {
  require_inside(x);
  const Vec coords = wrap(x).coords;
  Christoffel gamma = source_ == ChristoffelSource::closed_form ? def_->christoffel(coords)
                                                                : fd_christoffel(coords);
  if (corruption_ != 0.0) {
    const int n = dim();
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) gamma(k, i, j) *= 1.0 + corruption_;
  }
  return gamma;
}

double ManifoldChart::inj_radius_at(const ChartPoint& x) const {
  require_inside(x);
  return def_->inj_radius(wrap(x).coords);
}

double ManifoldChart::chart_margin_at(const ChartPoint& x) const {
  require_inside(x);
  if (!def_->chart_margin) return std::numeric_limits<double>::infinity();
  return def_->chart_margin(wrap(x).coords);
}

ManifoldChart ManifoldChart::with_finite_difference_christoffels(double step) const {
  ManifoldChart out = *this;
  out.source_ = ChristoffelSource::finite_difference;
  out.fd_step_ = step;
  return out;
}

ManifoldChart ManifoldChart::with_corrupted_christoffels(double scale) const {
  ManifoldChart out = *this;
  out.corruption_ = scale;
  return out;
}

double ManifoldChart::metric_compatibility_residual(const ChartPoint& x, double step) const {
  const int n = dim();
  const Christoffel gamma = christoffel_at(x);
  const Vec coords = wrap(x).coords;
  const Mat g = raw_metric(coords);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    Vec plus = coords, minus = coords;
    plus[k] += step;
    minus[k] -= step;
    const Mat dk = (raw_metric(plus) - raw_metric(minus)) / (2.0 * step);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double r = dk(i, j);
        for (int l = 0; l < n; ++l) r -= gamma(l, k, i) * g(l, j) + gamma(l, k, j) * g(i, l);
        worst = std::max(worst, std::abs(r));
      }
  }
  return worst;
}

OrthonormalFrame OrthonormalFrame::rotated(const Mat& q) const {
  return OrthonormalFrame{base, frame * q, coframe * q};
}

Mat metric_at(const ManifoldChart& chart, const ChartPoint& x) { return chart.metric_at(x); }

Christoffel christoffel_at(const ManifoldChart& chart, const ChartPoint& x) {
  return chart.christoffel_at(x);
}

OrthonormalFrame orthonormal_frame_at(const ManifoldChart& chart, const ChartPoint& x) {
  const Mat g = chart.metric_at(x);
  const Mat lower = g.llt().matrixL();
  const int n = chart.dim();
  const Mat linv = lower.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
  return OrthonormalFrame{x, linv.transpose(), lower};
}

double norm(const ManifoldChart& chart, const TangentVector& v) {
  const Mat g = chart.metric_at(v.base);
  return std::sqrt(std::max(0.0, v.comps.dot(g * v.comps)));
}

double norm(const ManifoldChart& chart, const CotangentVector& v) {
  const Mat ginv = chart.inverse_metric_at(v.base);
  return std::sqrt(std::max(0.0, v.comps.dot(ginv * v.comps)));
}

}  // namespace rfi
