#include "rfi/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "rfi/errors.hpp"

namespace rfi::zoo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec filled(int n, double v) { return Vec::Constant(n, v); }

Mat identity(int n) { return Mat::Identity(n, n); }

// Unit-sphere embedding helpers for the (theta, phi) chart.
struct SphereFrame {
  Eigen::Vector3d p, e_theta, e_phi;
  double sin_theta;
};

SphereFrame sphere_frame(double theta, double phi) {
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  return SphereFrame{Eigen::Vector3d(st * cp, st * sp, ct), Eigen::Vector3d(ct * cp, ct * sp, -st),
                     Eigen::Vector3d(-sp, cp, 0.0), st};
}

Eigen::Vector3d sphere_embed_tangent(const SphereFrame& f, const Vec& comps) {
  return comps[0] * f.e_theta + comps[1] * f.sin_theta * f.e_phi;
}

Vec sphere_chart_tangent(const SphereFrame& f, const Eigen::Vector3d& w) {
  Vec out(2);
  out << w.dot(f.e_theta), w.dot(f.e_phi) / f.sin_theta;
  return out;
}

ClosedFormGeodesics sphere_oracles() {
  ClosedFormGeodesics o;
  // Radius drops out: chart components of a velocity sweep the same angle on
  // every round sphere.
  o.exp = [](const ChartPoint& x, const Vec& xi) {
    const SphereFrame f = sphere_frame(x.coords[0], x.coords[1]);
    const Eigen::Vector3d v = sphere_embed_tangent(f, xi);
    const double angle = v.norm();
    Eigen::Vector3d q = f.p;
    if (angle > 0.0) q = std::cos(angle) * f.p + std::sin(angle) * v / angle;
    ChartPoint out{Vec(2)};
    out.coords[0] = std::acos(std::clamp(q.z(), -1.0, 1.0));
    double phi = std::atan2(q.y(), q.x());
    if (phi < 0.0) phi += kTwoPi;
    out.coords[1] = phi;
    return out;
  };
  o.transport_to_base = [exp = o.exp](const ChartPoint& x, const Vec& xi) {
    const SphereFrame f = sphere_frame(x.coords[0], x.coords[1]);
    const Eigen::Vector3d v = sphere_embed_tangent(f, xi);
    const double angle = v.norm();
    if (angle == 0.0) return identity(2);
    const Eigen::Vector3d d = v / angle;
    const Eigen::Vector3d n = f.p.cross(d);
    const Eigen::Vector3d d_end = -std::sin(angle) * f.p + std::cos(angle) * d;
    const ChartPoint y = exp(x, xi);
    const SphereFrame g = sphere_frame(y.coords[0], y.coords[1]);
    Mat m(2, 2);
    for (int col = 0; col < 2; ++col) {
      Vec e = Vec::Zero(2);
      e[col] = 1.0;
      const Eigen::Vector3d w = sphere_embed_tangent(g, e);
      const Eigen::Vector3d back = w.dot(d_end) * d + w.dot(n) * n;
      m.col(col) = sphere_chart_tangent(f, back);
    }
    return m;
  };
  return o;
}

ClosedFormGeodesics poincare_oracles() {
  using C = std::complex<double>;
  ClosedFormGeodesics o;
  // Conjugate by the disk automorphism moving x to the origin, where
  // geodesics are diameters and exp_0(v) = tanh(|v|) v / |v|.
  o.exp = [](const ChartPoint& x, const Vec& xi) {
    const C y(x.coords[0], x.coords[1]);
    const C v = C(xi[0], xi[1]) / (1.0 - std::norm(y));
    const double len = std::abs(v);
    const C z = len > 0.0 ? std::tanh(len) * v / len : C(0.0);
    const C q = (z + y) / (1.0 + std::conj(y) * z);
    ChartPoint out{Vec(2)};
    out.coords << q.real(), q.imag();
    return out;
  };
  // Along a diameter a vector keeps its Euclidean direction and scales by
  // 1 - |z|^2; pulling back through the automorphism gives the complex factor
  // (1 - |z|^2) / (1 + conj(y) z)^2 for the outward map.
  o.transport_to_base = [](const ChartPoint& x, const Vec& xi) {
    const C y(x.coords[0], x.coords[1]);
    const C v = C(xi[0], xi[1]) / (1.0 - std::norm(y));
    const double len = std::abs(v);
    const C z = len > 0.0 ? std::tanh(len) * v / len : C(0.0);
    const C outward = (1.0 - std::norm(z)) / ((1.0 + std::conj(y) * z) * (1.0 + std::conj(y) * z));
    const C back = 1.0 / outward;
    Mat m(2, 2);
    m << back.real(), -back.imag(), back.imag(), back.real();
    return m;
  };
  return o;
}

ClosedFormGeodesics flat_oracles(int n) {
  ClosedFormGeodesics o;
  o.exp = [](const ChartPoint& x, const Vec& xi) { return ChartPoint{x.coords + xi}; };
  o.transport_to_base = [n](const ChartPoint&, const Vec&) { return identity(n); };
  return o;
}

}  // namespace

ManifoldChart euclidean(int n) {
  if (n < 1 || n > kMaxDim) throw Error(ErrorCode::UnknownManifold, "euclidean dimension out of range");
  ChartDefinition def;
  def.name = "euclidean";
  def.dim = n;
  def.bounds = {filled(n, -kInf), filled(n, kInf)};
  def.periods.assign(static_cast<std::size_t>(n), std::nullopt);
  def.metric = [n](const Vec&) { return identity(n); };
  def.christoffel = [n](const Vec&) { return Christoffel(n); };
  def.inj_radius = [](const Vec&) { return kInf; };
  def.oracles = flat_oracles(n);
  return ManifoldChart(std::move(def));
}

ManifoldChart flat_torus(const std::vector<double>& periods) {
  const int n = static_cast<int>(periods.size());
  if (n < 1 || n > kMaxDim) throw Error(ErrorCode::UnknownManifold, "flat_torus dimension out of range");
  ChartDefinition def;
  def.name = "flat_torus";
  def.dim = n;
  def.bounds = {Vec::Zero(n), Vec(n)};
  double shortest = kInf;
  for (int i = 0; i < n; ++i) {
    const double p = periods[static_cast<std::size_t>(i)];
    if (!(p > 0.0)) throw Error(ErrorCode::UnknownManifold, "flat_torus periods must be positive");
    def.bounds.hi[i] = p;
    def.periods.emplace_back(p);
    shortest = std::min(shortest, p);
  }
  def.metric = [n](const Vec&) { return identity(n); };
  def.christoffel = [n](const Vec&) { return Christoffel(n); };
  def.inj_radius = [shortest](const Vec&) { return 0.5 * shortest; };
  def.oracles = flat_oracles(n);
  return ManifoldChart(std::move(def));
}

ManifoldChart sphere2(double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::UnknownManifold, "sphere2 radius must be positive");
  ChartDefinition def;
  def.name = "sphere2";
  def.dim = 2;
  def.bounds.lo = Vec(2);
  def.bounds.hi = Vec(2);
  def.bounds.lo << kSpherePoleMargin, 0.0;
  def.bounds.hi << kPi - kSpherePoleMargin, kTwoPi;
  def.periods = {std::nullopt, kTwoPi};
  const double r2 = radius * radius;
  def.metric = [r2](const Vec& x) {
    const double s = std::sin(x[0]);
    Mat g = Mat::Zero(2, 2);
    g(0, 0) = r2;
    g(1, 1) = r2 * s * s;
    return g;
  };
  def.christoffel = [](const Vec& x) {
    const double s = std::sin(x[0]), c = std::cos(x[0]);
    Christoffel gamma(2);
    gamma(0, 1, 1) = -s * c;
    gamma(1, 0, 1) = c / s;
    gamma(1, 1, 0) = c / s;
    return gamma;
  };
  def.inj_radius = [radius](const Vec&) { return kPi * radius; };
  def.chart_margin = [radius](const Vec& x) {
    return radius * std::min(x[0] - kSpherePoleMargin, kPi - kSpherePoleMargin - x[0]);
  };
  def.oracles = sphere_oracles();
  return ManifoldChart(std::move(def));
}

ManifoldChart poincare_disk() {
  ChartDefinition def;
  def.name = "poincare_disk";
  def.dim = 2;
  def.bounds = {filled(2, -kPoincareChartRadius), filled(2, kPoincareChartRadius)};
  def.periods = {std::nullopt, std::nullopt};
  def.metric = [](const Vec& y) {
    const double c = 2.0 / (1.0 - y.squaredNorm());
    return Mat(c * c * identity(2));
  };
  // Conformal metric e^{2 sigma} delta: Gamma^k_ij = d_i(k,i) s_j + d(k,j) s_i - d(i,j) s_k.
  def.christoffel = [](const Vec& y) {
    const double denom = 1.0 - y.squaredNorm();
    const double ds[2] = {2.0 * y[0] / denom, 2.0 * y[1] / denom};
    Christoffel gamma(2);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          gamma(k, i, j) = (k == i ? ds[j] : 0.0) + (k == j ? ds[i] : 0.0) - (i == j ? ds[k] : 0.0);
    return gamma;
  };
  def.inj_radius = [](const Vec&) { return kInf; };
  // The box contains the Euclidean disk of radius kPoincareChartRadius, and the
  // hyperbolic distance from y to that circle is 2 atanh(R) - 2 atanh(|y|).
  def.chart_margin = [](const Vec& y) {
    return std::max(0.0, 2.0 * (std::atanh(kPoincareChartRadius) - std::atanh(y.norm())));
  };
  def.oracles = poincare_oracles();
  return ManifoldChart(std::move(def));
}

ManifoldChart surface_of_revolution(RevolutionProfile profile, double c, double z_max) {
  if (!(c > 0.0) || !(z_max > 0.0))
    throw Error(ErrorCode::UnknownManifold, "surface_of_revolution parameters must be positive");
  struct Radius {
    double r, dr, ddr;
  };
  std::function<Radius(double)> shape;
  ChartDefinition def;
  def.dim = 2;
  if (profile == RevolutionProfile::catenoid) {
    def.name = "surface_of_revolution:catenoid";
    shape = [c](double z) {
      return Radius{c * std::cosh(z / c), std::sinh(z / c), std::cosh(z / c) / c};
    };
    // Meridian length from |z| to the chart edge.
    def.chart_margin = [c, z_max](const Vec& x) {
      return c * (std::sinh(z_max / c) - std::sinh(std::abs(x[0]) / c));
    };
  } else {
    def.name = "surface_of_revolution:cylinder";
    shape = [c](double) { return Radius{c, 0.0, 0.0}; };
    def.chart_margin = [z_max](const Vec& x) { return z_max - std::abs(x[0]); };
  }
  def.bounds.lo = Vec(2);
  def.bounds.hi = Vec(2);
  def.bounds.lo << -z_max, 0.0;
  def.bounds.hi << z_max, kTwoPi;
  def.periods = {std::nullopt, kTwoPi};
  def.metric = [shape](const Vec& x) {
    const Radius s = shape(x[0]);
    Mat g = Mat::Zero(2, 2);
    g(0, 0) = 1.0 + s.dr * s.dr;
    g(1, 1) = s.r * s.r;
    return g;
  };
  def.christoffel = [shape](const Vec& x) {
    const Radius s = shape(x[0]);
    const double a = 1.0 + s.dr * s.dr;
    Christoffel gamma(2);
    gamma(0, 0, 0) = s.dr * s.ddr / a;
    gamma(0, 1, 1) = -s.r * s.dr / a;
    gamma(1, 0, 1) = s.dr / s.r;
    gamma(1, 1, 0) = s.dr / s.r;
    return gamma;
  };
  // Both profiles have K <= 0, so there are no conjugate points and every
  // geodesic loop winds around the axis; the shortest such loop is the waist
  // circle of length 2 pi c.
  def.inj_radius = [c](const Vec&) { return kPi * c; };
  return ManifoldChart(std::move(def));
}

ManifoldChart by_name(const std::string& name, const std::vector<double>& params,
                      const std::string& variant) {
  auto param = [&](std::size_t i, double fallback) { return i < params.size() ? params[i] : fallback; };
  if (name == "euclidean") return euclidean(static_cast<int>(param(0, 2.0)));
  if (name == "flat_torus") return flat_torus(params.empty() ? std::vector<double>{1.0, 1.0} : params);
  if (name == "sphere2") return sphere2(param(0, 1.0));
  if (name == "poincare_disk") return poincare_disk();
  if (name == "surface_of_revolution") {
    RevolutionProfile profile;
    if (variant.empty() || variant == "catenoid") {
      profile = RevolutionProfile::catenoid;
    } else if (variant == "cylinder") {
      profile = RevolutionProfile::cylinder;
    } else {
      throw Error(ErrorCode::UnknownManifold, "unknown revolution profile '" + variant + "'");
    }
    return surface_of_revolution(profile, param(0, 1.0), param(1, 1.5));
  }
  throw Error(ErrorCode::UnknownManifold, "unknown manifold '" + name + "'");
}

}  // namespace rfi::zoo
