#pragma once

// Closed-form geometry written directly in the tests, independent of the
// library's own oracle hooks.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "rfi/numerics.hpp"

namespace oracle {

using V3 = Eigen::Vector3d;

inline V3 sphere_point(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

inline V3 e_theta(double theta, double phi) {
  return {std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta)};
}

// Unit vector along d/dphi.
inline V3 e_phi(double phi) { return {-std::sin(phi), std::cos(phi), 0.0}; }

// Chart components (theta, phi) -> ambient vector.
inline V3 sphere_push(double theta, double phi, double vt, double vp) {
  return vt * e_theta(theta, phi) + vp * std::sin(theta) * e_phi(phi);
}

// Ambient tangent vector at (theta, phi) -> chart components.
inline rfi::Vec sphere_pull(double theta, double phi, const V3& w) {
  rfi::Vec c(2);
  c << w.dot(e_theta(theta, phi)), w.dot(e_phi(phi)) / std::sin(theta);
  return c;
}

inline rfi::Vec sphere_chart(const V3& p) {
  rfi::Vec c(2);
  c << std::acos(std::clamp(p.z(), -1.0, 1.0)), std::atan2(p.y(), p.x());
  return c;
}

// exp on the unit sphere, as ambient point.
inline V3 sphere_exp3(double theta, double phi, double vt, double vp) {
  const V3 p = sphere_point(theta, phi);
  const V3 v = sphere_push(theta, phi, vt, vp);
  const double r = v.norm();
  if (r == 0.0) return p;
  return std::cos(r) * p + std::sin(r) * v / r;
}

// Parallel transport of w from p to q along the minimizing great circle.
inline V3 sphere_transport(const V3& p, const V3& q, const V3& w) {
  return w - (q.dot(w) / (1.0 + p.dot(q))) * (p + q);
}

// Wrap an angle difference to (-pi, pi].
inline double angle_diff(double a, double b) {
  double d = std::fmod(a - b, rfi::kTwoPi);
  if (d > rfi::kPi) d -= rfi::kTwoPi;
  if (d <= -rfi::kPi) d += rfi::kTwoPi;
  return d;
}

}  // namespace oracle
