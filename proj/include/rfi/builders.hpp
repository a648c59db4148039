#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rfi/operators.hpp"
#include "rfi/section.hpp"

namespace rfi::builders {

/// A builder reference as it appears in an experiment config.
struct BuilderSpec {
  std::string name;
  std::vector<double> params;
  std::string variant;
};

/// Scalar section from a value and its chart gradient.
TensorSection scalar_section(int dim, std::function<double(const Vec&)> f, std::function<Vec(const Vec&)> grad,
                             std::string label);

/// Sections by name:
///   constant [c], zero, gaussian_bump [center..., width], sine_wave [k...]
///   (sin(2 pi k.x)), sin_cos (sin x1 cos x2), cos_theta (cos x1),
///   quadratic (sum x_i^2), coordinate_vector [axis], random_trig [a, b, seed].
/// Throws ConfigError for unknown names or bad parameter counts.
TensorSection make_section(const BuilderSpec& spec, const ManifoldChart& chart);

/// Sum of two sines per component with closed-form partials. Frequencies on
/// periodic axes are integer multiples of 2 pi / period so the field is
/// globally smooth on tori.
TensorSection random_trig_section(const ManifoldChart& chart, TensorType type, std::uint64_t seed);

/// Operators by name: identity, covariant_derivative [eta chart comps],
/// laplace_beltrami, third_derivative [3n orthonormal-frame coordinates at x].
/// `x` matters only for builders defined through the frame at x.
DifferentialOperator make_operator(const BuilderSpec& spec, const ManifoldChart& chart, TensorType in_type,
                                   const ChartPoint& x);

}  // namespace rfi::builders
