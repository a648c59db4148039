#pragma once

#include <functional>
#include <string>

#include "rfi/geometry.hpp"
#include "rfi/tensor.hpp"

namespace rfi {

using FieldFn = std::function<FiberValue(const ChartPoint&)>;

enum class DerivativeHint { closed_form_available, numeric_only };

/// Smooth section of T^{(x) a} (x) (T*)^{(x) b}, given pointwise. Callbacks
/// must be reentrant; they receive points already wrapped into the chart.
struct TensorSection {
  TensorType type;
  int dim = 0;
  FieldFn eval;
  /// Optional chart partial derivatives d_k u, as a fiber of type (a, b + 1)
  /// whose last axis is k.
  FieldFn partials;
  std::string label;
  /// Set by builders that know the section vanishes; lets inversion skip all
  /// geodesic work.
  bool identically_zero = false;

  DerivativeHint derivative_hint() const {
    return partials ? DerivativeHint::closed_form_available : DerivativeHint::numeric_only;
  }
  FiberValue operator()(const ChartPoint& x) const { return eval(x); }
};

}  // namespace rfi
