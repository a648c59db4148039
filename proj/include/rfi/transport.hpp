#pragma once

#include "rfi/geodesics.hpp"
#include "rfi/section.hpp"
#include "rfi/tensor.hpp"

namespace rfi {

/// Parallel transport from `source` (the exp point) to `target` (the base x).
/// `vector_matrix` acts on tangent components, `covector_matrix` is its
/// inverse transpose.
struct TransportOperator {
  ChartPoint source;
  ChartPoint target;
  Mat vector_matrix;
  Mat covector_matrix;

  TransportOperator inverse() const;
  /// max |F^T g_target F - g_source|, F = vector_matrix.
  double isometry_residual(const ManifoldChart& chart) const;
};

/// Integrates V' + Gamma(gamma', V) = 0 for a full basis on the path's own RK4
/// grid, then inverts to get the endpoint -> start map. Throws
/// SingularTransport when the basis degenerates.
TransportOperator transport_along(const ManifoldChart& chart, const GeodesicPath& path);

/// Same map built from an already integrated flow.
TransportOperator transport_from_flow(const ChartPoint& x, const FlowEndpoint& flow);

/// Contravariant axes by vector_matrix, covariant axes by covector_matrix.
FiberValue apply_transport(const TransportOperator& op, const FiberValue& v);

/// tau_x u(exp_x(xi)).
FiberValue transport_field_pullback(const ManifoldChart& chart, const TensorSection& u,
                                    const ChartPoint& x, const TangentVector& xi, int steps);

}  // namespace rfi
