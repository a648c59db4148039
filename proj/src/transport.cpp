#include "rfi/transport.hpp"

#include "rfi/errors.hpp"

namespace rfi {

namespace {

Mat invert_checked(const Mat& outward) {
  const Eigen::JacobiSVD<Mat> svd(outward);
  const auto& sv = svd.singularValues();
  if (!(sv.minCoeff() > 1e-12 * sv.maxCoeff()) || !outward.allFinite())
    throw Error(ErrorCode::SingularTransport, "transported basis is numerically singular");
  return outward.partialPivLu().inverse();
}

}  // namespace

TransportOperator TransportOperator::inverse() const {
  return TransportOperator{target, source, covector_matrix.transpose(), vector_matrix.transpose()};
}

double TransportOperator::isometry_residual(const ManifoldChart& chart) const {
  const Mat gs = chart.metric_at(chart.wrap(source));
  const Mat gt = chart.metric_at(chart.wrap(target));
  return (vector_matrix.transpose() * gt * vector_matrix - gs).cwiseAbs().maxCoeff();
}

TransportOperator transport_from_flow(const ChartPoint& x, const FlowEndpoint& flow) {
  const Mat back = invert_checked(flow.outward_transport);
  return TransportOperator{flow.position, x, back, flow.outward_transport.transpose()};
}

TransportOperator transport_along(const ManifoldChart& chart, const GeodesicPath& path) {
  const GeodesicState& start = path.start();
  const FlowEndpoint flow =
      flow_with_transport(chart, start.position, start.velocity, path.step_count, path.t_final);
  return transport_from_flow(start.position, flow);
}

FiberValue apply_transport(const TransportOperator& op, const FiberValue& v) {
  if (v.dim() != op.vector_matrix.rows())
    throw Error(ErrorCode::ShapeMismatch, "fiber dimension does not match the transport");
  if (v.type().rank() == 0) return v;
  return transform_axes(v, op.vector_matrix, op.covector_matrix);
}

FiberValue transport_field_pullback(const ManifoldChart& chart, const TensorSection& u,
                                    const ChartPoint& x, const TangentVector& xi, int steps) {
  if (xi.base.coords != x.coords)
    throw Error(ErrorCode::BaseMismatch, "pullback: tangent vector not based at x");
  const FlowEndpoint flow = flow_with_transport(chart, x, xi.comps, steps);
  const FiberValue at_end = u(chart.wrap(flow.position));
  if (at_end.type().rank() == 0) return at_end;
  return apply_transport(transport_from_flow(x, flow), at_end);
}

}  // namespace rfi
