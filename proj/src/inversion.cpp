#include "rfi/inversion.hpp"

#include <cmath>

#include "kernel_common.hpp"
#include "rfi/errors.hpp"

namespace rfi {

QuadraturePlan QuadraturePlan::make(const OrthonormalFrame& frame, const CutoffWindow& window, int nodes_per_axis) {
  if (nodes_per_axis < 4 || nodes_per_axis % 2 != 0)
    throw Error(ErrorCode::PlanMismatch, "nodes per axis must be even and at least 4");
  QuadraturePlan plan;
  plan.n = static_cast<int>(frame.base.coords.size());
  plan.half_width = window.support_radius();
  plan.nodes_per_axis = nodes_per_axis;
  plan.frame = frame;
  return plan;
}

std::size_t QuadraturePlan::node_count() const {
  std::size_t count = 1;
  for (int a = 0; a < n; ++a) count *= static_cast<std::size_t>(nodes_per_axis);
  return count;
}

namespace {

// Per-axis indices of a flat node, axis 0 most significant.
template <typename F>
Vec node_coords(const QuadraturePlan& plan, std::size_t flat, F&& coord) {
  Vec out(plan.n);
  const auto nn = static_cast<std::size_t>(plan.nodes_per_axis);
  for (int a = plan.n - 1; a >= 0; --a) {
    out[a] = coord(static_cast<int>(flat % nn));
    flat /= nn;
  }
  return out;
}

}  // namespace

Vec QuadraturePlan::xi_node(std::size_t flat) const {
  const double h = spacing();
  return node_coords(*this, flat, [&](int j) { return -half_width + j * h; });
}

Vec QuadraturePlan::lambda_node(std::size_t flat) const {
  const double dl = dual_spacing();
  return node_coords(*this, flat, [&](int k) { return (k - nodes_per_axis / 2) * dl; });
}

FiberValue NodeField::at(std::size_t node) const {
  const auto first = values.begin() + static_cast<std::ptrdiff_t>(node * fiber_size);
  return FiberValue(type, dim, std::vector<Complex>(first, first + static_cast<std::ptrdiff_t>(fiber_size)));
}

namespace {

void require_matching_plan(const ManifoldChart& chart, const ChartPoint& x, const CutoffWindow& window,
                           const QuadraturePlan& plan) {
  if (plan.n != chart.dim())
    throw Error(ErrorCode::PlanMismatch, "quadrature plan dimension differs from the chart");
  const double expected = window.support_radius();
  if (std::abs(plan.half_width - expected) > 1e-12 * expected)
    throw Error(ErrorCode::PlanMismatch, "quadrature half width must equal 2 epsilon");
  if (plan.frame.base.coords != x.coords)
    throw Error(ErrorCode::PlanMismatch, "quadrature frame is not based at x");
}

}  // namespace

WindowedPullback windowed_pullback(const ManifoldChart& chart, const TensorSection& u, const ChartPoint& x,
                                   const CutoffWindow& window, const QuadraturePlan& plan, int steps,
                                   Execution exec) {
  require_matching_plan(chart, x, window, plan);
  if (u.dim != chart.dim()) throw Error(ErrorCode::ShapeMismatch, "section dimension differs from the chart");
  return exec == Execution::serial ? kernels::pullback_serial(chart, u, x, window, plan, steps)
                                   : kernels::pullback_parallel(chart, u, x, window, plan, steps);
}

FiberSpectrum fiber_fourier(const WindowedPullback& wp, const QuadraturePlan& plan, Execution exec) {
  if (wp.node_count() != plan.node_count() || wp.dim != plan.n)
    throw Error(ErrorCode::PlanMismatch, "pullback samples do not match the quadrature plan");
  return exec == Execution::serial ? kernels::fourier_serial(wp, plan) : kernels::fourier_parallel(wp, plan);
}

FiberValue invert(const ManifoldChart& chart, const DifferentialOperator& a, const TensorSection& u,
                  const ChartPoint& x, const CutoffWindow& window, const QuadraturePlan& plan, int steps,
                  InversionOptions options) {
  if (a.order() > kMaxFormulaOrder && !options.allow_order_above_two)
    throw Error(ErrorCode::OrderTooHigh,
                "inversion formula holds for order <= 2, got order " + std::to_string(a.order()));
  if (!(u.type == a.in_type())) throw Error(ErrorCode::TypeMismatch, "section type differs from the operator input");
  if (a.dim() != chart.dim() || u.dim != chart.dim())
    throw Error(ErrorCode::ShapeMismatch, "operator, section and chart dimensions differ");
  require_matching_plan(chart, x, window, plan);
  if (u.identically_zero) return FiberValue(a.out_type(), chart.dim());

  const WindowedPullback wp = windowed_pullback(chart, u, x, window, plan, steps, options.exec);
  const FiberSpectrum spectrum = fiber_fourier(wp, plan, options.exec);
  const SymbolEvaluator symbol(a, x);
  return options.exec == Execution::serial ? kernels::symbol_sum_serial(symbol, a.out_type(), spectrum, plan)
                                           : kernels::symbol_sum_parallel(symbol, a.out_type(), spectrum, plan);
}

CutoffWindow admissible_window(const ManifoldChart& chart, const ChartPoint& x, double epsilon_cap,
                               CutoffProfile profile) {
  const double limit = chart_epsilon_limit(chart, x);
  if (!(limit > 0.0)) throw Error(ErrorCode::OutOfChart, chart.name() + ": base point on the chart boundary");
  return make_window(chart, x, std::min(epsilon_cap, limit), profile);
}

FiberValue invert_at(const ManifoldChart& chart, const DifferentialOperator& a, const TensorSection& u,
                     const ChartPoint& x, const InversionConfig& cfg) {
  const CutoffWindow window = admissible_window(chart, x, cfg.epsilon_cap, cfg.profile);
  const QuadraturePlan plan = QuadraturePlan::make(orthonormal_frame_at(chart, x), window, cfg.nodes_per_axis);
  return invert(chart, a, u, x, window, plan, cfg.steps, cfg.options);
}

double chi_independence_check(const ManifoldChart& chart, const DifferentialOperator& a, const TensorSection& u,
                              const ChartPoint& x, const CutoffWindow& window_1, const CutoffWindow& window_2,
                              int nodes_per_axis, int steps, InversionOptions options) {
  const OrthonormalFrame frame = orthonormal_frame_at(chart, x);
  const FiberValue r1 =
      invert(chart, a, u, x, window_1, QuadraturePlan::make(frame, window_1, nodes_per_axis), steps, options);
  const FiberValue r2 =
      invert(chart, a, u, x, window_2, QuadraturePlan::make(frame, window_2, nodes_per_axis), steps, options);
  return max_abs_difference(r1, r2);
}

}  // namespace rfi
