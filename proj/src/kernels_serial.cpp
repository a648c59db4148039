#include "kernel_common.hpp"

namespace rfi::kernels {

WindowedPullback pullback_serial(const ManifoldChart& chart, const TensorSection& u, const ChartPoint& x,
                                 const CutoffWindow& window, const QuadraturePlan& plan, int steps) {
  WindowedPullback wp = detail::empty_pullback(u, plan);
  const detail::PullbackContext ctx{chart, u, x, window, plan, steps, wp.fiber_size};
  for (std::size_t node = 0; node < plan.node_count(); ++node)
    detail::pullback_node(ctx, node, wp.values.data() + node * wp.fiber_size);
  return wp;
}

FiberSpectrum fourier_serial(const WindowedPullback& wp, const QuadraturePlan& plan) {
  const detail::DftTable table(plan.nodes_per_axis);
  std::vector<Complex> in = wp.values;
  std::vector<Complex> out(in.size());
  std::vector<Complex> scratch(static_cast<std::size_t>(plan.nodes_per_axis));
  const std::size_t lines = detail::line_count(plan, wp.fiber_size);
  for (int axis = 0; axis < plan.n; ++axis) {
    for (std::size_t line = 0; line < lines; ++line)
      detail::dft_line(table, plan, wp.fiber_size, axis, line, in, out, scratch);
    in.swap(out);
  }
  FiberSpectrum spectrum;
  spectrum.type = wp.type;
  spectrum.dim = wp.dim;
  spectrum.fiber_size = wp.fiber_size;
  spectrum.values = std::move(in);
  return spectrum;
}

FiberValue symbol_sum_serial(const SymbolEvaluator& symbol, TensorType out_type, const FiberSpectrum& spectrum,
                             const QuadraturePlan& plan) {
  const std::size_t out_dim = symbol.out_dim();
  std::vector<Complex> terms(plan.node_count() * out_dim);
  for (std::size_t node = 0; node < plan.node_count(); ++node)
    detail::symbol_node(symbol, spectrum, plan, node, terms.data() + node * out_dim);
  return detail::reduce_symbol_terms(terms, out_dim, out_type, plan.n, plan);
}

}  // namespace rfi::kernels
