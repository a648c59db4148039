#include "kernel_common.hpp"

#include <cmath>

#include "rfi/errors.hpp"

namespace rfi::detail {

WindowedPullback empty_pullback(const TensorSection& u, const QuadraturePlan& plan) {
  WindowedPullback wp;
  wp.type = u.type;
  wp.dim = plan.n;
  wp.fiber_size = u.type.fiber_dim(plan.n);
  wp.values.assign(plan.node_count() * wp.fiber_size, Complex(0.0));
  return wp;
}

void pullback_node(const PullbackContext& ctx, std::size_t node, Complex* out) {
  const Vec xi_frame = ctx.plan.xi_node(node);
  const double weight = ctx.window.value(xi_frame.norm());
  if (weight == 0.0) return;  // outside the 2 epsilon ball: no geodesic work
  const Vec xi = ctx.plan.frame.to_chart_vector(xi_frame);
  FiberValue value;
  if (ctx.u.type.rank() == 0) {
    const FlowEndpoint flow = flow_endpoint(ctx.chart, ctx.x, xi, ctx.steps);
    value = ctx.u(ctx.chart.wrap(flow.position));
  } else {
    const FlowEndpoint flow = flow_with_transport(ctx.chart, ctx.x, xi, ctx.steps);
    value = apply_transport(transport_from_flow(ctx.x, flow), ctx.u(ctx.chart.wrap(flow.position)));
  }
  if (value.size() != ctx.fiber_size) throw Error(ErrorCode::ShapeMismatch, "section returned a fiber of the wrong type");
  for (std::size_t i = 0; i < ctx.fiber_size; ++i) out[i] = weight * value[i];
}

DftTable::DftTable(int n) : n_(n), twiddle_(static_cast<std::size_t>(n)) {
  for (int m = 0; m < n; ++m) {
    const double angle = -kTwoPi * static_cast<double>(m) / n;
    twiddle_[static_cast<std::size_t>(m)] = Complex(std::cos(angle), std::sin(angle));
  }
}

Complex DftTable::operator()(int k, int j) const {
  const long long prod = static_cast<long long>(k - n_ / 2) * static_cast<long long>(j - n_ / 2);
  long long m = prod % n_;
  if (m < 0) m += n_;
  return twiddle_[static_cast<std::size_t>(m)];
}

namespace {

std::size_t ipow(std::size_t b, int e) {
  std::size_t out = 1;
  for (int i = 0; i < e; ++i) out *= b;
  return out;
}

}  // namespace

std::size_t line_count(const QuadraturePlan& plan, std::size_t fiber_size) {
  return ipow(static_cast<std::size_t>(plan.nodes_per_axis), plan.n - 1) * fiber_size;
}

void dft_line(const DftTable& table, const QuadraturePlan& plan, std::size_t fiber_size, int axis,
              std::size_t line, const std::vector<Complex>& in, std::vector<Complex>& out,
              std::vector<Complex>& scratch) {
  const int big_n = plan.nodes_per_axis;
  const auto nn = static_cast<std::size_t>(big_n);
  // Element stride along `axis`, and the split of `line` into the indices
  // before and after that axis.
  const std::size_t stride = ipow(nn, plan.n - 1 - axis) * fiber_size;
  const std::size_t outer = line / stride;
  const std::size_t inner = line % stride;
  const std::size_t start = outer * nn * stride + inner;
  const double h = plan.spacing();
  for (int k = 0; k < big_n; ++k) {
    for (int j = 0; j < big_n; ++j)
      scratch[static_cast<std::size_t>(j)] = table(k, j) * in[start + static_cast<std::size_t>(j) * stride];
    const Complex sum = pairwise_sum(std::span<const Complex>(scratch.data(), nn));
    out[start + static_cast<std::size_t>(k) * stride] = h * sum;
  }
}

void symbol_node(const SymbolEvaluator& symbol, const FiberSpectrum& spectrum, const QuadraturePlan& plan,
                 std::size_t node, Complex* out) {
  const Vec lambda = plan.frame.to_chart_covector(plan.lambda_node(node));
  const CMat a = symbol(lambda);
  const Complex* u_hat = spectrum.values.data() + node * spectrum.fiber_size;
  for (Eigen::Index o = 0; o < a.rows(); ++o) {
    Complex acc = 0.0;
    for (Eigen::Index i = 0; i < a.cols(); ++i) acc += a(o, i) * u_hat[i];
    out[o] = acc;
  }
}

FiberValue reduce_symbol_terms(const std::vector<Complex>& terms, std::size_t out_dim, TensorType out_type, int dim,
                               const QuadraturePlan& plan) {
  const std::size_t nodes = plan.node_count();
  const double measure = std::pow(plan.dual_spacing(), plan.n);
  FiberValue result(out_type, dim);
  for (std::size_t o = 0; o < out_dim; ++o)
    result[o] = measure * pairwise_sum_strided(terms.data() + o, nodes, out_dim);
  return result;
}

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace rfi::detail
