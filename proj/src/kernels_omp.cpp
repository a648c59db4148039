#include <omp.h>

#include <atomic>
#include <cstdlib>

#include "kernel_common.hpp"

namespace rfi {

namespace {

int default_workers() {
  if (const char* env = std::getenv("RFI_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return omp_get_max_threads();
}

std::atomic<int> g_workers{0};

}  // namespace

void set_worker_count(int workers) { g_workers.store(workers > 0 ? workers : 0); }

int worker_count() {
  const int w = g_workers.load();
  return w > 0 ? w : default_workers();
}

namespace kernels {

WindowedPullback pullback_parallel(const ManifoldChart& chart, const TensorSection& u, const ChartPoint& x,
                                   const CutoffWindow& window, const QuadraturePlan& plan, int steps) {
  WindowedPullback wp = detail::empty_pullback(u, plan);
  const detail::PullbackContext ctx{chart, u, x, window, plan, steps, wp.fiber_size};
  const auto nodes = static_cast<long long>(plan.node_count());
  std::vector<std::exception_ptr> errors(plan.node_count());
#pragma omp parallel for schedule(dynamic, 16) num_threads(worker_count())
  for (long long node = 0; node < nodes; ++node) {
    const auto i = static_cast<std::size_t>(node);
    try {
      detail::pullback_node(ctx, i, wp.values.data() + i * wp.fiber_size);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  detail::rethrow_first(errors);
  return wp;
}

FiberSpectrum fourier_parallel(const WindowedPullback& wp, const QuadraturePlan& plan) {
  const detail::DftTable table(plan.nodes_per_axis);
  std::vector<Complex> in = wp.values;
  std::vector<Complex> out(in.size());
  const auto lines = static_cast<long long>(detail::line_count(plan, wp.fiber_size));
  for (int axis = 0; axis < plan.n; ++axis) {
#pragma omp parallel num_threads(worker_count())
    {
      std::vector<Complex> scratch(static_cast<std::size_t>(plan.nodes_per_axis));
#pragma omp for schedule(static)
      for (long long line = 0; line < lines; ++line)
        detail::dft_line(table, plan, wp.fiber_size, axis, static_cast<std::size_t>(line), in, out, scratch);
    }
    in.swap(out);
  }
  FiberSpectrum spectrum;
  spectrum.type = wp.type;
  spectrum.dim = wp.dim;
  spectrum.fiber_size = wp.fiber_size;
  spectrum.values = std::move(in);
  return spectrum;
}

FiberValue symbol_sum_parallel(const SymbolEvaluator& symbol, TensorType out_type, const FiberSpectrum& spectrum,
                               const QuadraturePlan& plan) {
  const std::size_t out_dim = symbol.out_dim();
  std::vector<Complex> terms(plan.node_count() * out_dim);
  const auto nodes = static_cast<long long>(plan.node_count());
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (long long node = 0; node < nodes; ++node)
    detail::symbol_node(symbol, spectrum, plan, static_cast<std::size_t>(node),
                        terms.data() + static_cast<std::size_t>(node) * out_dim);
  return detail::reduce_symbol_terms(terms, out_dim, out_type, plan.n, plan);
}

}  // namespace kernels

}  // namespace rfi
