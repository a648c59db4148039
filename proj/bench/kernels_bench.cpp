// Serial reference kernels against their OpenMP counterparts on a sphere
// Laplacian setup. Worker count follows RFI_WORKERS.

#include <benchmark/benchmark.h>

#include "rfi/builders.hpp"
#include "rfi/inversion.hpp"
#include "rfi/zoo.hpp"

namespace {

using namespace rfi;

struct Fixture {
  ManifoldChart chart = zoo::sphere2(1.0);
  ChartPoint x;
  TensorSection u;
  CutoffWindow window;
  QuadraturePlan plan;
  DifferentialOperator op;
  WindowedPullback wp;
  FiberSpectrum spectrum;

  explicit Fixture(int n)
      : x{Vec::Constant(2, 1.0)},
        u(builders::random_trig_section(chart, TensorType{1, 0}, 5)),
        window(admissible_window(chart, x, 1.0)),
        plan(QuadraturePlan::make(orthonormal_frame_at(chart, x), window, n)),
        op(DifferentialOperator::laplace_beltrami(chart, TensorType{1, 0})) {
    wp = kernels::pullback_serial(chart, u, x, window, plan, 64);
    spectrum = kernels::fourier_serial(wp, plan);
  }
};

template <bool Parallel>
void pullback(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto r = Parallel ? kernels::pullback_parallel(f.chart, f.u, f.x, f.window, f.plan, 64)
                      : kernels::pullback_serial(f.chart, f.u, f.x, f.window, f.plan, 64);
    benchmark::DoNotOptimize(r.values.data());
  }
  state.counters["workers"] = Parallel ? worker_count() : 1;
}

template <bool Parallel>
void fourier(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto r = Parallel ? kernels::fourier_parallel(f.wp, f.plan) : kernels::fourier_serial(f.wp, f.plan);
    benchmark::DoNotOptimize(r.values.data());
  }
  state.counters["workers"] = Parallel ? worker_count() : 1;
}

template <bool Parallel>
void symbol_sum(benchmark::State& state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const SymbolEvaluator sym(f.op, f.x);
  for (auto _ : state) {
    auto r = Parallel ? kernels::symbol_sum_parallel(sym, f.op.out_type(), f.spectrum, f.plan)
                      : kernels::symbol_sum_serial(sym, f.op.out_type(), f.spectrum, f.plan);
    benchmark::DoNotOptimize(r.comps().data());
  }
  state.counters["workers"] = Parallel ? worker_count() : 1;
}

}  // namespace

BENCHMARK(pullback<false>)->Name("pullback/serial")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(pullback<true>)->Name("pullback/parallel")->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(fourier<false>)->Name("fourier/serial")->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(fourier<true>)->Name("fourier/parallel")->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(symbol_sum<false>)->Name("symbol_sum/serial")->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(symbol_sum<true>)->Name("symbol_sum/parallel")->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
