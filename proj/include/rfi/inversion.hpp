#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "rfi/geodesics.hpp"
#include "rfi/operators.hpp"
#include "rfi/section.hpp"

namespace rfi {

/// Conjugate grids in a g_x-orthonormal frame. xi nodes sit at -L + j h,
/// lambda nodes at (k - N/2) / (2L), j, k in [0, N), with h = 2L / N, so the
/// two grids are an exact DFT pair (h * dlambda * N = 1). Node multi-indices
/// are flattened row-major with axis 0 most significant.
struct QuadraturePlan {
  int n = 0;
  double half_width = 0.0;
  int nodes_per_axis = 0;
  OrthonormalFrame frame;

  /// Throws PlanMismatch for odd or too small N.
  static QuadraturePlan make(const OrthonormalFrame& frame, const CutoffWindow& window, int nodes_per_axis);

  double spacing() const { return 2.0 * half_width / nodes_per_axis; }
  double dual_spacing() const { return 1.0 / (2.0 * half_width); }
  /// Nyquist band N / (4L) of the lambda grid.
  double band_limit() const { return nodes_per_axis / (4.0 * half_width); }
  std::size_t node_count() const;

  /// Frame coordinates of a xi node / lambda node.
  Vec xi_node(std::size_t flat) const;
  Vec lambda_node(std::size_t flat) const;
};

/// Node-major array of fibers: values[node * fiber_size + component].
struct NodeField {
  TensorType type;
  int dim = 0;
  std::size_t fiber_size = 0;
  std::vector<Complex> values;

  FiberValue at(std::size_t node) const;
  std::size_t node_count() const { return fiber_size ? values.size() / fiber_size : 0; }
};

/// Samples of chi_x(xi) tau_x u(exp_x(xi)) on the xi grid.
struct WindowedPullback : NodeField {};
/// Samples of the windowed transform u_hat_x(lambda) on the lambda grid.
struct FiberSpectrum : NodeField {};

enum class Execution { serial, parallel };

/// Serial reference kernels and their OpenMP counterparts. Both produce
/// bit-identical results: every node is computed by the same code and every
/// reduction uses pairwise summation in a fixed order.
namespace kernels {

WindowedPullback pullback_serial(const ManifoldChart& chart, const TensorSection& u, const ChartPoint& x,
                                 const CutoffWindow& window, const QuadraturePlan& plan, int steps);
WindowedPullback pullback_parallel(const ManifoldChart& chart, const TensorSection& u, const ChartPoint& x,
                                   const CutoffWindow& window, const QuadraturePlan& plan, int steps);

FiberSpectrum fourier_serial(const WindowedPullback& wp, const QuadraturePlan& plan);
FiberSpectrum fourier_parallel(const WindowedPullback& wp, const QuadraturePlan& plan);

/// dlambda^n sum_lambda a(lambda) u_hat(lambda).
FiberValue symbol_sum_serial(const SymbolEvaluator& symbol, TensorType out_type, const FiberSpectrum& spectrum,
                             const QuadraturePlan& plan);
FiberValue symbol_sum_parallel(const SymbolEvaluator& symbol, TensorType out_type, const FiberSpectrum& spectrum,
                               const QuadraturePlan& plan);

}  // namespace kernels

/// Worker count for the parallel kernels (<= 0 restores the default).
void set_worker_count(int workers);
int worker_count();

/// Throws PlanMismatch unless plan.half_width == 2 epsilon and the frame is
/// based at x.
WindowedPullback windowed_pullback(const ManifoldChart& chart, const TensorSection& u, const ChartPoint& x,
                                   const CutoffWindow& window, const QuadraturePlan& plan, int steps,
                                   Execution exec = Execution::parallel);

/// h^n sum_xi wp(xi) exp(-2 pi i lambda . xi) at every lambda node.
FiberSpectrum fiber_fourier(const WindowedPullback& wp, const QuadraturePlan& plan,
                            Execution exec = Execution::parallel);

struct InversionOptions {
  Execution exec = Execution::parallel;
  /// Lets the order-3 breakdown experiment push the formula past p = 2.
  bool allow_order_above_two = false;
};

/// dlambda^n sum_lambda a(lambda) u_hat_x(lambda), which reproduces Au(x).
/// Throws OrderTooHigh for p >= 3 unless explicitly allowed.
FiberValue invert(const ManifoldChart& chart, const DifferentialOperator& a, const TensorSection& u,
                  const ChartPoint& x, const CutoffWindow& window, const QuadraturePlan& plan, int steps,
                  InversionOptions options = {});

/// Accuracy knobs for one inversion, with the defaults used by the CLI.
struct InversionConfig {
  int nodes_per_axis = 64;
  int steps = 256;
  double epsilon_cap = 1.0;
  CutoffProfile profile{};
  DerivativeConfig derivatives{};
  InversionOptions options{};
};

/// Window with epsilon = min(cap, inj-radius bound, chart-margin bound).
CutoffWindow admissible_window(const ManifoldChart& chart, const ChartPoint& x, double epsilon_cap,
                               CutoffProfile profile = CutoffProfile{});

/// Builds window, frame and plan from the config and runs invert.
FiberValue invert_at(const ManifoldChart& chart, const DifferentialOperator& a, const TensorSection& u,
                     const ChartPoint& x, const InversionConfig& cfg);

/// |invert with window_1 - invert with window_2| (max norm), same N and steps.
double chi_independence_check(const ManifoldChart& chart, const DifferentialOperator& a, const TensorSection& u,
                              const ChartPoint& x, const CutoffWindow& window_1, const CutoffWindow& window_2,
                              int nodes_per_axis, int steps, InversionOptions options = {});

}  // namespace rfi
