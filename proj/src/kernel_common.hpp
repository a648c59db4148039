#pragma once

// Per-node building blocks shared by the serial and OpenMP kernels. Keeping
// the arithmetic in one place is what makes the two paths bit-identical.

#include <exception>
#include <vector>

#include "rfi/inversion.hpp"
#include "rfi/transport.hpp"

namespace rfi::detail {

struct PullbackContext {
  const ManifoldChart& chart;
  const TensorSection& u;
  const ChartPoint& x;
  const CutoffWindow& window;
  const QuadraturePlan& plan;
  int steps;
  std::size_t fiber_size;
};

WindowedPullback empty_pullback(const TensorSection& u, const QuadraturePlan& plan);
void pullback_node(const PullbackContext& ctx, std::size_t node, Complex* out);

/// exp(-2 pi i (k - N/2)(j - N/2) / N), tabulated by the exponent mod N.
class DftTable {
 public:
  explicit DftTable(int n);
  Complex operator()(int k, int j) const;
  int size() const { return n_; }

 private:
  int n_;
  std::vector<Complex> twiddle_;
};

/// Number of independent 1-D lines for the pass along `axis`.
std::size_t line_count(const QuadraturePlan& plan, std::size_t fiber_size);
/// One 1-D transform along `axis`, scaled by h. `line` indexes the lines of
/// that pass; `scratch` must hold N entries.
void dft_line(const DftTable& table, const QuadraturePlan& plan, std::size_t fiber_size, int axis,
              std::size_t line, const std::vector<Complex>& in, std::vector<Complex>& out,
              std::vector<Complex>& scratch);

/// a(lambda_node) u_hat(lambda_node), written to out[0 .. out_dim).
void symbol_node(const SymbolEvaluator& symbol, const FiberSpectrum& spectrum, const QuadraturePlan& plan,
                 std::size_t node, Complex* out);

/// dlambda^n times the pairwise sum over nodes of the per-node terms.
FiberValue reduce_symbol_terms(const std::vector<Complex>& terms, std::size_t out_dim, TensorType out_type,
                               int dim, const QuadraturePlan& plan);

void rethrow_first(const std::vector<std::exception_ptr>& errors);

}  // namespace rfi::detail
