#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rfi/geometry.hpp"
#include "rfi/section.hpp"
#include "rfi/tensor.hpp"

namespace rfi {

/// Finite-difference steps used by the derivative routines.
struct DerivativeConfig {
  /// Central-difference step for first chart derivatives of a section.
  double h_fd = 1e-5;
  /// Step of the fourth-order stencil used for every further derivative level.
  double h_nested = 2e-3;
  /// Step for the t-derivatives of tau_x u(exp_x(sum t_i eta_i)).
  double h_exp = 1e-3;
  /// RK4 steps for the geodesics inside the exp-based derivatives.
  int steps = 256;
};

// ---------------------------------------------------------------------------
// Covariant derivatives
//
// nabla^k u is a fiber of type (a, b + k). The derivative axes are appended
// innermost first, so the last axis is the outermost derivative:
//   nabla^2_{eta1, eta2} u = sum eta1^i eta2^j (nabla^2 u)[..., j, i].
// ---------------------------------------------------------------------------

/// The field x -> nabla^k u(x).
FieldFn covariant_derivative_field(const ManifoldChart& chart, const TensorSection& u, int k,
                                   const DerivativeConfig& cfg = {});

FiberValue covariant_derivative(const ManifoldChart& chart, const TensorSection& u,
                                const ChartPoint& x, const DerivativeConfig& cfg = {});
FiberValue second_covariant_derivative(const ManifoldChart& chart, const TensorSection& u,
                                       const ChartPoint& x, const DerivativeConfig& cfg = {});
FiberValue nth_covariant_derivative(const ManifoldChart& chart, const TensorSection& u,
                                    const ChartPoint& x, int k, const DerivativeConfig& cfg = {});

/// nabla^k_{eta_1, ..., eta_k} u from the full derivative fiber; eta_1 is the
/// outermost derivative.
FiberValue contract_derivative(const FiberValue& derivative, std::span<const Vec> etas);

/// (1/k!) sum over orderings of nabla^k_{eta_sigma(1), ..., eta_sigma(k)} u.
FiberValue symmetrize_derivative(const FiberValue& derivative, std::span<const Vec> etas);

/// d^p / (dt_1 ... dt_p) at 0 of tau_x u(exp_x(t_1 eta_1 + ... + t_p eta_p)),
/// by mixed central differences with step cfg.h_exp. p = etas.size() <= 2.
FiberValue symmetrized_derivative_via_exp(const ManifoldChart& chart, const TensorSection& u,
                                          const ChartPoint& x, std::span<const Vec> etas,
                                          const DerivativeConfig& cfg = {});

/// d^p/dt^p at 0 of tau_x u(exp_x(t eta)), p in {1, 2}.
FiberValue radial_derivative_via_exp(const ManifoldChart& chart, const TensorSection& u,
                                     const ChartPoint& x, const Vec& eta, int p,
                                     const DerivativeConfig& cfg = {});

/// nabla^2_{eta1, eta2} u - nabla^2_{eta2, eta1} u for a vector field u.
/// Equals R(eta1, eta2) u with R(X, Y) = [nabla_X, nabla_Y] - nabla_[X, Y].
FiberValue curvature_commutator(const ManifoldChart& chart, const TensorSection& u,
                                const ChartPoint& x, const Vec& eta1, const Vec& eta2,
                                const DerivativeConfig& cfg = {});

// ---------------------------------------------------------------------------
// Differential operators A = sum_r A_r nabla^{p - r}
// ---------------------------------------------------------------------------

/// A_r at one point: (p - r) contravariant symbol axes followed by an
/// out_dim x in_dim block, row-major.
struct CoefficientValue {
  int symbol_rank = 0;
  int dim = 0;
  std::size_t out_dim = 0;
  std::size_t in_dim = 0;
  std::vector<Complex> data;

  CoefficientValue() = default;
  CoefficientValue(int symbol_rank, int dim, std::size_t out_dim, std::size_t in_dim);

  std::size_t symbol_size() const;
  Complex& operator()(std::size_t symbol, std::size_t out, std::size_t in) {
    return data[(symbol * out_dim + out) * in_dim + in];
  }
  Complex operator()(std::size_t symbol, std::size_t out, std::size_t in) const {
    return data[(symbol * out_dim + out) * in_dim + in];
  }
};

using CoefficientFn = std::function<CoefficientValue(const ChartPoint&)>;

enum class SymbolAxes {
  /// Coefficients live in S^{p-r} T: symbol axes are averaged on evaluation.
  symmetrize,
  /// Keep the given (possibly non-symmetric) coefficients; only used for the
  /// order-3 breakdown experiment.
  keep_as_given,
};

inline constexpr int kMaxFormulaOrder = 2;
inline constexpr int kMaxRepresentableOrder = 3;

class DifferentialOperator {
 public:
  DifferentialOperator(int order, int dim, TensorType in_type, TensorType out_type,
                       std::vector<CoefficientFn> coeffs, SymbolAxes axes = SymbolAxes::symmetrize,
                       std::string label = {});

  int order() const { return order_; }
  int dim() const { return dim_; }
  TensorType in_type() const { return in_; }
  TensorType out_type() const { return out_; }
  SymbolAxes symbol_axes() const { return axes_; }
  const std::string& label() const { return label_; }

  /// A_r(x), r in [0, order]; symbol rank order - r.
  CoefficientValue coefficient(int r, const ChartPoint& x) const;

  static DifferentialOperator identity(int dim, TensorType type);
  /// nabla_eta with a vector field eta given by chart components.
  static DifferentialOperator covariant_derivative_along(int dim, TensorType type,
                                                          std::function<Vec(const ChartPoint&)> eta);
  /// tr_g nabla^2 (Laplace-Beltrami on scalars, Bochner Laplacian otherwise).
  static DifferentialOperator laplace_beltrami(const ManifoldChart& chart, TensorType type);
  /// nabla^3_{eta1, eta2, eta3} with constant chart components, symbol axes
  /// kept in this order (not symmetrized).
  static DifferentialOperator third_derivative_along(int dim, TensorType type, const Vec& eta1,
                                                     const Vec& eta2, const Vec& eta3);
  /// alpha A + beta B; the lower-order operator is padded with zero
  /// coefficients.
  static DifferentialOperator linear_combination(Complex alpha, const DifferentialOperator& a,
                                                 Complex beta, const DifferentialOperator& b);

 private:
  int order_;
  int dim_;
  TensorType in_;
  TensorType out_;
  std::vector<CoefficientFn> coeffs_;
  SymbolAxes axes_;
  std::string label_;
};

/// Symmetrizes the symbol axes of a coefficient (average over permutations).
CoefficientValue symmetrize_symbol_axes(const CoefficientValue& c);

/// sum_r A_r contracted with nabla^{p - r} u(x). Symbol axis m pairs with the
/// m-th outermost derivative. Throws TypeMismatch.
FiberValue direct_apply(const ManifoldChart& chart, const DifferentialOperator& a,
                        const TensorSection& u, const ChartPoint& x, const DerivativeConfig& cfg = {});

struct SymbolValue {
  ChartPoint base;
  /// out_dim x in_dim.
  CMat value;
};

/// Total symbol with coefficients frozen at one base point; cheap to
/// evaluate at many covectors.
class SymbolEvaluator {
 public:
  SymbolEvaluator(const DifferentialOperator& a, const ChartPoint& base);

  /// a(lambda) = sum_r (2 pi i)^{p-r} lambda^{(x)(p-r)} -| A_r, lambda in chart
  /// coframe components.
  CMat operator()(const Vec& lambda) const;
  const ChartPoint& base() const { return base_; }
  std::size_t out_dim() const { return out_dim_; }
  std::size_t in_dim() const { return in_dim_; }

 private:
  ChartPoint base_;
  int order_;
  int dim_;
  std::size_t out_dim_;
  std::size_t in_dim_;
  std::vector<CoefficientValue> coeffs_;
};

SymbolValue total_symbol(const DifferentialOperator& a, const CotangentVector& lambda);

/// Applies an out_dim x in_dim block to a fiber of the input type.
FiberValue apply_block(const CMat& block, const FiberValue& v, TensorType out_type);

}  // namespace rfi
