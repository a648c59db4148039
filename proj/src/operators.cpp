#include "rfi/operators.hpp"

#include <algorithm>
#include <array>
#include <numeric>

#include "rfi/errors.hpp"
#include "rfi/transport.hpp"

namespace rfi {

namespace {

std::size_t ipow(int n, int k) {
  std::size_t out = 1;
  for (int i = 0; i < k; ++i) out *= static_cast<std::size_t>(n);
  return out;
}

std::vector<int> digits_of(std::size_t flat, int n, int k) {
  std::vector<int> d(static_cast<std::size_t>(k));
  for (int m = k - 1; m >= 0; --m) {
    d[static_cast<std::size_t>(m)] = static_cast<int>(flat % static_cast<std::size_t>(n));
    flat /= static_cast<std::size_t>(n);
  }
  return d;
}

std::size_t flat_of(const std::vector<int>& digits, int n) {
  std::size_t flat = 0;
  for (int d : digits) flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(d);
  return flat;
}

std::size_t reversed_flat(std::size_t flat, int n, int k) {
  std::vector<int> d = digits_of(flat, n, k);
  std::reverse(d.begin(), d.end());
  return flat_of(d, n);
}

// d_k T for every k, as one fiber per direction.
using PartialsFn = std::function<std::vector<FiberValue>(const ChartPoint&)>;

PartialsFn central_partials(FieldFn field, int n, double h) {
  return [field = std::move(field), n, h](const ChartPoint& p) {
    std::vector<FiberValue> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      ChartPoint plus = p, minus = p;
      plus.coords[k] += h;
      minus.coords[k] -= h;
      FiberValue d = field(plus) - field(minus);
      d *= 1.0 / (2.0 * h);
      out.push_back(std::move(d));
    }
    return out;
  };
}

PartialsFn fourth_order_partials(FieldFn field, int n, double h) {
  return [field = std::move(field), n, h](const ChartPoint& p) {
    std::vector<FiberValue> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      auto at = [&](double offset) {
        ChartPoint q = p;
        q.coords[k] += offset;
        return field(q);
      };
      FiberValue d = 8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h));
      d *= 1.0 / (12.0 * h);
      out.push_back(std::move(d));
    }
    return out;
  };
}

PartialsFn closed_form_partials(const ManifoldChart& chart, const TensorSection& u) {
  return [chart, u](const ChartPoint& p) {
    const FiberValue all = u.partials(chart.wrap(p));
    const int n = chart.dim();
    const TensorType t = u.type;
    std::vector<FiberValue> out(static_cast<std::size_t>(n), FiberValue(t, n));
    for (std::size_t i = 0; i < t.fiber_dim(n); ++i)
      for (int k = 0; k < n; ++k)
        out[static_cast<std::size_t>(k)][i] = all[i * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)];
    return out;
  };
}

// nabla T from T and its chart partials: append the derivative axis and add
// +Gamma per contravariant axis, -Gamma per covariant axis.
FieldFn covariant_from_partials(const ManifoldChart& chart, FieldFn field, PartialsFn partials) {
  return [chart, field = std::move(field), partials = std::move(partials)](const ChartPoint& p) {
    const int n = chart.dim();
    const FiberValue t = field(p);
    const std::vector<FiberValue> d = partials(p);
    const Christoffel gamma = chart.christoffel_at(p);
    const TensorType type = t.type();
    FiberValue out({type.contravariant, type.covariant + 1}, n);
    for (int k = 0; k < n; ++k) {
      FiberValue term = d[static_cast<std::size_t>(k)];
      if (type.rank() > 0) {
        Mat up(n, n), down(n, n);
        for (int i = 0; i < n; ++i)
          for (int s = 0; s < n; ++s) {
            up(i, s) = gamma(i, k, s);
            down(i, s) = -gamma(s, k, i);
          }
        for (int axis = 0; axis < type.rank(); ++axis)
          term += transform_axis(t, axis, axis < type.contravariant ? up : down);
      }
      for (std::size_t i = 0; i < t.size(); ++i)
        out[i * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)] = term[i];
    }
    return out;
  };
}

void require_order(int k) {
  if (k < 0 || k > kMaxRepresentableOrder)
    throw Error(ErrorCode::OrderTooHigh, "covariant derivatives above order 3 are not supported");
}

}  // namespace

FieldFn covariant_derivative_field(const ManifoldChart& chart, const TensorSection& u, int k,
                                   const DerivativeConfig& cfg) {
  require_order(k);
  const int n = chart.dim();
  FieldFn field = [chart, u](const ChartPoint& p) { return u(chart.wrap(p)); };
  if (k == 0) return field;
  PartialsFn first = u.partials ? closed_form_partials(chart, u) : central_partials(field, n, cfg.h_fd);
  field = covariant_from_partials(chart, field, std::move(first));
  for (int level = 2; level <= k; ++level)
    field = covariant_from_partials(chart, field, fourth_order_partials(field, n, cfg.h_nested));
  return field;
}

FiberValue covariant_derivative(const ManifoldChart& chart, const TensorSection& u,
                                const ChartPoint& x, const DerivativeConfig& cfg) {
  return nth_covariant_derivative(chart, u, x, 1, cfg);
}

FiberValue second_covariant_derivative(const ManifoldChart& chart, const TensorSection& u,
                                       const ChartPoint& x, const DerivativeConfig& cfg) {
  return nth_covariant_derivative(chart, u, x, 2, cfg);
}

FiberValue nth_covariant_derivative(const ManifoldChart& chart, const TensorSection& u,
                                    const ChartPoint& x, int k, const DerivativeConfig& cfg) {
  if (!chart.contains(x)) throw Error(ErrorCode::OutOfChart, chart.name() + ": derivative point outside chart");
  return covariant_derivative_field(chart, u, k, cfg)(x);
}

FiberValue contract_derivative(const FiberValue& derivative, std::span<const Vec> etas) {
  FiberValue out = derivative;
  for (const Vec& eta : etas) out = contract_last_axis(out, eta);
  return out;
}

FiberValue symmetrize_derivative(const FiberValue& derivative, std::span<const Vec> etas) {
  std::vector<int> order(etas.size());
  std::iota(order.begin(), order.end(), 0);
  FiberValue acc;
  int count = 0;
  do {
    std::vector<Vec> permuted;
    for (int i : order) permuted.push_back(etas[static_cast<std::size_t>(i)]);
    FiberValue term = contract_derivative(derivative, permuted);
    if (count == 0) {
      acc = std::move(term);
    } else {
      acc += term;
    }
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  acc *= 1.0 / count;
  return acc;
}

FiberValue symmetrized_derivative_via_exp(const ManifoldChart& chart, const TensorSection& u,
                                          const ChartPoint& x, std::span<const Vec> etas,
                                          const DerivativeConfig& cfg) {
  const int n = chart.dim();
  auto pulled = [&](const Vec& xi) {
    return transport_field_pullback(chart, u, x, TangentVector{x, xi}, cfg.steps);
  };
  const double h = cfg.h_exp;
  switch (etas.size()) {
    case 0:
      return u(chart.wrap(x));
    case 1: {
      FiberValue d = pulled(h * etas[0]) - pulled(-h * etas[0]);
      d *= 1.0 / (2.0 * h);
      return d;
    }
    case 2: {
      const Vec& a = etas[0];
      const Vec& b = etas[1];
      FiberValue d = pulled(h * (a + b)) - pulled(h * (a - b)) - pulled(h * (b - a)) + pulled(-h * (a + b));
      d *= 1.0 / (4.0 * h * h);
      return d;
    }
    default:
      (void)n;
      throw Error(ErrorCode::OrderTooHigh, "exp-based symmetrized derivatives are implemented for p <= 2");
  }
}

FiberValue radial_derivative_via_exp(const ManifoldChart& chart, const TensorSection& u,
                                     const ChartPoint& x, const Vec& eta, int p,
                                     const DerivativeConfig& cfg) {
  auto pulled = [&](double t) {
    return transport_field_pullback(chart, u, x, TangentVector{x, t * eta}, cfg.steps);
  };
  const double h = cfg.h_exp;
  if (p == 1) {
    FiberValue d = pulled(h) - pulled(-h);
    d *= 1.0 / (2.0 * h);
    return d;
  }
  if (p == 2) {
    FiberValue d = pulled(h) + pulled(-h) - 2.0 * pulled(0.0);
    d *= 1.0 / (h * h);
    return d;
  }
  throw Error(ErrorCode::OrderTooHigh, "radial exp derivatives are implemented for p in {1, 2}");
}

FiberValue curvature_commutator(const ManifoldChart& chart, const TensorSection& u,
                                const ChartPoint& x, const Vec& eta1, const Vec& eta2,
                                const DerivativeConfig& cfg) {
  if (!(u.type == TensorType{1, 0})) throw Error(ErrorCode::TypeMismatch, "curvature_commutator expects a vector field");
  const FiberValue d2 = second_covariant_derivative(chart, u, x, cfg);
  const std::array<Vec, 2> forward{eta1, eta2};
  const std::array<Vec, 2> backward{eta2, eta1};
  return contract_derivative(d2, forward) - contract_derivative(d2, backward);
}

// --- coefficients ----------------------------------------------------------

CoefficientValue::CoefficientValue(int symbol_rank_, int dim_, std::size_t out_dim_, std::size_t in_dim_)
    : symbol_rank(symbol_rank_),
      dim(dim_),
      out_dim(out_dim_),
      in_dim(in_dim_),
      data(ipow(dim_, symbol_rank_) * out_dim_ * in_dim_, Complex(0.0)) {}

std::size_t CoefficientValue::symbol_size() const { return ipow(dim, symbol_rank); }

CoefficientValue symmetrize_symbol_axes(const CoefficientValue& c) {
  if (c.symbol_rank < 2) return c;
  CoefficientValue out(c.symbol_rank, c.dim, c.out_dim, c.in_dim);
  std::vector<int> perm(static_cast<std::size_t>(c.symbol_rank));
  std::iota(perm.begin(), perm.end(), 0);
  int count = 0;
  do {
    ++count;
    for (std::size_t s = 0; s < c.symbol_size(); ++s) {
      const std::vector<int> d = digits_of(s, c.dim, c.symbol_rank);
      std::vector<int> pd(d.size());
      for (std::size_t m = 0; m < d.size(); ++m) pd[m] = d[static_cast<std::size_t>(perm[m])];
      const std::size_t src = flat_of(pd, c.dim);
      for (std::size_t o = 0; o < c.out_dim; ++o)
        for (std::size_t i = 0; i < c.in_dim; ++i) out(s, o, i) += c(src, o, i);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& v : out.data) v /= static_cast<double>(count);
  return out;
}

DifferentialOperator::DifferentialOperator(int order, int dim, TensorType in_type, TensorType out_type,
                                           std::vector<CoefficientFn> coeffs, SymbolAxes axes,
                                           std::string label)
    : order_(order),
      dim_(dim),
      in_(in_type),
      out_(out_type),
      coeffs_(std::move(coeffs)),
      axes_(axes),
      label_(std::move(label)) {
  if (order_ < 0 || order_ > kMaxRepresentableOrder)
    throw Error(ErrorCode::OrderTooHigh, "operators above order 3 are not representable");
  if (static_cast<int>(coeffs_.size()) != order_ + 1)
    throw Error(ErrorCode::ShapeMismatch, "an order-p operator needs p + 1 coefficient fields");
}

CoefficientValue DifferentialOperator::coefficient(int r, const ChartPoint& x) const {
  if (r < 0 || r > order_) throw Error(ErrorCode::ShapeMismatch, "coefficient index out of range");
  CoefficientValue c = coeffs_[static_cast<std::size_t>(r)](x);
  if (c.symbol_rank != order_ - r || c.dim != dim_ || c.out_dim != out_.fiber_dim(dim_) ||
      c.in_dim != in_.fiber_dim(dim_) || c.data.size() != c.symbol_size() * c.out_dim * c.in_dim)
    throw Error(ErrorCode::ShapeMismatch, "coefficient field returned a mis-shaped value");
  if (axes_ == SymbolAxes::symmetrize) return symmetrize_symbol_axes(c);
  return c;
}

namespace {

CoefficientFn zero_coefficient(int rank, int dim, std::size_t out_dim, std::size_t in_dim) {
  return [=](const ChartPoint&) { return CoefficientValue(rank, dim, out_dim, in_dim); };
}

}  // namespace

DifferentialOperator DifferentialOperator::identity(int dim, TensorType type) {
  const std::size_t m = type.fiber_dim(dim);
  CoefficientFn a0 = [=](const ChartPoint&) {
    CoefficientValue c(0, dim, m, m);
    for (std::size_t i = 0; i < m; ++i) c(0, i, i) = 1.0;
    return c;
  };
  return DifferentialOperator(0, dim, type, type, {a0}, SymbolAxes::symmetrize, "identity");
}

DifferentialOperator DifferentialOperator::covariant_derivative_along(
    int dim, TensorType type, std::function<Vec(const ChartPoint&)> eta) {
  const std::size_t m = type.fiber_dim(dim);
  CoefficientFn a0 = [=](const ChartPoint& x) {
    const Vec e = eta(x);
    CoefficientValue c(1, dim, m, m);
    for (int s = 0; s < dim; ++s)
      for (std::size_t i = 0; i < m; ++i) c(static_cast<std::size_t>(s), i, i) = e[s];
    return c;
  };
  return DifferentialOperator(1, dim, type, type, {a0, zero_coefficient(0, dim, m, m)},
                              SymbolAxes::symmetrize, "covariant_derivative");
}

DifferentialOperator DifferentialOperator::laplace_beltrami(const ManifoldChart& chart, TensorType type) {
  const int dim = chart.dim();
  const std::size_t m = type.fiber_dim(dim);
  CoefficientFn a0 = [=](const ChartPoint& x) {
    const Mat ginv = chart.inverse_metric_at(x);
    CoefficientValue c(2, dim, m, m);
    for (int s = 0; s < dim; ++s)
      for (int t = 0; t < dim; ++t)
        for (std::size_t i = 0; i < m; ++i)
          c(static_cast<std::size_t>(s * dim + t), i, i) = ginv(s, t);
    return c;
  };
  return DifferentialOperator(2, dim, type, type,
                              {a0, zero_coefficient(1, dim, m, m), zero_coefficient(0, dim, m, m)},
                              SymbolAxes::symmetrize, "laplace_beltrami");
}

DifferentialOperator DifferentialOperator::third_derivative_along(int dim, TensorType type, const Vec& eta1,
                                                                  const Vec& eta2, const Vec& eta3) {
  const std::size_t m = type.fiber_dim(dim);
  CoefficientFn a0 = [=](const ChartPoint&) {
    CoefficientValue c(3, dim, m, m);
    for (int s1 = 0; s1 < dim; ++s1)
      for (int s2 = 0; s2 < dim; ++s2)
        for (int s3 = 0; s3 < dim; ++s3) {
          const double w = eta1[s1] * eta2[s2] * eta3[s3];
          const auto s = static_cast<std::size_t>((s1 * dim + s2) * dim + s3);
          for (std::size_t i = 0; i < m; ++i) c(s, i, i) = w;
        }
    return c;
  };
  return DifferentialOperator(3, dim, type, type,
                              {a0, zero_coefficient(2, dim, m, m), zero_coefficient(1, dim, m, m),
                               zero_coefficient(0, dim, m, m)},
                              SymbolAxes::keep_as_given, "third_derivative");
}

DifferentialOperator DifferentialOperator::linear_combination(Complex alpha, const DifferentialOperator& a,
                                                              Complex beta, const DifferentialOperator& b) {
  if (!(a.in_ == b.in_) || !(a.out_ == b.out_) || a.dim_ != b.dim_)
    throw Error(ErrorCode::TypeMismatch, "linear combination of operators with different types");
  const int order = std::max(a.order_, b.order_);
  const int dim = a.dim_;
  const std::size_t out_dim = a.out_.fiber_dim(dim), in_dim = a.in_.fiber_dim(dim);
  std::vector<CoefficientFn> coeffs;
  for (int r = 0; r <= order; ++r) {
    const int ra = r - (order - a.order_);
    const int rb = r - (order - b.order_);
    coeffs.push_back([=](const ChartPoint& x) {
      CoefficientValue c(order - r, dim, out_dim, in_dim);
      if (ra >= 0) {
        const CoefficientValue ca = a.coefficient(ra, x);
        for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += alpha * ca.data[i];
      }
      if (rb >= 0) {
        const CoefficientValue cb = b.coefficient(rb, x);
        for (std::size_t i = 0; i < c.data.size(); ++i) c.data[i] += beta * cb.data[i];
      }
      return c;
    });
  }
  const SymbolAxes axes = (a.axes_ == SymbolAxes::keep_as_given || b.axes_ == SymbolAxes::keep_as_given)
                              ? SymbolAxes::keep_as_given
                              : SymbolAxes::symmetrize;
  return DifferentialOperator(order, dim, a.in_, a.out_, std::move(coeffs), axes, "linear_combination");
}

// --- application and symbols -------------------------------------------------

FiberValue direct_apply(const ManifoldChart& chart, const DifferentialOperator& a, const TensorSection& u,
                        const ChartPoint& x, const DerivativeConfig& cfg) {
  if (!(u.type == a.in_type()) || a.dim() != chart.dim())
    throw Error(ErrorCode::TypeMismatch, "operator input type does not match the section");
  const int n = chart.dim();
  FiberValue out(a.out_type(), n);
  for (int r = 0; r <= a.order(); ++r) {
    const int k = a.order() - r;
    const CoefficientValue c = a.coefficient(r, x);
    if (std::all_of(c.data.begin(), c.data.end(), [](Complex v) { return v == Complex(0.0); })) continue;
    const FiberValue d = nth_covariant_derivative(chart, u, x, k, cfg);
    const std::size_t nk = ipow(n, k);
    for (std::size_t s = 0; s < c.symbol_size(); ++s) {
      const std::size_t slot = reversed_flat(s, n, k);
      for (std::size_t o = 0; o < c.out_dim; ++o)
        for (std::size_t i = 0; i < c.in_dim; ++i) out[o] += c(s, o, i) * d[i * nk + slot];
    }
  }
  return out;
}

SymbolEvaluator::SymbolEvaluator(const DifferentialOperator& a, const ChartPoint& base)
    : base_(base),
      order_(a.order()),
      dim_(a.dim()),
      out_dim_(a.out_type().fiber_dim(a.dim())),
      in_dim_(a.in_type().fiber_dim(a.dim())) {
  for (int r = 0; r <= order_; ++r) coeffs_.push_back(a.coefficient(r, base));
}

CMat SymbolEvaluator::operator()(const Vec& lambda) const {
  if (lambda.size() != dim_) throw Error(ErrorCode::ShapeMismatch, "covector has wrong dimension");
  CMat out = CMat::Zero(static_cast<Eigen::Index>(out_dim_), static_cast<Eigen::Index>(in_dim_));
  const Complex two_pi_i(0.0, kTwoPi);
  for (int r = 0; r <= order_; ++r) {
    const CoefficientValue& c = coeffs_[static_cast<std::size_t>(r)];
    const int k = order_ - r;
    Complex factor = 1.0;
    for (int m = 0; m < k; ++m) factor *= two_pi_i;
    for (std::size_t s = 0; s < c.symbol_size(); ++s) {
      double w = 1.0;
      std::size_t rest = s;
      for (int m = 0; m < k; ++m) {
        w *= lambda[static_cast<Eigen::Index>(rest % static_cast<std::size_t>(dim_))];
        rest /= static_cast<std::size_t>(dim_);
      }
      if (w == 0.0) continue;
      const Complex scale = factor * w;
      for (std::size_t o = 0; o < out_dim_; ++o)
        for (std::size_t i = 0; i < in_dim_; ++i)
          out(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) += scale * c(s, o, i);
    }
  }
  return out;
}

SymbolValue total_symbol(const DifferentialOperator& a, const CotangentVector& lambda) {
  const SymbolEvaluator eval(a, lambda.base);
  return SymbolValue{lambda.base, eval(lambda.comps)};
}

FiberValue apply_block(const CMat& block, const FiberValue& v, TensorType out_type) {
  if (static_cast<std::size_t>(block.cols()) != v.size())
    throw Error(ErrorCode::ShapeMismatch, "symbol block does not match the fiber");
  FiberValue out(out_type, v.dim());
  if (static_cast<std::size_t>(block.rows()) != out.size())
    throw Error(ErrorCode::ShapeMismatch, "symbol block does not match the output type");
  for (Eigen::Index o = 0; o < block.rows(); ++o) {
    Complex acc = 0.0;
    for (Eigen::Index i = 0; i < block.cols(); ++i) acc += block(o, i) * v[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(o)] = acc;
  }
  return out;
}

}  // namespace rfi
