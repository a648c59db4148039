#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "rfi/numerics.hpp"

namespace rfi {

/// T^{(x) a} (x) (T*)^{(x) b}. Fibers store the a contravariant axes first,
/// then the b covariant axes, row-major.
struct TensorType {
  int contravariant = 0;
  int covariant = 0;

  int rank() const { return contravariant + covariant; }
  std::size_t fiber_dim(int n) const;
  friend bool operator==(const TensorType&, const TensorType&) = default;
};

/// Complex tensor components at one point, in the chart (co)frame.
class FiberValue {
 public:
  FiberValue() = default;
  FiberValue(TensorType type, int n);
  FiberValue(TensorType type, int n, std::vector<Complex> comps);

  static FiberValue scalar(Complex value, int n);
  static FiberValue vector(const Vec& v);
  static FiberValue covector(const Vec& v);

  TensorType type() const { return type_; }
  int dim() const { return n_; }
  std::size_t size() const { return comps_.size(); }

  std::span<const Complex> comps() const { return comps_; }
  std::span<Complex> comps() { return comps_; }
  Complex& operator[](std::size_t i) { return comps_[i]; }
  Complex operator[](std::size_t i) const { return comps_[i]; }
  Complex at(std::initializer_list<int> index) const;

  FiberValue& operator+=(const FiberValue& other);
  FiberValue& operator-=(const FiberValue& other);
  FiberValue& operator*=(Complex s);
  friend FiberValue operator+(FiberValue a, const FiberValue& b) { return a += b; }
  friend FiberValue operator-(FiberValue a, const FiberValue& b) { return a -= b; }
  friend FiberValue operator*(Complex s, FiberValue a) { return a *= s; }

  double max_abs() const;
  bool is_zero() const;

 private:
  TensorType type_{};
  int n_ = 0;
  std::vector<Complex> comps_;
};

/// Throws ShapeMismatch unless both fibers have the same type and dimension.
void require_same_shape(const FiberValue& a, const FiberValue& b);
double max_abs_difference(const FiberValue& a, const FiberValue& b);

/// Multiplies every contravariant axis by `contravariant_map` and every
/// covariant axis by `covariant_map` (new_i = sum_j M(i, j) old_j).
FiberValue transform_axes(const FiberValue& v, const Mat& contravariant_map, const Mat& covariant_map);

/// Applies `map` on a single axis.
FiberValue transform_axis(const FiberValue& v, int axis, const Mat& map);

/// Norm induced by g on the fiber (sesquilinear extension).
double fiber_norm(const FiberValue& v, const Mat& metric);

/// Sesquilinear inner product induced by g.
Complex fiber_inner(const FiberValue& u, const FiberValue& v, const Mat& metric);

/// v (x) w with the result's axes reordered to contravariant-first.
FiberValue tensor_product(const FiberValue& v, const FiberValue& w);

/// Contracts the last (covariant) axis with the vector eta.
FiberValue contract_last_axis(const FiberValue& v, const Vec& eta);

/// Full contraction of a vector fiber with a covector fiber of the same
/// dimension: sum_i v^i alpha_i.
Complex contract(const FiberValue& covector, const FiberValue& vector);

}  // namespace rfi
