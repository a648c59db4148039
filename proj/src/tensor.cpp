#include "rfi/tensor.hpp"

#include <cmath>

#include "rfi/errors.hpp"

namespace rfi {

namespace {

std::size_t ipow(int n, int k) {
  std::size_t out = 1;
  for (int i = 0; i < k; ++i) out *= static_cast<std::size_t>(n);
  return out;
}

}  // namespace

std::size_t TensorType::fiber_dim(int n) const { return ipow(n, rank()); }

FiberValue::FiberValue(TensorType type, int n)
    : type_(type), n_(n), comps_(type.fiber_dim(n), Complex(0.0)) {}

FiberValue::FiberValue(TensorType type, int n, std::vector<Complex> comps)
    : type_(type), n_(n), comps_(std::move(comps)) {
  if (comps_.size() != type.fiber_dim(n))
    throw Error(ErrorCode::ShapeMismatch, "fiber component count does not match its type");
}

FiberValue FiberValue::scalar(Complex value, int n) { return FiberValue({0, 0}, n, {value}); }

FiberValue FiberValue::vector(const Vec& v) {
  FiberValue out({1, 0}, static_cast<int>(v.size()));
  for (int i = 0; i < v.size(); ++i) out.comps_[static_cast<std::size_t>(i)] = v[i];
  return out;
}

FiberValue FiberValue::covector(const Vec& v) {
  FiberValue out({0, 1}, static_cast<int>(v.size()));
  for (int i = 0; i < v.size(); ++i) out.comps_[static_cast<std::size_t>(i)] = v[i];
  return out;
}

Complex FiberValue::at(std::initializer_list<int> index) const {
  if (static_cast<int>(index.size()) != type_.rank())
    throw Error(ErrorCode::ShapeMismatch, "fiber index has the wrong rank");
  std::size_t flat = 0;
  for (int i : index) flat = flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
  return comps_[flat];
}

FiberValue& FiberValue::operator+=(const FiberValue& other) {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] += other.comps_[i];
  return *this;
}

FiberValue& FiberValue::operator-=(const FiberValue& other) {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] -= other.comps_[i];
  return *this;
}

FiberValue& FiberValue::operator*=(Complex s) {
  for (auto& c : comps_) c *= s;
  return *this;
}

double FiberValue::max_abs() const {
  double worst = 0.0;
  for (const auto& c : comps_) worst = std::max(worst, std::abs(c));
  return worst;
}

bool FiberValue::is_zero() const {
  for (const auto& c : comps_)
    if (c != Complex(0.0)) return false;
  return true;
}

void require_same_shape(const FiberValue& a, const FiberValue& b) {
  if (!(a.type() == b.type()) || a.dim() != b.dim())
    throw Error(ErrorCode::ShapeMismatch, "fiber types differ");
}

double max_abs_difference(const FiberValue& a, const FiberValue& b) {
  require_same_shape(a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

FiberValue transform_axis(const FiberValue& v, int axis, const Mat& map) {
  const int n = v.dim();
  const int rank = v.type().rank();
  if (axis < 0 || axis >= rank) throw Error(ErrorCode::ShapeMismatch, "axis out of range");
  const std::size_t inner = ipow(n, rank - axis - 1);
  const std::size_t outer = ipow(n, axis);
  FiberValue out(v.type(), n);
  for (std::size_t o = 0; o < outer; ++o)
    for (int i = 0; i < n; ++i)
      for (std::size_t in = 0; in < inner; ++in) {
        Complex acc = 0.0;
        for (int j = 0; j < n; ++j) {
          const double m = map(i, j);
          if (m != 0.0) acc += m * v[(o * n + static_cast<std::size_t>(j)) * inner + in];
        }
        out[(o * n + static_cast<std::size_t>(i)) * inner + in] = acc;
      }
  return out;
}

FiberValue transform_axes(const FiberValue& v, const Mat& contravariant_map, const Mat& covariant_map) {
  FiberValue out = v;
  const TensorType t = v.type();
  for (int axis = 0; axis < t.contravariant; ++axis) out = transform_axis(out, axis, contravariant_map);
  for (int axis = t.contravariant; axis < t.rank(); ++axis) out = transform_axis(out, axis, covariant_map);
  return out;
}

FiberValue tensor_product(const FiberValue& v, const FiberValue& w) {
  if (v.dim() != w.dim()) throw Error(ErrorCode::ShapeMismatch, "tensor product of fibers of different dimension");
  const int n = v.dim();
  const TensorType tv = v.type(), tw = w.type();
  const TensorType t{tv.contravariant + tw.contravariant, tv.covariant + tw.covariant};
  FiberValue out(t, n);
  const std::size_t dv_up = ipow(n, tv.contravariant), dv_down = ipow(n, tv.covariant);
  const std::size_t dw_up = ipow(n, tw.contravariant), dw_down = ipow(n, tw.covariant);
  for (std::size_t a = 0; a < dv_up; ++a)
    for (std::size_t b = 0; b < dw_up; ++b)
      for (std::size_t c = 0; c < dv_down; ++c)
        for (std::size_t d = 0; d < dw_down; ++d) {
          const std::size_t flat = ((a * dw_up + b) * dv_down + c) * dw_down + d;
          out[flat] = v[a * dv_down + c] * w[b * dw_down + d];
        }
  return out;
}

double fiber_norm(const FiberValue& v, const Mat& metric) {
  return std::sqrt(std::max(0.0, fiber_inner(v, v, metric).real()));
}

Complex fiber_inner(const FiberValue& u, const FiberValue& v, const Mat& metric) {
  require_same_shape(u, v);
  // With g = L L^T, L^T maps vector components and L^{-1} covector components
  // into an orthonormal frame, where the inner product is Euclidean.
  const int n = u.dim();
  const Mat lower = metric.llt().matrixL();
  const Mat lt = lower.transpose();
  const Mat linv = lower.triangularView<Eigen::Lower>().solve(Mat::Identity(n, n));
  const FiberValue uo = transform_axes(u, lt, linv);
  const FiberValue vo = transform_axes(v, lt, linv);
  Complex acc = 0.0;
  for (std::size_t i = 0; i < uo.size(); ++i) acc += uo[i] * std::conj(vo[i]);
  return acc;
}

FiberValue contract_last_axis(const FiberValue& v, const Vec& eta) {
  const TensorType t = v.type();
  if (t.covariant < 1) throw Error(ErrorCode::ShapeMismatch, "no covariant axis to contract");
  const int n = v.dim();
  if (eta.size() != n) throw Error(ErrorCode::ShapeMismatch, "contraction vector has wrong dimension");
  FiberValue out({t.contravariant, t.covariant - 1}, n);
  for (std::size_t o = 0; o < out.size(); ++o) {
    Complex acc = 0.0;
    for (int k = 0; k < n; ++k) acc += eta[k] * v[o * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)];
    out[o] = acc;
  }
  return out;
}

Complex contract(const FiberValue& covector, const FiberValue& vector) {
  if (!(covector.type() == TensorType{0, 1}) || !(vector.type() == TensorType{1, 0}) ||
      covector.dim() != vector.dim())
    throw Error(ErrorCode::ShapeMismatch, "contract expects a covector and a vector");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < vector.size(); ++i) acc += covector[i] * vector[i];
  return acc;
}

}  // namespace rfi
