#pragma once

#include <complex>
#include <cstddef>
#include <span>

#include <Eigen/Dense>

namespace rfi {

/// Largest chart dimension supported. Point-sized vectors and matrices use
/// Eigen's bounded-capacity storage so the integrators never touch the heap.
inline constexpr int kMaxDim = 4;

using Complex = std::complex<double>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Pairwise (cascade) summation. The split points depend only on the length,
/// so the result is bit-identical however the caller schedules the terms.
template <typename T>
T pairwise_sum(std::span<const T> terms) {
  constexpr std::size_t kLeaf = 8;
  if (terms.empty()) return T{};
  if (terms.size() <= kLeaf) {
    T acc = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) acc += terms[i];
    return acc;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

/// Strided variant: sums terms[offset + k*stride] for k in [0, count).
template <typename T>
T pairwise_sum_strided(const T* base, std::size_t count, std::size_t stride) {
  constexpr std::size_t kLeaf = 8;
  if (count == 0) return T{};
  if (count <= kLeaf) {
    T acc = base[0];
    for (std::size_t i = 1; i < count; ++i) acc += base[i * stride];
    return acc;
  }
  const std::size_t half = count / 2;
  return pairwise_sum_strided(base, half, stride) +
         pairwise_sum_strided(base + half * stride, count - half, stride);
}

}  // namespace rfi
