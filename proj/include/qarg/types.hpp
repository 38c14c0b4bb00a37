#pragma once

#include <cstdint>

#include <Eigen/Core>

namespace qarg {

using Index = Eigen::Index;

template <typename Scalar>
using VecT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using VecX = VecT<double>;
using MatX = MatT<double>;

/// Hard cap on dense statevectors.
inline constexpr int kMaxQubits = 20;

/// Bit mask of a 1-based qubit index in a big-endian register of `num_qubits`
/// qubits: qubit 1 is the most significant bit of the basis index.
constexpr std::uint64_t qubit_mask(int num_qubits, int qubit) {
  return std::uint64_t{1} << (num_qubits - qubit);
}

}  // namespace qarg
