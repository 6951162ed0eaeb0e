#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "faultae/errors.hpp"

namespace faultae::nn {

using Index = Eigen::Index;

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// batch x T x features, stored as T matrices of shape batch x features.
template <class Scalar>
using Sequence = std::vector<Mat<Scalar>>;

enum class Activation { tanh, linear };

inline const char* to_string(Activation a) { return a == Activation::tanh ? "tanh" : "linear"; }

inline Activation activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::tanh;
  if (s == "linear") return Activation::linear;
  throw ValidationError("unknown activation '" + s + "'");
}

template <class Derived>
void ensure_finite(const Eigen::DenseBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string("non-finite values in ") + what);
}

template <class Derived>
void ensure_shape(const Eigen::EigenBase<Derived>& m, Index rows, Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw ValidationError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()));
  }
}

/// Flat mutable view over an Eigen tensor's storage.
template <class Derived>
auto flat(Eigen::PlainObjectBase<Derived>& m) {
  return std::span<typename Derived::Scalar>(m.data(), static_cast<std::size_t>(m.size()));
}

template <class Derived>
auto flat(const Eigen::PlainObjectBase<Derived>& m) {
  return std::span<const typename Derived::Scalar>(m.data(), static_cast<std::size_t>(m.size()));
}

template <class Scalar>
using TensorViews = std::vector<std::span<Scalar>>;
template <class Scalar>
using ConstTensorViews = std::vector<std::span<const Scalar>>;

}  // namespace faultae::nn
