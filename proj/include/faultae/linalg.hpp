#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>

#include "faultae/nn/tensor.hpp"

namespace faultae {

/// Inverse and inverse square root of a symmetric positive-definite matrix,
/// both built from one symmetric eigendecomposition.
template <class Scalar>
struct SpdRoots {
  nn::Mat<Scalar> inverse;
  nn::Mat<Scalar> inverse_sqrt;
  nn::Vec<Scalar> eigenvalues;
};

template <class Derived>
SpdRoots<typename Derived::Scalar> spd_roots(const Eigen::MatrixBase<Derived>& sigma) {
  using Scalar = typename Derived::Scalar;
  if (sigma.rows() != sigma.cols()) throw ValidationError("spd_roots: matrix is not square");
  const Scalar scale = std::max(Scalar(1), sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10) * scale) {
    throw ValidationError("spd_roots: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<nn::Mat<Scalar>> eig(sigma);
  if (eig.info() != Eigen::Success) throw NumericError("spd_roots: eigendecomposition failed");
  const auto& lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= Scalar(0)) {
    throw NumericError("spd_roots: matrix is not positive definite (min eigenvalue " +
                       std::to_string(static_cast<double>(lambda.minCoeff())) + ")");
  }
  const auto& v = eig.eigenvectors();
  SpdRoots<Scalar> out;
  out.eigenvalues = lambda;
  out.inverse = v * lambda.cwiseInverse().asDiagonal() * v.transpose();
  out.inverse_sqrt = v * lambda.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();
  // Symmetrize away rounding asymmetry.
  out.inverse = (out.inverse + out.inverse.transpose()) / Scalar(2);
  out.inverse_sqrt = (out.inverse_sqrt + out.inverse_sqrt.transpose()) / Scalar(2);
  return out;
}

/// (sigma + shrinkage * I)^(-1/2).
template <class Derived>
nn::Mat<typename Derived::Scalar> matrix_inverse_sqrt(const Eigen::MatrixBase<Derived>& sigma,
                                                      typename Derived::Scalar shrinkage) {
  using Scalar = typename Derived::Scalar;
  nn::Mat<Scalar> shifted = sigma;
  shifted.diagonal().array() += shrinkage;
  return spd_roots(shifted).inverse_sqrt;
}

}  // namespace faultae
