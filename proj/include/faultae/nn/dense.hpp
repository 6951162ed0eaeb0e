#pragma once

#include "faultae/nn/init.hpp"
#include "faultae/nn/tensor.hpp"

namespace faultae::nn {

/// y = act(x W^T + b) applied to each row of x.
template <class Scalar>
struct DenseLayer {
  Mat<Scalar> weight;  // out x in
  Vec<Scalar> bias;    // out
  Activation activation = Activation::tanh;

  Index inputs() const { return weight.cols(); }
  Index outputs() const { return weight.rows(); }
  Index parameter_count() const { return weight.size() + bias.size(); }

  static DenseLayer zeros(Index in, Index out, Activation act) {
    return {Mat<Scalar>::Zero(out, in), Vec<Scalar>::Zero(out), act};
  }

  DenseLayer zeros_like() const { return zeros(inputs(), outputs(), activation); }

  TensorViews<Scalar> tensors() { return {flat(weight), flat(bias)}; }
  ConstTensorViews<Scalar> tensors() const { return {flat(weight), flat(bias)}; }
};

template <class Scalar>
DenseLayer<Scalar> make_dense(Index in, Index out, Activation act, Rng& rng) {
  return {glorot_uniform<Scalar>(out, in, in, out, rng), Vec<Scalar>::Zero(out), act};
}

template <class Scalar>
struct DenseCache {
  Mat<Scalar> input;
  Mat<Scalar> output;
};

template <class Scalar>
struct DenseGradients {
  Mat<Scalar> input;
  DenseLayer<Scalar> params;
};

template <class Derived>
Mat<typename Derived::Scalar> dense_forward(const Eigen::MatrixBase<Derived>& x,
                                            const DenseLayer<typename Derived::Scalar>& layer,
                                            DenseCache<typename Derived::Scalar>* cache = nullptr) {
  using Scalar = typename Derived::Scalar;
  if (x.cols() != layer.inputs()) {
    throw ValidationError("dense_forward: input has " + std::to_string(x.cols()) +
                          " columns, layer expects " + std::to_string(layer.inputs()));
  }
  Mat<Scalar> y = (x * layer.weight.transpose()).rowwise() + layer.bias.transpose();
  if (layer.activation == Activation::tanh) y = y.array().tanh().matrix();
  ensure_finite(y, "dense layer output");
  if (cache) {
    cache->input = x;
    cache->output = y;
  }
  return y;
}

/// Exact gradients given dL/dy; tanh' is taken from the cached output as 1 - y^2.
template <class Scalar>
DenseGradients<Scalar> dense_backward(const Mat<Scalar>& grad_out, const DenseLayer<Scalar>& layer,
                                      const DenseCache<Scalar>& cache) {
  ensure_shape(grad_out, cache.output.rows(), cache.output.cols(), "dense_backward grad_out");
  Mat<Scalar> pre = grad_out;
  if (layer.activation == Activation::tanh) {
    pre.array() *= (Scalar(1) - cache.output.array().square());
  }
  DenseGradients<Scalar> g;
  g.params.activation = layer.activation;
  g.params.weight = pre.transpose() * cache.input;
  g.params.bias = pre.colwise().sum().transpose();
  g.input = pre * layer.weight;
  return g;
}

}  // namespace faultae::nn
