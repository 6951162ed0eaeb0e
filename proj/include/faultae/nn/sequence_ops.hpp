#pragma once

#include "faultae/nn/dense.hpp"

namespace faultae::nn {

/// batch x k -> batch x T x k, every step a copy of x.
template <class Derived>
Sequence<typename Derived::Scalar> repeat_vector(const Eigen::MatrixBase<Derived>& x, Index steps) {
  if (steps < 1) throw ValidationError("repeat_vector: step count must be positive");
  return Sequence<typename Derived::Scalar>(static_cast<std::size_t>(steps), x);
}

/// Adjoint of repeat_vector: sum over steps.
template <class Scalar>
Mat<Scalar> repeat_vector_backward(const Sequence<Scalar>& grad) {
  if (grad.empty()) throw ValidationError("repeat_vector_backward: empty gradient");
  Mat<Scalar> sum = grad.front();
  for (std::size_t s = 1; s < grad.size(); ++s) {
    ensure_shape(grad[s], sum.rows(), sum.cols(), "repeat_vector_backward step");
    sum += grad[s];
  }
  return sum;
}

/// One shared dense layer applied at every time step.
template <class Scalar>
Sequence<Scalar> time_distributed_forward(const Sequence<Scalar>& x, const DenseLayer<Scalar>& layer,
                                          std::vector<DenseCache<Scalar>>* caches = nullptr) {
  Sequence<Scalar> out;
  out.reserve(x.size());
  if (caches) caches->assign(x.size(), {});
  for (std::size_t s = 0; s < x.size(); ++s) {
    out.push_back(dense_forward(x[s], layer, caches ? &(*caches)[s] : nullptr));
  }
  return out;
}

template <class Scalar>
struct TimeDistributedGradients {
  Sequence<Scalar> input;
  DenseLayer<Scalar> params;
};

template <class Scalar>
TimeDistributedGradients<Scalar> time_distributed_backward(const Sequence<Scalar>& grad_out,
                                                           const DenseLayer<Scalar>& layer,
                                                           const std::vector<DenseCache<Scalar>>& caches) {
  if (grad_out.size() != caches.size()) {
    throw ValidationError("time_distributed_backward: step count mismatch");
  }
  TimeDistributedGradients<Scalar> g;
  g.params = layer.zeros_like();
  g.input.reserve(grad_out.size());
  for (std::size_t s = 0; s < grad_out.size(); ++s) {
    auto step = dense_backward(grad_out[s], layer, caches[s]);
    g.params.weight += step.params.weight;
    g.params.bias += step.params.bias;
    g.input.push_back(std::move(step.input));
  }
  return g;
}

}  // namespace faultae::nn
