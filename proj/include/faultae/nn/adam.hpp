#pragma once

#include <cmath>
#include <cstdint>

#include "faultae/nn/tensor.hpp"

namespace faultae::nn {

template <class Scalar>
struct AdamState {
  Scalar learning_rate = Scalar(1e-3);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);
  std::int64_t step = 0;
  std::vector<Vec<Scalar>> m;
  std::vector<Vec<Scalar>> v;
};

/// One Adam update over a list of tensors. Moments are allocated lazily on
/// the first call and must keep matching shapes afterwards. Gradients are
/// checked for finiteness before anything is modified.
template <class Scalar>
void adam_step(const TensorViews<Scalar>& params, const ConstTensorViews<Scalar>& grads,
               AdamState<Scalar>& state) {
  if (params.size() != grads.size()) throw ValidationError("adam_step: tensor count mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].size() != grads[k].size()) throw ValidationError("adam_step: tensor size mismatch");
    for (Scalar gi : grads[k]) {
      if (!std::isfinite(gi)) throw NumericError("adam_step: non-finite gradient");
    }
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.push_back(Vec<Scalar>::Zero(static_cast<Index>(p.size())));
      state.v.push_back(Vec<Scalar>::Zero(static_cast<Index>(p.size())));
    }
  } else if (state.m.size() != params.size()) {
    throw ValidationError("adam_step: optimizer state belongs to a different parameter set");
  }

  ++state.step;
  const Scalar bc1 = Scalar(1) - std::pow(state.beta1, static_cast<Scalar>(state.step));
  const Scalar bc2 = Scalar(1) - std::pow(state.beta2, static_cast<Scalar>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Eigen::Map<Vec<Scalar>> theta(params[k].data(), static_cast<Index>(params[k].size()));
    Eigen::Map<const Vec<Scalar>> g(grads[k].data(), static_cast<Index>(grads[k].size()));
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (m.size() != theta.size()) throw ValidationError("adam_step: moment shape mismatch");
    m = state.beta1 * m + (Scalar(1) - state.beta1) * g;
    v = state.beta2 * v + (Scalar(1) - state.beta2) * g.cwiseAbs2();
    theta.array() -= state.learning_rate * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + state.epsilon);
  }
}

}  // namespace faultae::nn
