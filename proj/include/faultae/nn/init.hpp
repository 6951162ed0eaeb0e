#pragma once

#include <cmath>

#include "faultae/nn/tensor.hpp"
#include "faultae/random.hpp"

namespace faultae::nn {

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
template <class Scalar>
Mat<Scalar> glorot_uniform(Index rows, Index cols, Index fan_in, Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Mat<Scalar> m(rows, cols);
  // Row-major fill so the draw order matches the serialized layout.
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = static_cast<Scalar>(rng.uniform(-limit, limit));
  return m;
}

}  // namespace faultae::nn
