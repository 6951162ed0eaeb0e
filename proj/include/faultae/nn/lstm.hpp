#pragma once

#include <array>

#include "faultae/nn/init.hpp"
#include "faultae/nn/tensor.hpp"

namespace faultae::nn {

enum Gate : std::size_t { kInputGate = 0, kForgetGate = 1, kCandidate = 2, kOutputGate = 3 };
inline constexpr std::array<const char*, 4> kGateNames = {"input", "forget", "candidate", "output"};

template <class Scalar>
struct LstmGate {
  Mat<Scalar> input_weight;      // units x in
  Mat<Scalar> recurrent_weight;  // units x units
  Vec<Scalar> bias;              // units
};

/// Standard LSTM cell, zero initial state:
///   i = sigm(x Wi^T + h Ui^T + bi), f = sigm(...), o = sigm(...), g = tanh(...)
///   c <- f * c + i * g,  h <- o * tanh(c)
template <class Scalar>
struct LstmLayer {
  std::array<LstmGate<Scalar>, 4> gates;
  bool return_sequences = true;

  Index units() const { return gates[0].input_weight.rows(); }
  Index inputs() const { return gates[0].input_weight.cols(); }
  Index parameter_count() const { return 4 * (units() * inputs() + units() * units() + units()); }

  static LstmLayer zeros(Index in, Index units, bool return_sequences) {
    LstmLayer l;
    for (auto& g : l.gates) {
      g.input_weight = Mat<Scalar>::Zero(units, in);
      g.recurrent_weight = Mat<Scalar>::Zero(units, units);
      g.bias = Vec<Scalar>::Zero(units);
    }
    l.return_sequences = return_sequences;
    return l;
  }

  LstmLayer zeros_like() const { return zeros(inputs(), units(), return_sequences); }

  /// Gate-major order: W, U, b for input, forget, candidate, output.
  TensorViews<Scalar> tensors() {
    TensorViews<Scalar> v;
    for (auto& g : gates) {
      v.push_back(flat(g.input_weight));
      v.push_back(flat(g.recurrent_weight));
      v.push_back(flat(g.bias));
    }
    return v;
  }
  ConstTensorViews<Scalar> tensors() const {
    ConstTensorViews<Scalar> v;
    for (const auto& g : gates) {
      v.push_back(flat(g.input_weight));
      v.push_back(flat(g.recurrent_weight));
      v.push_back(flat(g.bias));
    }
    return v;
  }
};

/// Glorot-uniform weights, zero biases except the forget gate which starts at 1.
template <class Scalar>
LstmLayer<Scalar> make_lstm(Index in, Index units, bool return_sequences, Rng& rng) {
  LstmLayer<Scalar> l;
  for (std::size_t k = 0; k < 4; ++k) {
    auto& g = l.gates[k];
    g.input_weight = glorot_uniform<Scalar>(units, in, in, units, rng);
    g.recurrent_weight = glorot_uniform<Scalar>(units, units, units, units, rng);
    g.bias = Vec<Scalar>::Constant(units, k == kForgetGate ? Scalar(1) : Scalar(0));
  }
  l.return_sequences = return_sequences;
  return l;
}

template <class Scalar>
struct LstmStepCache {
  Mat<Scalar> x, h_prev, c_prev;
  std::array<Mat<Scalar>, 4> act;  // post-nonlinearity gate values
  Mat<Scalar> c, tanh_c;
};

template <class Scalar>
struct LstmCache {
  std::vector<LstmStepCache<Scalar>> steps;
};

template <class Scalar>
struct LstmGradients {
  Sequence<Scalar> input;
  LstmLayer<Scalar> params;
};

namespace detail {
template <class Scalar>
Mat<Scalar> sigmoid(const Mat<Scalar>& z) {
  return (Scalar(1) / (Scalar(1) + (-z.array()).exp())).matrix();
}
}  // namespace detail

/// Runs the layer over a sequence. The result holds every hidden state when
/// return_sequences is set, otherwise a single entry with the final state.
template <class Scalar>
Sequence<Scalar> lstm_forward(const Sequence<Scalar>& x, const LstmLayer<Scalar>& layer,
                              LstmCache<Scalar>* cache = nullptr) {
  if (x.empty()) throw ValidationError("lstm_forward: empty sequence");
  const Index batch = x.front().rows();
  const Index units = layer.units();
  Mat<Scalar> h = Mat<Scalar>::Zero(batch, units);
  Mat<Scalar> c = Mat<Scalar>::Zero(batch, units);
  Sequence<Scalar> out;
  if (cache) cache->steps.clear();

  for (const auto& xt : x) {
    ensure_shape(xt, batch, layer.inputs(), "lstm_forward input step");
    std::array<Mat<Scalar>, 4> act;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& g = layer.gates[k];
      Mat<Scalar> z = (xt * g.input_weight.transpose() + h * g.recurrent_weight.transpose())
                          .rowwise() +
                      g.bias.transpose();
      act[k] = (k == kCandidate) ? Mat<Scalar>(z.array().tanh()) : detail::sigmoid(z);
    }
    Mat<Scalar> c_next = act[kForgetGate].cwiseProduct(c) + act[kInputGate].cwiseProduct(act[kCandidate]);
    Mat<Scalar> tanh_c = c_next.array().tanh();
    Mat<Scalar> h_next = act[kOutputGate].cwiseProduct(tanh_c);
    ensure_finite(h_next, "lstm hidden state");
    if (cache) cache->steps.push_back({xt, h, c, act, c_next, tanh_c});
    h = std::move(h_next);
    c = std::move(c_next);
    if (layer.return_sequences) out.push_back(h);
  }
  if (!layer.return_sequences) out.push_back(h);
  return out;
}

/// Backpropagation through time. grad_out has the shape of lstm_forward's result.
template <class Scalar>
LstmGradients<Scalar> lstm_backward(const Sequence<Scalar>& grad_out, const LstmLayer<Scalar>& layer,
                                    const LstmCache<Scalar>& cache) {
  const auto steps = cache.steps.size();
  if (steps == 0) throw ValidationError("lstm_backward: empty cache");
  const std::size_t expected = layer.return_sequences ? steps : 1;
  if (grad_out.size() != expected) {
    throw ValidationError("lstm_backward: gradient sequence length mismatch");
  }
  const Index batch = cache.steps.front().x.rows();
  const Index units = layer.units();

  LstmGradients<Scalar> g;
  g.params = layer.zeros_like();
  g.input.resize(steps);
  Mat<Scalar> dh_next = Mat<Scalar>::Zero(batch, units);
  Mat<Scalar> dc_next = Mat<Scalar>::Zero(batch, units);

  for (std::size_t s = steps; s-- > 0;) {
    const auto& st = cache.steps[s];
    Mat<Scalar> dh = dh_next;
    if (layer.return_sequences) {
      ensure_shape(grad_out[s], batch, units, "lstm_backward grad_out step");
      dh += grad_out[s];
    } else if (s + 1 == steps) {
      ensure_shape(grad_out[0], batch, units, "lstm_backward grad_out");
      dh += grad_out[0];
    }
    const auto& i = st.act[kInputGate];
    const auto& f = st.act[kForgetGate];
    const auto& gc = st.act[kCandidate];
    const auto& o = st.act[kOutputGate];

    Mat<Scalar> dc = dc_next + dh.cwiseProduct(o).cwiseProduct(
                                   (Scalar(1) - st.tanh_c.array().square()).matrix());
    std::array<Mat<Scalar>, 4> dz;
    dz[kOutputGate] = (dh.array() * st.tanh_c.array() * o.array() * (Scalar(1) - o.array())).matrix();
    dz[kInputGate] = (dc.array() * gc.array() * i.array() * (Scalar(1) - i.array())).matrix();
    dz[kForgetGate] = (dc.array() * st.c_prev.array() * f.array() * (Scalar(1) - f.array())).matrix();
    dz[kCandidate] = (dc.array() * i.array() * (Scalar(1) - gc.array().square())).matrix();

    Mat<Scalar> dx = Mat<Scalar>::Zero(batch, layer.inputs());
    dh_next.setZero();
    for (std::size_t k = 0; k < 4; ++k) {
      auto& gk = g.params.gates[k];
      const auto& wk = layer.gates[k];
      gk.input_weight.noalias() += dz[k].transpose() * st.x;
      gk.recurrent_weight.noalias() += dz[k].transpose() * st.h_prev;
      gk.bias += dz[k].colwise().sum().transpose();
      dx.noalias() += dz[k] * wk.input_weight;
      dh_next.noalias() += dz[k] * wk.recurrent_weight;
    }
    dc_next = dc.cwiseProduct(f);
    g.input[s] = std::move(dx);
  }
  return g;
}

}  // namespace faultae::nn
