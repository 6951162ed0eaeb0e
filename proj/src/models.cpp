#include "faultae/models.hpp"

#include "faultae/random.hpp"

namespace faultae {

namespace {

std::array<Index, 7> dense_widths(Index d) {
  const auto& e = DenseAE::kEncoderWidths;
  return {d, e[0], e[1], e[2], e[1], e[0], d};
}

template <class Views>
void append(Views& into, Views more) {
  into.insert(into.end(), more.begin(), more.end());
}

}  // namespace

DenseAE DenseAE::create(Index features, std::uint64_t seed) {
  if (features < 1) throw ValidationError("dense AE needs at least one feature");
  Rng rng(substream_seed(seed, 0x4445));
  const auto w = dense_widths(features);
  DenseAE m;
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    m.layers[k] = nn::make_dense<double>(w[k], w[k + 1], nn::Activation::tanh, rng);
  }
  return m;
}

DenseAE DenseAE::zeros(Index features) {
  const auto w = dense_widths(features);
  DenseAE m;
  for (std::size_t k = 0; k < m.layers.size(); ++k) {
    m.layers[k] = nn::DenseLayer<double>::zeros(w[k], w[k + 1], nn::Activation::tanh);
  }
  return m;
}

Index DenseAE::parameter_count() const {
  Index n = 0;
  for (const auto& l : layers) n += l.parameter_count();
  return n;
}

void DenseAE::validate() const {
  const auto w = dense_widths(features());
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& l = layers[k];
    if (l.inputs() != w[k] || l.outputs() != w[k + 1] || l.bias.size() != w[k + 1]) {
      throw ValidationError("dense AE layer " + std::to_string(k) + " has inconsistent shape");
    }
  }
}

nn::TensorViews<double> DenseAE::tensors() {
  nn::TensorViews<double> v;
  for (auto& l : layers) append(v, l.tensors());
  return v;
}

nn::ConstTensorViews<double> DenseAE::tensors() const {
  nn::ConstTensorViews<double> v;
  for (const auto& l : layers) append(v, l.tensors());
  return v;
}

DenseAEOutput dense_ae_forward(const Matrix& x, const DenseAE& model, DenseAECache* cache) {
  DenseAEOutput out;
  Matrix h = x;
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    h = nn::dense_forward(h, model.layers[k], cache ? &cache->layers[k] : nullptr);
    if (k == DenseAE::kLatentLayer) out.latent = h;
  }
  out.reconstruction = std::move(h);
  return out;
}

DenseAE dense_ae_backward(const Matrix& grad_reconstruction, const DenseAE& model,
                          const DenseAECache& cache) {
  DenseAE grads;
  Matrix g = grad_reconstruction;
  for (std::size_t k = model.layers.size(); k-- > 0;) {
    auto step = nn::dense_backward(g, model.layers[k], cache.layers[k]);
    grads.layers[k] = std::move(step.params);
    g = std::move(step.input);
  }
  return grads;
}

LstmAE LstmAE::create(Index features, Index window_length, std::uint64_t seed) {
  if (features < 1 || window_length < 1) {
    throw ValidationError("LSTM AE needs positive feature count and window length");
  }
  Rng rng(substream_seed(seed, 0x4C53));
  LstmAE m;
  m.encoder1 = nn::make_lstm<double>(features, 16, true, rng);
  m.encoder2 = nn::make_lstm<double>(16, kLatentWidth, false, rng);
  m.decoder1 = nn::make_lstm<double>(kLatentWidth, kLatentWidth, true, rng);
  m.decoder2 = nn::make_lstm<double>(kLatentWidth, 16, true, rng);
  m.head = nn::make_dense<double>(16, features, nn::Activation::tanh, rng);
  m.window_length = window_length;
  return m;
}

LstmAE LstmAE::zeros(Index features, Index window_length) {
  LstmAE m;
  m.encoder1 = nn::LstmLayer<double>::zeros(features, 16, true);
  m.encoder2 = nn::LstmLayer<double>::zeros(16, kLatentWidth, false);
  m.decoder1 = nn::LstmLayer<double>::zeros(kLatentWidth, kLatentWidth, true);
  m.decoder2 = nn::LstmLayer<double>::zeros(kLatentWidth, 16, true);
  m.head = nn::DenseLayer<double>::zeros(16, features, nn::Activation::tanh);
  m.window_length = window_length;
  return m;
}

Index LstmAE::parameter_count() const {
  return encoder1.parameter_count() + encoder2.parameter_count() + decoder1.parameter_count() +
         decoder2.parameter_count() + head.parameter_count();
}

void LstmAE::validate() const {
  auto check = [](const nn::LstmLayer<double>& l, Index in, Index units, bool seq, const char* name) {
    bool ok = l.return_sequences == seq && l.units() == units && l.inputs() == in;
    for (const auto& g : l.gates) {
      ok = ok && g.input_weight.rows() == units && g.input_weight.cols() == in &&
           g.recurrent_weight.rows() == units && g.recurrent_weight.cols() == units &&
           g.bias.size() == units;
    }
    if (!ok) throw ValidationError(std::string("LSTM AE layer ") + name + " has inconsistent shape");
  };
  const Index d = features();
  check(encoder1, d, 16, true, "encoder1");
  check(encoder2, 16, kLatentWidth, false, "encoder2");
  check(decoder1, kLatentWidth, kLatentWidth, true, "decoder1");
  check(decoder2, kLatentWidth, 16, true, "decoder2");
  if (head.inputs() != 16 || head.outputs() != d || head.bias.size() != d) {
    throw ValidationError("LSTM AE head has inconsistent shape");
  }
  if (window_length < 1) throw ValidationError("LSTM AE window length must be positive");
}

nn::TensorViews<double> LstmAE::tensors() {
  nn::TensorViews<double> v;
  append(v, encoder1.tensors());
  append(v, encoder2.tensors());
  append(v, decoder1.tensors());
  append(v, decoder2.tensors());
  append(v, head.tensors());
  return v;
}

nn::ConstTensorViews<double> LstmAE::tensors() const {
  nn::ConstTensorViews<double> v;
  append(v, encoder1.tensors());
  append(v, encoder2.tensors());
  append(v, decoder1.tensors());
  append(v, decoder2.tensors());
  append(v, head.tensors());
  return v;
}

LstmAEOutput lstm_ae_forward(const Sequence& x, const LstmAE& model, LstmAECache* cache) {
  if (static_cast<Index>(x.size()) != model.window_length) {
    throw ValidationError("lstm_ae_forward: expected " + std::to_string(model.window_length) +
                          " steps, got " + std::to_string(x.size()));
  }
  LstmAEOutput out;
  auto h1 = nn::lstm_forward(x, model.encoder1, cache ? &cache->encoder1 : nullptr);
  auto z = nn::lstm_forward(h1, model.encoder2, cache ? &cache->encoder2 : nullptr);
  out.latent = z.front();
  auto repeated = nn::repeat_vector(out.latent, model.window_length);
  auto h3 = nn::lstm_forward(repeated, model.decoder1, cache ? &cache->decoder1 : nullptr);
  auto h4 = nn::lstm_forward(h3, model.decoder2, cache ? &cache->decoder2 : nullptr);
  out.reconstruction = nn::time_distributed_forward(h4, model.head, cache ? &cache->head : nullptr);
  return out;
}

LstmAE lstm_ae_backward(const Sequence& grad_reconstruction, const LstmAE& model,
                        const LstmAECache& cache) {
  LstmAE grads;
  grads.window_length = model.window_length;
  auto head = nn::time_distributed_backward(grad_reconstruction, model.head, cache.head);
  grads.head = std::move(head.params);
  auto d2 = nn::lstm_backward(head.input, model.decoder2, cache.decoder2);
  grads.decoder2 = std::move(d2.params);
  auto d1 = nn::lstm_backward(d2.input, model.decoder1, cache.decoder1);
  grads.decoder1 = std::move(d1.params);
  Sequence grad_latent{nn::repeat_vector_backward(d1.input)};
  auto e2 = nn::lstm_backward(grad_latent, model.encoder2, cache.encoder2);
  grads.encoder2 = std::move(e2.params);
  auto e1 = nn::lstm_backward(e2.input, model.encoder1, cache.encoder1);
  grads.encoder1 = std::move(e1.params);
  return grads;
}

}  // namespace faultae
