#pragma once

#include <array>
#include <cstdint>

#include "faultae/nn/dense.hpp"
#include "faultae/nn/lstm.hpp"
#include "faultae/nn/sequence_ops.hpp"

namespace faultae {

using Index = Eigen::Index;
using Matrix = nn::Mat<double>;
using Vector = nn::Vec<double>;
using Sequence = nn::Sequence<double>;

inline constexpr Index kLatentWidth = 8;

/// d -> 36 -> 12 -> 8 -> 12 -> 36 -> d, tanh everywhere.
struct DenseAE {
  static constexpr std::array<Index, 3> kEncoderWidths = {36, 12, kLatentWidth};
  static constexpr std::size_t kLatentLayer = 2;

  std::array<nn::DenseLayer<double>, 6> layers;

  static DenseAE create(Index features, std::uint64_t seed);
  static DenseAE zeros(Index features);
  DenseAE zeros_like() const { return zeros(features()); }

  Index features() const { return layers.front().inputs(); }
  Index parameter_count() const;

  /// Throws ValidationError unless the layer shapes chain d -> ... -> d
  /// through an 8-wide bottleneck.
  void validate() const;

  nn::TensorViews<double> tensors();
  nn::ConstTensorViews<double> tensors() const;
};

struct DenseAECache {
  std::array<nn::DenseCache<double>, 6> layers;
};

struct DenseAEOutput {
  Matrix reconstruction;  // batch x d
  Matrix latent;          // batch x 8
};

DenseAEOutput dense_ae_forward(const Matrix& x, const DenseAE& model, DenseAECache* cache = nullptr);

/// Parameter gradients (returned in DenseAE layout) given dL/d(reconstruction).
DenseAE dense_ae_backward(const Matrix& grad_reconstruction, const DenseAE& model,
                          const DenseAECache& cache);

/// LSTM(16, seq) -> LSTM(8) -> repeat T -> LSTM(8, seq) -> LSTM(16, seq)
/// -> time-distributed Dense(d, tanh).
struct LstmAE {
  nn::LstmLayer<double> encoder1;
  nn::LstmLayer<double> encoder2;
  nn::LstmLayer<double> decoder1;
  nn::LstmLayer<double> decoder2;
  nn::DenseLayer<double> head;
  Index window_length = 5;

  static LstmAE create(Index features, Index window_length, std::uint64_t seed);
  static LstmAE zeros(Index features, Index window_length);
  LstmAE zeros_like() const { return zeros(features(), window_length); }

  Index features() const { return encoder1.inputs(); }
  Index parameter_count() const;
  void validate() const;

  nn::TensorViews<double> tensors();
  nn::ConstTensorViews<double> tensors() const;
};

struct LstmAECache {
  nn::LstmCache<double> encoder1, encoder2, decoder1, decoder2;
  std::vector<nn::DenseCache<double>> head;
};

struct LstmAEOutput {
  Sequence reconstruction;  // T entries of batch x d
  Matrix latent;            // batch x 8
};

LstmAEOutput lstm_ae_forward(const Sequence& x, const LstmAE& model, LstmAECache* cache = nullptr);
LstmAE lstm_ae_backward(const Sequence& grad_reconstruction, const LstmAE& model,
                        const LstmAECache& cache);

}  // namespace faultae
