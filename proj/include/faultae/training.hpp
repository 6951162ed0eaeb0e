#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "faultae/models.hpp"
#include "faultae/preprocess.hpp"

namespace faultae {

enum class LossKind { mse, mahalanobis };
const char* to_string(LossKind k);
LossKind loss_from_string(const std::string& text);

struct TrainConfig {
  int max_epochs = 25;
  double learning_rate = 3e-3;
  Index batch_size = 256;
  int es_patience = 10;
  int plateau_patience = 5;
  double plateau_factor = 0.2;
  LossKind loss = LossKind::mse;
  int warmup_epochs = 5;
  std::uint64_t seed = 0;

  static TrainConfig dense_defaults() { return {}; }
  static TrainConfig lstm_defaults() {
    TrainConfig c;
    c.learning_rate = 1e-3;
    return c;
  }

  /// Throws ValidationError on non-positive counts or rates.
  void validate() const;
};

/// Residual covariance with shrinkage already added, plus its inverse and
/// inverse square root.
struct CovarianceModel {
  Matrix sigma;
  Matrix inverse;
  Matrix inverse_sqrt;
  double shrinkage = 0.0;
  Index fitted_on = 0;

  Index dimension() const { return sigma.rows(); }
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;        // 0 when no epoch ran
  int monitor_from = 1;      // first epoch watched by the callbacks
  std::string stop_reason;   // "max_epochs", "early_stopping" or "none"
};

void write_train_report_csv(const std::filesystem::path& path, const TrainReport& report);

struct LossValue {
  double loss = 0.0;
  Matrix gradient;  // d loss / d reconstruction, same shape as the input
};

/// Mean over rows of the per-row mean squared residual.
LossValue mse_loss(const Matrix& x, const Matrix& reconstruction);

/// Mean squared residual over all T x d entries of a single window.
double window_mse_loss(const Matrix& window, const Matrix& reconstruction);

/// Batch mean of window_mse_loss; gradient has one entry per step.
struct SequenceLossValue {
  double loss = 0.0;
  Sequence gradient;
};
SequenceLossValue window_mse_loss(const Sequence& x, const Sequence& reconstruction);

/// Mean over rows of || (xhat - x) Sigma^(-1/2) ||_2. Rows with zero residual
/// contribute zero gradient.
LossValue mahalanobis_loss(const Matrix& x, const Matrix& reconstruction, const CovarianceModel& cov);

/// Mean-centred sample covariance (divisor N - 1) of residual rows, shrunk by
/// eps * I with eps = 1e-6 * trace / d (floored at kMinShrinkage).
CovarianceModel covariance_from_residuals(const Matrix& residuals);
inline constexpr double kMinShrinkage = 1e-12;

/// Builds a covariance model from an explicit Sigma (no shrinkage added).
CovarianceModel covariance_from_sigma(const Matrix& sigma);

/// Residual covariance of the model on healthy training rows. Rejects
/// anything but the train partition and any flagged row.
CovarianceModel estimate_residual_covariance(const DenseAE& model, const Snapshots& healthy);

struct TrainResult {
  TrainReport report;
  std::optional<CovarianceModel> covariance;
};

/// Trains in place. Items must be healthy rows from the train and validation
/// partitions respectively.
TrainResult train(DenseAE& model, const Snapshots& train_items, const Snapshots& val_items,
                  const TrainConfig& config);

/// LSTM variant on windows; only the MSE loss is supported.
TrainResult train(LstmAE& model, const WindowSet& train_items, const WindowSet& val_items,
                  const TrainConfig& config);

/// Gathers windows[which] into a T-step sequence of batch x d matrices.
Sequence gather_windows(const WindowSet& windows, std::span<const Index> which);

}  // namespace faultae
