#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "faultae/detector.hpp"
#include "faultae/models.hpp"
#include "faultae/preprocess.hpp"
#include "faultae/training.hpp"

namespace faultae {

inline constexpr int kModelSchemaVersion = 1;

enum class Architecture { dense_ae, lstm_ae };
const char* to_string(Architecture a);
Architecture architecture_from_string(const std::string& text);

/// Everything needed to score new data: the network plus the normalisation
/// it was trained under and, once fitted, its threshold and covariance.
struct ModelBundle {
  std::variant<DenseAE, LstmAE> network;
  std::vector<std::string> channel_names;
  std::optional<ScalerParams> scaler;
  std::optional<ThresholdSpec> threshold;
  std::optional<CovarianceModel> covariance;

  Architecture architecture() const {
    return std::holds_alternative<DenseAE>(network) ? Architecture::dense_ae : Architecture::lstm_ae;
  }
  Index features() const;
  /// Score kind this bundle produces: window MSE for LSTM, Mahalanobis when a
  /// covariance is present, pointwise MSE otherwise.
  ScoreKind score_kind() const;
};

class ModelFormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

std::string model_to_json(const ModelBundle& bundle);
ModelBundle model_from_json(const std::string& text);

void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

}  // namespace faultae
