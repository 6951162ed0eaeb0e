#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "faultae/models.hpp"
#include "faultae/preprocess.hpp"
#include "faultae/training.hpp"

namespace faultae {

enum class ScoreKind { mse_point, mse_window, mahalanobis };
const char* to_string(ScoreKind k);
ScoreKind score_kind_from_string(const std::string& text);

/// Non-negative anomaly scores. `alignment` holds the original row index of
/// each scored sample, or the last row of each scored window.
struct ScoreSeries {
  std::vector<double> scores;
  std::vector<Index> alignment;
  ScoreKind kind = ScoreKind::mse_point;
  Partition source = Partition::test;

  std::size_t size() const { return scores.size(); }
};

struct ThresholdSpec {
  double alpha = 95.0;
  double tau = 0.0;
  ScoreKind kind = ScoreKind::mse_point;
  Index fitted_on = 0;
};

inline constexpr double kDefaultAlpha = 95.0;

/// Per-row mean squared residual.
Vector pointwise_mse(const Matrix& x, const Matrix& reconstruction);

/// Per-row sqrt(r^T Sigma^-1 r) with r the raw residual.
Vector mahalanobis_distance(const Matrix& x, const Matrix& reconstruction, const CovarianceModel& cov);

ScoreSeries score_pointwise_mse(const DenseAE& model, const Snapshots& items);
ScoreSeries score_window_mse(const LstmAE& model, const WindowSet& windows);
ScoreSeries score_mahalanobis(const DenseAE& model, const CovarianceModel& cov, const Snapshots& items);

/// Linear-interpolation percentile of unsorted values; alpha in [0, 100].
double percentile_linear(std::vector<double> values, double alpha);

/// Percentile cut over training scores. alpha must lie in (0, 100]; alpha = 100
/// yields the maximum. Scores from any partition other than train are refused.
ThresholdSpec fit_threshold(const ScoreSeries& train_scores, double alpha = kDefaultAlpha);

/// flag[i] = score[i] > tau.
LabelVector detect(const ScoreSeries& scores, const ThresholdSpec& spec);

Matrix extract_latent(const DenseAE& model, const Matrix& x);
Matrix extract_latent(const LstmAE& model, const WindowSet& windows);

/// Columns index, timestamp, score, flagged. `timestamps` is indexed by the
/// alignment values.
void write_scores_csv(const std::filesystem::path& path, const ScoreSeries& scores,
                      const LabelVector& flags, const std::vector<std::string>& timestamps);

/// Columns index, timestamp, z1..z8.
void write_latent_csv(const std::filesystem::path& path, const Matrix& latent,
                      const std::vector<Index>& alignment, const std::vector<std::string>& timestamps);

}  // namespace faultae
