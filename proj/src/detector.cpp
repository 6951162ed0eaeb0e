#include "faultae/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "faultae/csv.hpp"

namespace faultae {

const char* to_string(ScoreKind k) {
  switch (k) {
    case ScoreKind::mse_point:
      return "mse_point";
    case ScoreKind::mse_window:
      return "mse_window";
    case ScoreKind::mahalanobis:
      return "mahalanobis";
  }
  return "?";
}

ScoreKind score_kind_from_string(const std::string& text) {
  if (text == "mse_point") return ScoreKind::mse_point;
  if (text == "mse_window") return ScoreKind::mse_window;
  if (text == "mahalanobis") return ScoreKind::mahalanobis;
  throw ValidationError("unknown score kind '" + text + "'");
}

Vector pointwise_mse(const Matrix& x, const Matrix& reconstruction) {
  nn::ensure_shape(reconstruction, x.rows(), x.cols(), "pointwise_mse reconstruction");
  return (reconstruction - x).rowwise().squaredNorm() / static_cast<double>(x.cols());
}

Vector mahalanobis_distance(const Matrix& x, const Matrix& reconstruction, const CovarianceModel& cov) {
  nn::ensure_shape(reconstruction, x.rows(), x.cols(), "mahalanobis_distance reconstruction");
  if (cov.dimension() != x.cols()) {
    throw ValidationError("covariance is " + std::to_string(cov.dimension()) + "-dimensional, data has " +
                          std::to_string(x.cols()) + " columns");
  }
  const Matrix r = reconstruction - x;
  // r^T S^-1 r can come out a hair below zero for tiny residuals.
  return (r * cov.inverse).cwiseProduct(r).rowwise().sum().cwiseMax(0.0).cwiseSqrt();
}

namespace {

constexpr Index kChunk = 4096;

ScoreSeries collect(const Vector& scores, std::vector<Index> alignment, ScoreKind kind, Partition src) {
  ScoreSeries s;
  s.scores.assign(scores.data(), scores.data() + scores.size());
  s.alignment = std::move(alignment);
  s.kind = kind;
  s.source = src;
  for (double v : s.scores) {
    if (!std::isfinite(v)) throw NumericError("non-finite anomaly score");
  }
  return s;
}

template <class Fn>
Vector chunked_rows(const Matrix& values, Fn per_chunk) {
  Vector out(values.rows());
  for (Index start = 0; start < values.rows(); start += kChunk) {
    const Index len = std::min(kChunk, values.rows() - start);
    out.segment(start, len) = per_chunk(Matrix(values.middleRows(start, len)));
  }
  return out;
}

}  // namespace

ScoreSeries score_pointwise_mse(const DenseAE& model, const Snapshots& items) {
  if (items.values.cols() != model.features()) throw ValidationError("data width does not match the model");
  const Vector s = chunked_rows(items.values, [&](const Matrix& x) {
    return pointwise_mse(x, dense_ae_forward(x, model).reconstruction);
  });
  return collect(s, items.rows, ScoreKind::mse_point, items.partition);
}

ScoreSeries score_mahalanobis(const DenseAE& model, const CovarianceModel& cov, const Snapshots& items) {
  if (items.values.cols() != model.features()) throw ValidationError("data width does not match the model");
  const Vector s = chunked_rows(items.values, [&](const Matrix& x) {
    return mahalanobis_distance(x, dense_ae_forward(x, model).reconstruction, cov);
  });
  return collect(s, items.rows, ScoreKind::mahalanobis, items.partition);
}

ScoreSeries score_window_mse(const LstmAE& model, const WindowSet& windows) {
  if (windows.channels() != model.features() || windows.length != model.window_length) {
    throw ValidationError("window shape does not match the model");
  }
  Vector s(windows.size());
  std::vector<Index> idx;
  for (Index start = 0; start < windows.size(); start += kChunk) {
    const Index len = std::min(kChunk, windows.size() - start);
    idx.resize(static_cast<std::size_t>(len));
    std::iota(idx.begin(), idx.end(), start);
    const Sequence x = gather_windows(windows, idx);
    const Sequence recon = lstm_ae_forward(x, model).reconstruction;
    Vector acc = Vector::Zero(len);
    for (std::size_t t = 0; t < x.size(); ++t) acc += (recon[t] - x[t]).rowwise().squaredNorm();
    s.segment(start, len) = acc / static_cast<double>(windows.length * windows.channels());
  }
  return collect(s, windows.end_indices, ScoreKind::mse_window, windows.partition);
}

double percentile_linear(std::vector<double> values, double alpha) {
  if (values.empty()) throw ValidationError("percentile of an empty set");
  if (!(alpha >= 0.0 && alpha <= 100.0)) throw ValidationError("percentile level must lie in [0, 100]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * alpha / 100.0;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

ThresholdSpec fit_threshold(const ScoreSeries& train_scores, double alpha) {
  if (train_scores.source != Partition::train) {
    throw ValidationError(std::string("thresholds must be fitted on training scores, got ") +
                          to_string(train_scores.source) + " scores");
  }
  if (train_scores.scores.empty()) throw ValidationError("no training scores to fit a threshold on");
  if (!(alpha > 0.0 && alpha <= 100.0)) {
    throw ValidationError("alpha must lie in (0, 100]");
  }
  ThresholdSpec spec;
  spec.alpha = alpha;
  spec.tau = percentile_linear(train_scores.scores, alpha);
  spec.kind = train_scores.kind;
  spec.fitted_on = static_cast<Index>(train_scores.scores.size());
  return spec;
}

LabelVector detect(const ScoreSeries& scores, const ThresholdSpec& spec) {
  if (scores.kind != spec.kind) {
    throw ValidationError(std::string("threshold was fitted on ") + to_string(spec.kind) +
                          " scores, got " + to_string(scores.kind));
  }
  LabelVector flags(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) flags[i] = scores.scores[i] > spec.tau;
  return flags;
}

Matrix extract_latent(const DenseAE& model, const Matrix& x) {
  Matrix z(x.rows(), kLatentWidth);
  for (Index start = 0; start < x.rows(); start += kChunk) {
    const Index len = std::min(kChunk, x.rows() - start);
    z.middleRows(start, len) = dense_ae_forward(Matrix(x.middleRows(start, len)), model).latent;
  }
  return z;
}

Matrix extract_latent(const LstmAE& model, const WindowSet& windows) {
  Matrix z(windows.size(), kLatentWidth);
  std::vector<Index> idx;
  for (Index start = 0; start < windows.size(); start += kChunk) {
    const Index len = std::min(kChunk, windows.size() - start);
    idx.resize(static_cast<std::size_t>(len));
    std::iota(idx.begin(), idx.end(), start);
    z.middleRows(start, len) = lstm_ae_forward(gather_windows(windows, idx), model).latent;
  }
  return z;
}

namespace {
const std::string& timestamp_at(const std::vector<std::string>& timestamps, Index i) {
  static const std::string empty;
  return i >= 0 && static_cast<std::size_t>(i) < timestamps.size() ? timestamps[static_cast<std::size_t>(i)]
                                                                  : empty;
}
}  // namespace

void write_scores_csv(const std::filesystem::path& path, const ScoreSeries& scores,
                      const LabelVector& flags, const std::vector<std::string>& timestamps) {
  if (flags.size() != scores.size() || scores.alignment.size() != scores.size()) {
    throw ValidationError("scores, alignment and flags differ in length");
  }
  auto out = csv::open_output(path);
  out << "index,timestamp,score,flagged\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const Index idx = scores.alignment[i];
    out << idx << ',' << timestamp_at(timestamps, idx) << ',' << csv::format_double(scores.scores[i])
        << ',' << (flags[i] ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_latent_csv(const std::filesystem::path& path, const Matrix& latent,
                      const std::vector<Index>& alignment, const std::vector<std::string>& timestamps) {
  if (static_cast<Index>(alignment.size()) != latent.rows()) {
    throw ValidationError("latent rows and alignment differ in length");
  }
  auto out = csv::open_output(path);
  out << "index,timestamp";
  for (Index k = 1; k <= latent.cols(); ++k) out << ",z" << k;
  out << '\n';
  for (Index i = 0; i < latent.rows(); ++i) {
    const Index idx = alignment[static_cast<std::size_t>(i)];
    out << idx << ',' << timestamp_at(timestamps, idx);
    for (Index k = 0; k < latent.cols(); ++k) out << ',' << csv::format_double(latent(i, k));
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace faultae
