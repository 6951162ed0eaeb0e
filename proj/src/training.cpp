#include "faultae/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "faultae/csv.hpp"
#include "faultae/linalg.hpp"
#include "faultae/nn/adam.hpp"
#include "faultae/nn/callbacks.hpp"
#include "faultae/random.hpp"

namespace faultae {

const char* to_string(LossKind k) { return k == LossKind::mse ? "mse" : "mahalanobis"; }

LossKind loss_from_string(const std::string& text) {
  if (text == "mse") return LossKind::mse;
  if (text == "mahalanobis") return LossKind::mahalanobis;
  throw ValidationError("unknown loss '" + text + "' (expected mse or mahalanobis)");
}

void TrainConfig::validate() const {
  if (max_epochs < 0) throw ValidationError("max_epochs must be non-negative");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be positive");
  }
  if (batch_size < 1) throw ValidationError("batch_size must be positive");
  if (es_patience < 1 || plateau_patience < 1) throw ValidationError("patience must be positive");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0)) {
    throw ValidationError("plateau_factor must lie in (0, 1)");
  }
  if (loss == LossKind::mahalanobis && warmup_epochs < 1) {
    throw ValidationError("warmup_epochs must be positive for the mahalanobis loss");
  }
}

void write_train_report_csv(const std::filesystem::path& path, const TrainReport& report) {
  auto out = csv::open_output(path);
  out << "epoch,train_loss,val_loss,learning_rate\n";
  for (const auto& e : report.epochs) {
    out << e.epoch << ',' << csv::format_double(e.train_loss) << ','
        << csv::format_double(e.val_loss) << ',' << csv::format_double(e.learning_rate) << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

LossValue mse_loss(const Matrix& x, const Matrix& reconstruction) {
  nn::ensure_shape(reconstruction, x.rows(), x.cols(), "mse_loss reconstruction");
  if (x.size() == 0) throw ValidationError("mse_loss: empty batch");
  const double denom = static_cast<double>(x.size());  // d * batch
  LossValue v;
  Matrix residual = reconstruction - x;
  v.loss = residual.squaredNorm() / denom;
  v.gradient = (2.0 / denom) * residual;
  if (!std::isfinite(v.loss)) throw NumericError("mse_loss: non-finite loss");
  return v;
}

double window_mse_loss(const Matrix& window, const Matrix& reconstruction) {
  nn::ensure_shape(reconstruction, window.rows(), window.cols(), "window_mse_loss reconstruction");
  if (window.size() == 0) throw ValidationError("window_mse_loss: empty window");
  return (reconstruction - window).squaredNorm() / static_cast<double>(window.size());
}

SequenceLossValue window_mse_loss(const Sequence& x, const Sequence& reconstruction) {
  if (x.empty() || x.size() != reconstruction.size()) {
    throw ValidationError("window_mse_loss: step count mismatch");
  }
  const double denom = static_cast<double>(x.size()) * static_cast<double>(x.front().size());
  SequenceLossValue v;
  for (std::size_t s = 0; s < x.size(); ++s) {
    nn::ensure_shape(reconstruction[s], x[s].rows(), x[s].cols(), "window_mse_loss step");
    Matrix residual = reconstruction[s] - x[s];
    v.loss += residual.squaredNorm();
    v.gradient.push_back((2.0 / denom) * residual);
  }
  v.loss /= denom;
  if (!std::isfinite(v.loss)) throw NumericError("window_mse_loss: non-finite loss");
  return v;
}

LossValue mahalanobis_loss(const Matrix& x, const Matrix& reconstruction, const CovarianceModel& cov) {
  nn::ensure_shape(reconstruction, x.rows(), x.cols(), "mahalanobis_loss reconstruction");
  if (cov.dimension() != x.cols()) throw ValidationError("mahalanobis_loss: covariance dimension mismatch");
  if (x.rows() == 0) throw ValidationError("mahalanobis_loss: empty batch");
  const double n = static_cast<double>(x.rows());
  const Matrix residual = reconstruction - x;
  const Matrix whitened = residual * cov.inverse_sqrt;
  const Vector norms = whitened.rowwise().norm();
  LossValue v;
  v.loss = norms.sum() / n;
  v.gradient = residual * cov.inverse;
  for (Index i = 0; i < x.rows(); ++i) {
    if (norms[i] > 0.0) {
      v.gradient.row(i) /= n * norms[i];
    } else {
      v.gradient.row(i).setZero();
    }
  }
  if (!std::isfinite(v.loss)) throw NumericError("mahalanobis_loss: non-finite loss");
  return v;
}

CovarianceModel covariance_from_sigma(const Matrix& sigma) {
  auto roots = spd_roots(sigma);
  CovarianceModel m;
  m.sigma = sigma;
  m.inverse = std::move(roots.inverse);
  m.inverse_sqrt = std::move(roots.inverse_sqrt);
  return m;
}

CovarianceModel covariance_from_residuals(const Matrix& residuals) {
  const Index n = residuals.rows();
  const Index d = residuals.cols();
  if (n <= d) {
    throw ValidationError("covariance needs more than " + std::to_string(d) + " residual rows, got " +
                          std::to_string(n));
  }
  const Vector mean = residuals.colwise().mean().transpose();
  const Matrix centred = residuals.rowwise() - mean.transpose();
  Matrix sigma = (centred.transpose() * centred) / static_cast<double>(n - 1);
  sigma = ((sigma + sigma.transpose()) / 2.0).eval();
  const double shrinkage = std::max(1e-6 * sigma.trace() / static_cast<double>(d), kMinShrinkage);
  sigma.diagonal().array() += shrinkage;
  auto model = covariance_from_sigma(sigma);
  model.shrinkage = shrinkage;
  model.fitted_on = n;
  return model;
}

namespace {

void require_healthy(const LabelVector& labels, Partition actual, Partition expected,
                     const char* what) {
  if (actual != expected) {
    throw ValidationError(std::string(what) + " must come from the " + to_string(expected) +
                          " partition, got " + to_string(actual));
  }
  if (std::find(labels.begin(), labels.end(), true) != labels.end()) {
    throw ValidationError(std::string(what) + " contains samples flagged as faults");
  }
}

constexpr Index kEvalChunk = 2048;

}  // namespace

CovarianceModel estimate_residual_covariance(const DenseAE& model, const Snapshots& healthy) {
  require_healthy(healthy.labels, healthy.partition, Partition::train, "covariance fitting rows");
  Matrix residuals(healthy.size(), healthy.values.cols());
  for (Index start = 0; start < healthy.size(); start += kEvalChunk) {
    const Index len = std::min(kEvalChunk, healthy.size() - start);
    const Matrix x = healthy.values.middleRows(start, len);
    residuals.middleRows(start, len) = dense_ae_forward(x, model).reconstruction - x;
  }
  return covariance_from_residuals(residuals);
}

Sequence gather_windows(const WindowSet& windows, std::span<const Index> which) {
  Sequence seq(static_cast<std::size_t>(windows.length),
               Matrix(static_cast<Index>(which.size()), windows.channels()));
  for (std::size_t j = 0; j < which.size(); ++j) {
    const Index start = windows.starts.at(static_cast<std::size_t>(which[j]));
    for (Index t = 0; t < windows.length; ++t) {
      seq[static_cast<std::size_t>(t)].row(static_cast<Index>(j)) = windows.frames.row(start + t);
    }
  }
  return seq;
}

namespace {

// Loss on rows [begin, begin + len) of a snapshot matrix.
struct DenseTask {
  const Snapshots& train_items;
  const Snapshots& val_items;
  LossKind loss = LossKind::mse;
  std::optional<CovarianceModel> covariance;

  Index train_size() const { return train_items.size(); }

  LossValue loss_of(const Matrix& x, const Matrix& recon) const {
    if (loss == LossKind::mahalanobis && covariance) return mahalanobis_loss(x, recon, *covariance);
    return mse_loss(x, recon);
  }

  double step(const DenseAE& model, std::span<const Index> batch, DenseAE& grads) const {
    const Matrix x = gather_rows(train_items.values, batch);
    DenseAECache cache;
    const auto out = dense_ae_forward(x, model, &cache);
    auto lv = loss_of(x, out.reconstruction);
    grads = dense_ae_backward(lv.gradient, model, cache);
    return lv.loss;
  }

  double validate(const DenseAE& model) const {
    double total = 0.0;
    for (Index start = 0; start < val_items.size(); start += kEvalChunk) {
      const Index len = std::min(kEvalChunk, val_items.size() - start);
      const Matrix x = val_items.values.middleRows(start, len);
      total += loss_of(x, dense_ae_forward(x, model).reconstruction).loss * static_cast<double>(len);
    }
    return total / static_cast<double>(val_items.size());
  }
};

struct LstmTask {
  const WindowSet& train_items;
  const WindowSet& val_items;

  Index train_size() const { return train_items.size(); }

  double step(const LstmAE& model, std::span<const Index> batch, LstmAE& grads) const {
    const Sequence x = gather_windows(train_items, batch);
    LstmAECache cache;
    const auto out = lstm_ae_forward(x, model, &cache);
    auto lv = window_mse_loss(x, out.reconstruction);
    grads = lstm_ae_backward(lv.gradient, model, cache);
    return lv.loss;
  }

  double validate(const LstmAE& model) const {
    double total = 0.0;
    std::vector<Index> idx;
    for (Index start = 0; start < val_items.size(); start += kEvalChunk) {
      const Index len = std::min(kEvalChunk, val_items.size() - start);
      idx.resize(static_cast<std::size_t>(len));
      std::iota(idx.begin(), idx.end(), start);
      const Sequence x = gather_windows(val_items, idx);
      total += window_mse_loss(x, lstm_ae_forward(x, model).reconstruction).loss *
               static_cast<double>(len);
    }
    return total / static_cast<double>(val_items.size());
  }
};

// Shared epoch loop. `before_epoch(epoch, model)` returns true when the
// monitored loss changes meaning and the callbacks must start over.
template <class Net, class Task, class BeforeEpoch>
TrainReport run_epochs(Net& model, const Task& task, const TrainConfig& config,
                       BeforeEpoch before_epoch) {
  TrainReport report;
  report.stop_reason = "none";
  if (config.max_epochs == 0) return report;

  Rng rng(substream_seed(config.seed, 0x5348));
  nn::AdamState<double> adam;
  adam.learning_rate = config.learning_rate;
  nn::EarlyStopping early(config.es_patience);
  nn::PlateauScheduler plateau(config.plateau_patience, config.plateau_factor);
  Net best = model;
  bool have_best = false;

  std::vector<Index> order(static_cast<std::size_t>(task.train_size()));
  std::iota(order.begin(), order.end(), Index{0});
  Net grads = model.zeros_like();

  report.stop_reason = "max_epochs";
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (before_epoch(epoch, model)) {
      early = nn::EarlyStopping(config.es_patience);
      plateau = nn::PlateauScheduler(config.plateau_patience, config.plateau_factor);
      have_best = false;
      report.monitor_from = epoch;
    }
    rng.shuffle(order);
    double train_total = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t len = std::min(static_cast<std::size_t>(config.batch_size), order.size() - begin);
      const std::span<const Index> batch(order.data() + begin, len);
      const double loss = task.step(model, batch, grads);
      nn::adam_step(model.tensors(), std::as_const(grads).tensors(), adam);
      train_total += loss * static_cast<double>(len);
    }
    const double val_loss = task.validate(model);
    if (!std::isfinite(val_loss)) throw NumericError("validation loss is not finite");
    report.epochs.push_back({epoch, train_total / static_cast<double>(order.size()), val_loss,
                             adam.learning_rate});

    const bool stop = early.update(val_loss);
    if (early.improved_last()) {
      best = model;
      have_best = true;
      report.best_epoch = epoch;
    }
    if (stop) {
      report.stop_reason = "early_stopping";
      break;
    }
    adam.learning_rate = plateau.update(val_loss, adam.learning_rate);
  }
  if (have_best) model = best;
  return report;
}

void check_items(Index train_size, Index val_size) {
  if (train_size == 0) throw ValidationError("no training items");
  if (val_size == 0) throw ValidationError("no validation items");
}

}  // namespace

TrainResult train(DenseAE& model, const Snapshots& train_items, const Snapshots& val_items,
                  const TrainConfig& config) {
  config.validate();
  model.validate();
  require_healthy(train_items.labels, train_items.partition, Partition::train, "training items");
  require_healthy(val_items.labels, val_items.partition, Partition::validation, "validation items");
  check_items(train_items.size(), val_items.size());
  if (train_items.values.cols() != model.features() || val_items.values.cols() != model.features()) {
    throw ValidationError("training data width does not match the model");
  }

  DenseTask task{train_items, val_items, config.loss, std::nullopt};
  const bool mahalanobis = config.loss == LossKind::mahalanobis;
  auto before_epoch = [&](int epoch, const DenseAE& current) {
    if (mahalanobis && epoch == config.warmup_epochs + 1) {
      task.covariance = estimate_residual_covariance(current, train_items);
      return true;
    }
    return false;
  };
  TrainResult result;
  result.report = run_epochs(model, task, config, before_epoch);
  if (mahalanobis) {
    // Training ended inside the warm-up: fit the covariance on the final weights.
    if (!task.covariance) task.covariance = estimate_residual_covariance(model, train_items);
    result.covariance = task.covariance;
  }
  return result;
}

TrainResult train(LstmAE& model, const WindowSet& train_items, const WindowSet& val_items,
                  const TrainConfig& config) {
  config.validate();
  model.validate();
  if (config.loss != LossKind::mse) {
    throw ValidationError("the LSTM autoencoder supports only the mse loss");
  }
  require_healthy(train_items.labels, train_items.partition, Partition::train, "training windows");
  require_healthy(val_items.labels, val_items.partition, Partition::validation, "validation windows");
  check_items(train_items.size(), val_items.size());
  if (train_items.length != model.window_length || val_items.length != model.window_length ||
      train_items.channels() != model.features() || val_items.channels() != model.features()) {
    throw ValidationError("window shape does not match the model");
  }
  LstmTask task{train_items, val_items};
  TrainResult result;
  result.report = run_epochs(model, task, config, [](int, const LstmAE&) { return false; });
  return result;
}

}  // namespace faultae
