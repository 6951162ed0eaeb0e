#pragma once

#include <limits>
#include <span>

namespace faultae::nn {

/// Stops after `patience` consecutive epochs without strict improvement.
/// Epochs are numbered from 1.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience = 10) : patience_(patience) {}

  /// Records one validation loss; returns true when training should stop.
  bool update(double loss) {
    ++epoch_;
    if (loss < best_) {
      best_ = loss;
      best_epoch_ = epoch_;
      wait_ = 0;
    } else {
      ++wait_;
    }
    return wait_ >= patience_;
  }

  bool improved_last() const { return best_epoch_ == epoch_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int wait_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

/// Multiplies the learning rate by `factor` after `patience` stagnant epochs,
/// then starts counting again.
class PlateauScheduler {
 public:
  PlateauScheduler(int patience = 5, double factor = 0.2) : patience_(patience), factor_(factor) {}

  double update(double loss, double learning_rate) {
    if (loss < best_) {
      best_ = loss;
      wait_ = 0;
      return learning_rate;
    }
    if (++wait_ >= patience_) {
      wait_ = 0;
      return learning_rate * factor_;
    }
    return learning_rate;
  }

 private:
  int patience_;
  double factor_;
  int wait_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct StopDecision {
  bool stop = false;
  int stop_epoch = 0;  // epoch at which the stop fired, 0 if none
  int best_epoch = 0;
};

/// Replays a validation history through EarlyStopping.
inline StopDecision early_stopping(std::span<const double> history, int patience = 10) {
  EarlyStopping es(patience);
  StopDecision d;
  for (std::size_t e = 0; e < history.size(); ++e) {
    if (es.update(history[e])) {
      d.stop = true;
      d.stop_epoch = static_cast<int>(e) + 1;
      break;
    }
  }
  d.best_epoch = es.best_epoch();
  return d;
}

/// Learning rate after replaying a validation history through PlateauScheduler.
inline double reduce_lr_on_plateau(std::span<const double> history, double learning_rate,
                                   int patience = 5, double factor = 0.2) {
  PlateauScheduler s(patience, factor);
  for (double loss : history) learning_rate = s.update(loss, learning_rate);
  return learning_rate;
}

}  // namespace faultae::nn
