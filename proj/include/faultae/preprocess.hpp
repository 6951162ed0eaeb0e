#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "faultae/dataset.hpp"

namespace faultae {

using Index = Eigen::Index;

struct DroppedChannels {
  SensorLog log;
  std::vector<std::string> dropped;
};

/// Removes channels without a single observed value. Throws if none survive.
DroppedChannels drop_empty_channels(const SensorLog& log);

/// Fills one channel in place: linear interpolation across interior gaps,
/// then backward fill of the leading run, then forward fill of the trailing
/// run. Throws if the channel has no observed value.
void impute_column(Eigen::Ref<Eigen::VectorXd> column);

/// impute_column applied to every channel of the log.
SensorLog impute_cascade(const SensorLog& log);

struct ScalerParams {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
  Index fitted_on = 0;

  Index channels() const { return min.size(); }
};

enum class Partition { train, validation, test };
const char* to_string(Partition p);
Partition partition_from_string(const std::string& text);

/// Row-level split of a labelled log into disjoint train / validation / test sets.
/// Index vectors are sorted ascending.
struct SplitPlan {
  std::vector<Index> train;
  std::vector<Index> validation;
  std::vector<Index> test;
  double train_ratio = 0.9;
  double validation_ratio = 0.2;

  /// train and validation merged back together, sorted.
  std::vector<Index> train_pool() const;
  /// Partition of every row of the original log.
  std::vector<Partition> assignment(Index rows) const;
};

/// Seed-deterministic uniform choice of floor(ratio * count) items from [0, count).
/// Returned indices are sorted.
std::vector<Index> sample_validation(Index count, double ratio, std::uint64_t seed);

/// Chronological healthy split. The first floor(train_ratio * H) healthy rows form
/// the train pool; the rest of the healthy rows and every fault row go to test.
/// A seeded validation_ratio share of the pool becomes validation.
SplitPlan plan_split(const LabelVector& labels, double train_ratio, double validation_ratio,
                     std::uint64_t seed);

ScalerParams fit_scaler(const Eigen::MatrixXd& matrix, std::span<const Index> rows);

/// As above, but rejects any row that is not in plan's train pool.
ScalerParams fit_scaler(const Eigen::MatrixXd& matrix, std::span<const Index> rows,
                        const SplitPlan& plan);

/// (x - min) / (max - min) per channel, without clamping. Constant channels map to 0.
Eigen::MatrixXd apply_scaler(const Eigen::MatrixXd& matrix, const ScalerParams& params);

/// Inverse of apply_scaler for non-constant channels; constant channels map back to min.
Eigen::MatrixXd invert_scaler(const Eigen::MatrixXd& scaled, const ScalerParams& params);

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& matrix, std::span<const Index> rows);

struct WindowSpec {
  Index length = 5;
  Index stride = 1;
};

/// Overlapping T x C blocks cut from `frames`. Block i is
/// frames.middleRows(starts[i], length); its label is the OR of its frame labels
/// and end_indices[i] names its last frame in the caller's row numbering.
struct WindowSet {
  Eigen::MatrixXd frames;
  Index length = 0;
  std::vector<Index> starts;
  std::vector<Index> end_indices;
  LabelVector labels;
  Partition partition = Partition::test;

  Index size() const { return static_cast<Index>(starts.size()); }
  Index channels() const { return frames.cols(); }
  auto window(Index i) const { return frames.middleRows(starts[static_cast<std::size_t>(i)], length); }

  /// Subset of windows, sharing the same frame storage layout.
  WindowSet select(std::span<const Index> which) const;
};

/// Rows of the scaled matrix belonging to one partition, with their original
/// row indices and labels. Training code checks `partition` and `labels` to
/// refuse leaked rows.
struct Snapshots {
  Eigen::MatrixXd values;
  std::vector<Index> rows;
  LabelVector labels;
  Partition partition = Partition::test;

  Index size() const { return values.rows(); }
};

Snapshots make_snapshots(const Eigen::MatrixXd& matrix, const LabelVector& labels,
                         std::span<const Index> rows, Partition partition);

/// Windows over one contiguous matrix. Count is floor((N - T) / stride) + 1.
WindowSet make_windows(const Eigen::MatrixXd& matrix, const LabelVector& labels,
                       const WindowSpec& spec);

/// Windows over the given rows of a full matrix. Rows are split into runs of
/// consecutive indices and each run is windowed on its own, so no window spans
/// a gap. end_indices refer to rows of the full matrix.
WindowSet make_partition_windows(const Eigen::MatrixXd& matrix, const LabelVector& labels,
                                 std::span<const Index> rows, const WindowSpec& spec,
                                 Partition partition = Partition::test);

}  // namespace faultae
