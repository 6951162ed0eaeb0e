#include "faultae/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "faultae/random.hpp"

namespace faultae {

DroppedChannels drop_empty_channels(const SensorLog& log) {
  const auto& values = log.values();
  std::vector<Index> keep;
  std::vector<std::string> dropped;
  for (Index c = 0; c < log.channels(); ++c) {
    if (values.col(c).array().isNaN().all() && values.rows() > 0) {
      dropped.push_back(log.channel_names()[static_cast<std::size_t>(c)]);
    } else {
      keep.push_back(c);
    }
  }
  if (keep.empty()) throw ValidationError("every channel is empty");
  if (dropped.empty()) return {log, {}};

  Eigen::MatrixXd kept(values.rows(), static_cast<Index>(keep.size()));
  std::vector<std::string> names;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    kept.col(static_cast<Index>(k)) = values.col(keep[k]);
    names.push_back(log.channel_names()[static_cast<std::size_t>(keep[k])]);
  }
  return {SensorLog(log.timestamps(), std::move(names), std::move(kept)), std::move(dropped)};
}

void impute_column(Eigen::Ref<Eigen::VectorXd> column) {
  const Index n = column.size();
  Index prev = -1;
  for (Index i = 0; i < n; ++i) {
    if (is_missing(column[i])) continue;
    if (prev >= 0 && i - prev > 1) {
      // interior gap: linear in the row index
      const double a = column[prev];
      const double b = column[i];
      const double span = static_cast<double>(i - prev);
      for (Index k = prev + 1; k < i; ++k) {
        column[k] = a + (b - a) * static_cast<double>(k - prev) / span;
      }
    }
    prev = i;
  }
  if (prev < 0) throw ValidationError("cannot impute a channel with no observed values");

  Index first = 0;
  while (is_missing(column[first])) ++first;
  column.head(first).setConstant(column[first]);
  column.tail(n - 1 - prev).setConstant(column[prev]);
}

SensorLog impute_cascade(const SensorLog& log) {
  Eigen::MatrixXd values = log.values();
  for (Index c = 0; c < values.cols(); ++c) {
    try {
      impute_column(values.col(c));
    } catch (const ValidationError&) {
      throw ValidationError("channel '" + log.channel_names()[static_cast<std::size_t>(c)] +
                            "' is fully missing; drop it before imputation");
    }
  }
  return SensorLog(log.timestamps(), log.channel_names(), std::move(values));
}

const char* to_string(Partition p) {
  switch (p) {
    case Partition::train:
      return "train";
    case Partition::validation:
      return "val";
    case Partition::test:
      return "test";
  }
  return "?";
}

Partition partition_from_string(const std::string& text) {
  if (text == "train") return Partition::train;
  if (text == "val") return Partition::validation;
  if (text == "test") return Partition::test;
  throw ParseError("unknown partition '" + text + "'");
}

std::vector<Index> SplitPlan::train_pool() const {
  std::vector<Index> pool;
  pool.reserve(train.size() + validation.size());
  std::merge(train.begin(), train.end(), validation.begin(), validation.end(),
             std::back_inserter(pool));
  return pool;
}

std::vector<Partition> SplitPlan::assignment(Index rows) const {
  std::vector<Partition> out(static_cast<std::size_t>(rows), Partition::test);
  for (Index i : train) out.at(static_cast<std::size_t>(i)) = Partition::train;
  for (Index i : validation) out.at(static_cast<std::size_t>(i)) = Partition::validation;
  return out;
}

namespace {

Index ratio_count(double ratio, Index n) {
  // Guard against 0.29 * 100 == 28.999...
  return static_cast<Index>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

void check_ratio(double ratio, const char* what) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw ValidationError(std::string(what) + " must lie strictly between 0 and 1");
  }
}

}  // namespace

std::vector<Index> sample_validation(Index count, double ratio, std::uint64_t seed) {
  check_ratio(ratio, "validation ratio");
  std::vector<Index> order(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(substream_seed(seed, 0x56414C));
  rng.shuffle(order);
  order.resize(static_cast<std::size_t>(ratio_count(ratio, count)));
  std::sort(order.begin(), order.end());
  return order;
}

SplitPlan plan_split(const LabelVector& labels, double train_ratio, double validation_ratio,
                     std::uint64_t seed) {
  check_ratio(train_ratio, "train ratio");
  check_ratio(validation_ratio, "validation ratio");
  std::vector<Index> healthy;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) healthy.push_back(static_cast<Index>(i));
  }
  if (healthy.empty()) throw ValidationError("no healthy samples to train on");

  const Index pool_size = ratio_count(train_ratio, static_cast<Index>(healthy.size()));
  if (pool_size == 0) throw ValidationError("train ratio leaves no healthy training rows");

  SplitPlan plan;
  plan.train_ratio = train_ratio;
  plan.validation_ratio = validation_ratio;
  const auto val_positions = sample_validation(pool_size, validation_ratio, seed);
  std::vector<bool> is_val(static_cast<std::size_t>(pool_size), false);
  for (Index p : val_positions) is_val[static_cast<std::size_t>(p)] = true;
  for (Index p = 0; p < pool_size; ++p) {
    const Index row = healthy[static_cast<std::size_t>(p)];
    (is_val[static_cast<std::size_t>(p)] ? plan.validation : plan.train).push_back(row);
  }
  // Every row after the pool boundary that is not in the pool goes to test,
  // together with all fault rows before it.
  std::vector<bool> in_pool(labels.size(), false);
  for (Index p = 0; p < pool_size; ++p) in_pool[static_cast<std::size_t>(healthy[static_cast<std::size_t>(p)])] = true;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!in_pool[i]) plan.test.push_back(static_cast<Index>(i));
  }
  return plan;
}

ScalerParams fit_scaler(const Eigen::MatrixXd& matrix, std::span<const Index> rows) {
  if (rows.empty()) throw ValidationError("scaler needs at least one fitting row");
  ScalerParams p;
  p.min = matrix.row(rows[0]).transpose();
  p.max = p.min;
  for (Index r : rows) {
    if (r < 0 || r >= matrix.rows()) throw ValidationError("scaler row index out of range");
    p.min = p.min.cwiseMin(matrix.row(r).transpose());
    p.max = p.max.cwiseMax(matrix.row(r).transpose());
  }
  if (!p.min.allFinite() || !p.max.allFinite()) {
    throw NumericError("scaler fitted on non-finite data; impute first");
  }
  if (!(p.max - p.min).allFinite()) throw NumericError("channel range overflows a double");
  p.fitted_on = static_cast<Index>(rows.size());
  return p;
}

ScalerParams fit_scaler(const Eigen::MatrixXd& matrix, std::span<const Index> rows,
                        const SplitPlan& plan) {
  const auto pool = plan.train_pool();
  for (Index r : rows) {
    if (!std::binary_search(pool.begin(), pool.end(), r)) {
      throw ValidationError("scaler fitting row " + std::to_string(r) +
                            " is not a healthy training row");
    }
  }
  return fit_scaler(matrix, rows);
}

Eigen::MatrixXd apply_scaler(const Eigen::MatrixXd& matrix, const ScalerParams& params) {
  if (matrix.cols() != params.channels()) {
    throw ValidationError("scaler expects " + std::to_string(params.channels()) +
                          " channels, got " + std::to_string(matrix.cols()));
  }
  Eigen::MatrixXd out(matrix.rows(), matrix.cols());
  for (Index c = 0; c < matrix.cols(); ++c) {
    const double range = params.max[c] - params.min[c];
    if (range > 0.0) {
      out.col(c) = (matrix.col(c).array() - params.min[c]) / range;
    } else {
      out.col(c).setZero();
    }
  }
  return out;
}

Eigen::MatrixXd invert_scaler(const Eigen::MatrixXd& scaled, const ScalerParams& params) {
  if (scaled.cols() != params.channels()) throw ValidationError("scaler channel mismatch");
  Eigen::MatrixXd out(scaled.rows(), scaled.cols());
  for (Index c = 0; c < scaled.cols(); ++c) {
    const double range = params.max[c] - params.min[c];
    out.col(c) = scaled.col(c).array() * range + params.min[c];
  }
  return out;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& matrix, std::span<const Index> rows) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), matrix.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = matrix.row(rows[k]);
  return out;
}

Snapshots make_snapshots(const Eigen::MatrixXd& matrix, const LabelVector& labels,
                         std::span<const Index> rows, Partition partition) {
  if (static_cast<Index>(labels.size()) != matrix.rows()) {
    throw ValidationError("label count does not match row count");
  }
  Snapshots s;
  s.values = gather_rows(matrix, rows);
  s.rows.assign(rows.begin(), rows.end());
  for (Index r : rows) s.labels.push_back(labels[static_cast<std::size_t>(r)]);
  s.partition = partition;
  return s;
}

WindowSet WindowSet::select(std::span<const Index> which) const {
  WindowSet out;
  out.frames = frames;
  out.length = length;
  out.partition = partition;
  for (Index w : which) {
    const auto k = static_cast<std::size_t>(w);
    out.starts.push_back(starts.at(k));
    out.end_indices.push_back(end_indices.at(k));
    out.labels.push_back(labels.at(k));
  }
  return out;
}

namespace {

void check_window_spec(const WindowSpec& spec) {
  if (spec.length < 1 || spec.stride < 1) {
    throw ValidationError("window length and stride must be positive");
  }
}

// Appends windows over frames [begin, begin + n) of `out.frames`; `row_of`
// maps a frame position to the caller's row index.
template <class RowOf>
void append_windows(WindowSet& out, const LabelVector& frame_labels, Index begin, Index n,
                    const WindowSpec& spec, RowOf row_of) {
  if (n < spec.length) return;
  const Index count = (n - spec.length) / spec.stride + 1;
  for (Index w = 0; w < count; ++w) {
    const Index start = begin + w * spec.stride;
    bool any = false;
    for (Index k = start; k < start + spec.length; ++k) any = any || frame_labels[static_cast<std::size_t>(k)];
    out.starts.push_back(start);
    out.end_indices.push_back(row_of(start + spec.length - 1));
    out.labels.push_back(any);
  }
}

}  // namespace

WindowSet make_windows(const Eigen::MatrixXd& matrix, const LabelVector& labels,
                       const WindowSpec& spec) {
  check_window_spec(spec);
  if (static_cast<Index>(labels.size()) != matrix.rows()) {
    throw ValidationError("label count does not match row count");
  }
  if (matrix.rows() < spec.length) {
    throw ValidationError("need at least " + std::to_string(spec.length) + " rows to window, got " +
                          std::to_string(matrix.rows()));
  }
  WindowSet out;
  out.frames = matrix;
  out.length = spec.length;
  append_windows(out, labels, 0, matrix.rows(), spec, [](Index i) { return i; });
  return out;
}

WindowSet make_partition_windows(const Eigen::MatrixXd& matrix, const LabelVector& labels,
                                 std::span<const Index> rows, const WindowSpec& spec,
                                 Partition partition) {
  check_window_spec(spec);
  if (static_cast<Index>(labels.size()) != matrix.rows()) {
    throw ValidationError("label count does not match row count");
  }
  WindowSet out;
  out.frames = gather_rows(matrix, rows);
  out.length = spec.length;
  out.partition = partition;
  LabelVector frame_labels;
  frame_labels.reserve(rows.size());
  for (Index r : rows) frame_labels.push_back(labels[static_cast<std::size_t>(r)]);

  auto row_of = [&](Index pos) { return rows[static_cast<std::size_t>(pos)]; };
  std::size_t run_begin = 0;
  for (std::size_t k = 1; k <= rows.size(); ++k) {
    if (k == rows.size() || rows[k] != rows[k - 1] + 1) {
      append_windows(out, frame_labels, static_cast<Index>(run_begin),
                     static_cast<Index>(k - run_begin), spec, row_of);
      run_begin = k;
    }
  }
  return out;
}

}  // namespace faultae
