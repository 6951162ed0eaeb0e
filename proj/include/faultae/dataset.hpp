#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "faultae/errors.hpp"
#include "faultae/timestamp.hpp"

namespace faultae {

/// Per-row fault flags aligned with a SensorLog (true = fault).
using LabelVector = std::vector<bool>;

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

class SpacingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DuplicateTimestampError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Timestamped N x C matrix of raw readings on a uniform one-minute grid.
/// Missing cells hold NaN; every other cell is finite.
class SensorLog {
 public:
  SensorLog() = default;
  /// Validates grid spacing, shapes and finiteness; throws on violation.
  SensorLog(std::vector<Minute> timestamps, std::vector<std::string> channel_names,
            Eigen::MatrixXd values);

  const std::vector<Minute>& timestamps() const { return timestamps_; }
  const std::vector<std::string>& channel_names() const { return channel_names_; }
  const Eigen::MatrixXd& values() const { return values_; }

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index channels() const { return values_.cols(); }
  Eigen::Index missing_count() const { return values_.array().isNaN().count(); }

 private:
  std::vector<Minute> timestamps_;
  std::vector<std::string> channel_names_;
  Eigen::MatrixXd values_;
};

struct FaultInterval {
  Minute start;
  std::int64_t duration_minutes = 0;

  Minute end() const { return start + duration_minutes; }  // exclusive
  friend bool operator==(const FaultInterval&, const FaultInterval&) = default;
};

/// Annotated fault intervals, sorted by start. Overlaps are allowed.
class FaultSchedule {
 public:
  FaultSchedule() = default;
  explicit FaultSchedule(std::vector<FaultInterval> intervals);

  const std::vector<FaultInterval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }

 private:
  std::vector<FaultInterval> intervals_;
};

struct SensorCsvOptions {
  /// Name of the timestamp column; empty selects the first column.
  std::string timestamp_column;
  /// Channels to keep, in order. Empty keeps every non-timestamp column.
  std::vector<std::string> channels;
  /// Besides the empty field, this literal marks a missing cell.
  std::string missing_sentinel = "NaN";
};

SensorLog load_sensor_csv(const std::filesystem::path& path, const SensorCsvOptions& options = {});
void write_sensor_csv(const std::filesystem::path& path, const SensorLog& log);

FaultSchedule load_fault_intervals(const std::filesystem::path& path);
void write_fault_intervals(const std::filesystem::path& path, const FaultSchedule& schedule);

/// flags[i] is true iff timestamps[i] lies in [start, start + duration) of any interval.
LabelVector label_samples(const SensorLog& log, const FaultSchedule& schedule);

}  // namespace faultae
