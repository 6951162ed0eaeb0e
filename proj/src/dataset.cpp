#include "faultae/dataset.hpp"

#include <algorithm>
#include <string>

#include "faultae/csv.hpp"

namespace faultae {

SensorLog::SensorLog(std::vector<Minute> timestamps, std::vector<std::string> channel_names,
                     Eigen::MatrixXd values)
    : timestamps_(std::move(timestamps)),
      channel_names_(std::move(channel_names)),
      values_(std::move(values)) {
  if (static_cast<Eigen::Index>(timestamps_.size()) != values_.rows()) {
    throw ValidationError("sensor log: timestamp count does not match row count");
  }
  if (static_cast<Eigen::Index>(channel_names_.size()) != values_.cols()) {
    throw ValidationError("sensor log: channel name count does not match column count");
  }
  for (std::size_t i = 1; i < timestamps_.size(); ++i) {
    const auto gap = timestamps_[i] - timestamps_[i - 1];
    if (gap == 0) {
      throw DuplicateTimestampError("sensor log: duplicate timestamp " +
                                    format_minute(timestamps_[i]) + " at row " +
                                    std::to_string(i + 1));
    }
    if (gap != 1) {
      throw SpacingError("sensor log: spacing of " + std::to_string(gap) +
                         " min before row " + std::to_string(i + 1) + " (expected 1 min)");
    }
  }
  if (values_.array().isInf().any()) {
    throw ValidationError("sensor log: infinite reading");
  }
}

FaultSchedule::FaultSchedule(std::vector<FaultInterval> intervals) : intervals_(std::move(intervals)) {
  for (const auto& iv : intervals_) {
    if (iv.duration_minutes <= 0) {
      throw ValidationError("fault interval at " + format_minute(iv.start) +
                            " has non-positive duration");
    }
  }
  std::stable_sort(intervals_.begin(), intervals_.end(),
                   [](const FaultInterval& a, const FaultInterval& b) { return a.start < b.start; });
}

SensorLog load_sensor_csv(const std::filesystem::path& path, const SensorCsvOptions& options) {
  auto in = csv::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("sensor csv '" + path.string() + "' is empty", 1);
  auto header = csv::split_record(line);
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);
  for (auto& h : header) h = csv::trim(h);

  std::size_t ts_col = 0;
  if (!options.timestamp_column.empty()) {
    auto it = std::find(header.begin(), header.end(), options.timestamp_column);
    if (it == header.end()) {
      throw ParseError("timestamp column '" + options.timestamp_column + "' not found", 1);
    }
    ts_col = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::size_t> cols;
  std::vector<std::string> names;
  if (options.channels.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == ts_col) continue;
      cols.push_back(c);
      names.push_back(header[c]);
    }
  } else {
    for (const auto& name : options.channels) {
      auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) throw ParseError("channel '" + name + "' not found", 1);
      cols.push_back(static_cast<std::size_t>(it - header.begin()));
      names.push_back(name);
    }
  }
  if (cols.empty()) throw ParseError("sensor csv has no channel columns", 1);

  std::vector<Minute> stamps;
  std::vector<double> cells;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split_record(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    }
    try {
      stamps.push_back(parse_minute(csv::trim(fields[ts_col])));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    for (std::size_t c : cols) {
      const std::string field = csv::trim(fields[c]);
      double v = kMissing;
      if (!field.empty() && field != options.missing_sentinel) {
        if (!csv::parse_double(field, v) || !std::isfinite(v)) {
          throw ParseError("bad numeric value '" + field + "' in column '" + header[c] + "'",
                           line_no);
        }
      }
      cells.push_back(v);
    }
  }
  const auto n = static_cast<Eigen::Index>(stamps.size());
  const auto c = static_cast<Eigen::Index>(cols.size());
  Eigen::MatrixXd values =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          cells.data(), n, c);
  return SensorLog(std::move(stamps), std::move(names), std::move(values));
}

void write_sensor_csv(const std::filesystem::path& path, const SensorLog& log) {
  auto out = csv::open_output(path);
  out << "timestamp";
  for (const auto& name : log.channel_names()) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < log.rows(); ++i) {
    out << format_minute(log.timestamps()[static_cast<std::size_t>(i)]);
    for (Eigen::Index c = 0; c < log.channels(); ++c) {
      out << ',';
      const double v = log.values()(i, c);
      if (!is_missing(v)) out << csv::format_double(v);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

FaultSchedule load_fault_intervals(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("fault csv '" + path.string() + "' is empty", 1);
  auto header = csv::split_record(line);
  for (auto& h : header) h = csv::trim(h);
  if (header.size() != 2 || header[0] != "start" || header[1] != "duration_minutes") {
    throw ParseError("fault csv header must be 'start,duration_minutes'", 1);
  }
  std::vector<FaultInterval> intervals;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split_record(line);
    if (fields.size() != 2) throw ParseError("expected 2 fields", line_no);
    FaultInterval iv;
    try {
      iv.start = parse_minute(csv::trim(fields[0]));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    double duration = 0.0;
    const std::string dur = csv::trim(fields[1]);
    if (!csv::parse_double(dur, duration) || duration != std::floor(duration)) {
      throw ParseError("duration '" + dur + "' is not a whole number of minutes", line_no);
    }
    if (duration <= 0) {
      throw ValidationError("non-positive fault duration at line " + std::to_string(line_no));
    }
    iv.duration_minutes = static_cast<std::int64_t>(duration);
    intervals.push_back(iv);
  }
  return FaultSchedule(std::move(intervals));
}

void write_fault_intervals(const std::filesystem::path& path, const FaultSchedule& schedule) {
  auto out = csv::open_output(path);
  out << "start,duration_minutes\n";
  for (const auto& iv : schedule.intervals()) {
    out << format_minute(iv.start) << ',' << iv.duration_minutes << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

LabelVector label_samples(const SensorLog& log, const FaultSchedule& schedule) {
  const auto& ts = log.timestamps();
  LabelVector flags(ts.size(), false);
  for (const auto& iv : schedule.intervals()) {
    auto first = std::lower_bound(ts.begin(), ts.end(), iv.start);
    auto last = std::lower_bound(first, ts.end(), iv.end());
    for (auto it = first; it != last; ++it) flags[static_cast<std::size_t>(it - ts.begin())] = true;
  }
  return flags;
}

}  // namespace faultae
