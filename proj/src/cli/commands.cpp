#include "faultae/cli/commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <map>
#include <optional>
#include <ostream>

#include "faultae/csv.hpp"
#include "faultae/detector.hpp"
#include "faultae/evaluation.hpp"
#include "faultae/model_io.hpp"
#include "faultae/synthplant.hpp"

namespace faultae::cli {

namespace fs = std::filesystem;

namespace {

struct NumericTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

NumericTable read_table(const fs::path& path) {
  auto in = csv::open_input(path);
  NumericTable t;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path.string() + "' is empty", 1);
  t.header = csv::split_record(line);
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    auto fields = csv::split_record(line);
    if (fields.size() != t.header.size()) {
      throw ParseError("'" + path.string() + "': wrong field count", line_no);
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

double field_double(const std::string& text, const fs::path& path) {
  double v = 0.0;
  if (!csv::parse_double(text, v) || !std::isfinite(v)) {
    throw ParseError("'" + path.string() + "': bad number '" + text + "'");
  }
  return v;
}

Index field_index(const std::string& text, const fs::path& path) {
  const double v = field_double(text, path);
  if (v < 0 || v != std::floor(v)) throw ParseError("'" + path.string() + "': bad index '" + text + "'");
  return static_cast<Index>(v);
}

void write_matrix_csv(const fs::path& path, const std::vector<std::string>& header, const Matrix& m) {
  auto out = csv::open_output(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << csv::format_double(m(r, c));
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Matrix read_matrix_csv(const fs::path& path, const std::vector<std::string>& expected_header) {
  const auto t = read_table(path);
  if (t.header != expected_header) throw ValidationError("'" + path.string() + "': unexpected header");
  Matrix m(static_cast<Index>(t.rows.size()), static_cast<Index>(t.header.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t c = 0; c < t.header.size(); ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) = field_double(t.rows[r][c], path);
  return m;
}

std::string require_path(const fs::path& p, const char* key) {
  if (p.empty()) throw ValidationError(std::string(key) + " is required");
  return p.string();
}

// Windows used for LSTM fitting: the train pool windowed, then a seeded share
// moved to validation.
std::pair<WindowSet, WindowSet> lstm_fit_windows(const PreparedData& data, Index window_length,
                                                 const RunConfig& config) {
  const auto pool = data.plan.train_pool();
  const WindowSpec spec{window_length, config.window.stride};
  const auto all = make_partition_windows(data.scaled, data.labels, pool, spec, Partition::train);
  if (all.size() < 2) throw ValidationError("too few training windows");
  const auto val_idx = sample_validation(all.size(), data.plan.validation_ratio, config.seed);
  std::vector<Index> train_idx;
  for (Index w = 0, v = 0; w < all.size(); ++w) {
    if (v < static_cast<Index>(val_idx.size()) && val_idx[static_cast<std::size_t>(v)] == w) {
      ++v;
    } else {
      train_idx.push_back(w);
    }
  }
  auto train = all.select(train_idx);
  auto val = all.select(val_idx);
  train.partition = Partition::train;
  val.partition = Partition::validation;
  return {std::move(train), std::move(val)};
}

ScoreSeries score_snapshots(const ModelBundle& bundle, const Snapshots& items) {
  const auto& dense = std::get<DenseAE>(bundle.network);
  if (bundle.covariance) return score_mahalanobis(dense, *bundle.covariance, items);
  return score_pointwise_mse(dense, items);
}

// Scores the given partition with whatever the bundle's score kind is.
ScoreSeries score_partition(const ModelBundle& bundle, const PreparedData& data, Partition which,
                            const RunConfig& config) {
  if (static_cast<Index>(data.channels.size()) != bundle.features()) {
    throw ValidationError("prepared data has " + std::to_string(data.channels.size()) +
                          " channels, model expects " + std::to_string(bundle.features()));
  }
  if (bundle.architecture() == Architecture::dense_ae) {
    const auto& rows = which == Partition::train        ? data.plan.train
                       : which == Partition::validation ? data.plan.validation
                                                        : data.plan.test;
    if (rows.empty()) throw ValidationError(std::string("the ") + to_string(which) + " partition is empty");
    return score_snapshots(bundle, make_snapshots(data.scaled, data.labels, rows, which));
  }
  const auto& lstm = std::get<LstmAE>(bundle.network);
  WindowSet windows;
  if (which == Partition::test) {
    windows = make_partition_windows(data.scaled, data.labels, data.plan.test,
                                     {lstm.window_length, config.window.stride}, Partition::test);
  } else {
    auto fit = lstm_fit_windows(data, lstm.window_length, config);
    windows = which == Partition::train ? std::move(fit.first) : std::move(fit.second);
  }
  if (windows.size() == 0) throw ValidationError(std::string("the ") + to_string(which) + " partition has no windows");
  return score_window_mse(lstm, windows);
}

}  // namespace

PreparedData load_prepared(const fs::path& dir) {
  PreparedData d;
  {
    const auto path = dir / "labels.csv";
    const auto t = read_table(path);
    if (t.header != std::vector<std::string>{"row_index", "timestamp", "fault"}) {
      throw ValidationError("'" + path.string() + "': unexpected header");
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (field_index(t.rows[r][0], path) != static_cast<Index>(r)) {
        throw ValidationError("'" + path.string() + "': rows out of order");
      }
      d.timestamps.push_back(t.rows[r][1]);
      d.labels.push_back(t.rows[r][2] == "1");
    }
  }
  {
    const auto path = dir / "split.csv";
    const auto t = read_table(path);
    if (t.header != std::vector<std::string>{"row_index", "partition"}) {
      throw ValidationError("'" + path.string() + "': unexpected header");
    }
    for (const auto& row : t.rows) {
      const Index idx = field_index(row[0], path);
      if (idx >= static_cast<Index>(d.labels.size())) throw ValidationError("split row index out of range");
      switch (partition_from_string(row[1])) {
        case Partition::train:
          d.plan.train.push_back(idx);
          break;
        case Partition::validation:
          d.plan.validation.push_back(idx);
          break;
        case Partition::test:
          d.plan.test.push_back(idx);
          break;
      }
    }
  }
  {
    const auto path = dir / "scaler.csv";
    const auto t = read_table(path);
    if (t.header != std::vector<std::string>{"channel", "min", "max", "fitted_on"}) {
      throw ValidationError("'" + path.string() + "': unexpected header");
    }
    const auto n = static_cast<Index>(t.rows.size());
    d.scaler.min.resize(n);
    d.scaler.max.resize(n);
    for (Index c = 0; c < n; ++c) {
      const auto& row = t.rows[static_cast<std::size_t>(c)];
      d.channels.push_back(row[0]);
      d.scaler.min[c] = field_double(row[1], path);
      d.scaler.max[c] = field_double(row[2], path);
      d.scaler.fitted_on = field_index(row[3], path);
    }
  }
  // Validation ratio is recorded in the summary-free way: recompute from counts.
  const auto pool = d.plan.train.size() + d.plan.validation.size();
  d.plan.validation_ratio = pool ? static_cast<double>(d.plan.validation.size()) / static_cast<double>(pool) : 0.2;

  d.scaled = Matrix::Zero(static_cast<Index>(d.labels.size()), static_cast<Index>(d.channels.size()));
  auto fill = [&](const char* file, const std::vector<Index>& rows) {
    const Matrix m = read_matrix_csv(dir / file, d.channels);
    if (m.rows() != static_cast<Index>(rows.size())) {
      throw ValidationError(std::string("'") + file + "' row count does not match split.csv");
    }
    for (std::size_t k = 0; k < rows.size(); ++k) d.scaled.row(rows[k]) = m.row(static_cast<Index>(k));
  };
  fill("train.csv", d.plan.train);
  fill("val.csv", d.plan.validation);
  fill("test.csv", d.plan.test);
  const auto assigned = d.plan.train.size() + d.plan.validation.size() + d.plan.test.size();
  if (assigned != d.labels.size()) throw ValidationError("split.csv does not cover every labelled row");
  return d;
}

void cmd_prepare(const RunConfig& config, std::ostream& out) {
  SensorCsvOptions opts;
  opts.timestamp_column = config.timestamp_column;
  opts.missing_sentinel = config.missing_sentinel;
  const SensorLog raw = load_sensor_csv(require_path(config.sensor_csv, "paths.sensor_csv"), opts);
  const FaultSchedule schedule =
      config.fault_csv.empty() ? FaultSchedule{} : load_fault_intervals(config.fault_csv);

  const Index missing_before = raw.missing_count();
  auto [kept, dropped] = drop_empty_channels(raw);
  const SensorLog dense = impute_cascade(kept);
  const LabelVector labels = label_samples(dense, schedule);
  const SplitPlan plan = plan_split(labels, config.train_ratio, config.validation_ratio, config.seed);
  const auto pool = plan.train_pool();
  const ScalerParams scaler = fit_scaler(dense.values(), pool, plan);
  const Matrix scaled = apply_scaler(dense.values(), scaler);

  const auto& dir = config.out_dir;
  const auto& names = dense.channel_names();
  write_matrix_csv(dir / "train.csv", names, gather_rows(scaled, plan.train));
  write_matrix_csv(dir / "val.csv", names, gather_rows(scaled, plan.validation));
  write_matrix_csv(dir / "test.csv", names, gather_rows(scaled, plan.test));
  {
    auto f = csv::open_output(dir / "split.csv");
    f << "row_index,partition\n";
    const auto assignment = plan.assignment(dense.rows());
    for (std::size_t i = 0; i < assignment.size(); ++i) f << i << ',' << to_string(assignment[i]) << '\n';
  }
  {
    auto f = csv::open_output(dir / "labels.csv");
    f << "row_index,timestamp,fault\n";
    for (Index i = 0; i < dense.rows(); ++i) {
      f << i << ',' << format_minute(dense.timestamps()[static_cast<std::size_t>(i)]) << ','
        << (labels[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
    }
  }
  {
    auto f = csv::open_output(dir / "scaler.csv");
    f << "channel,min,max,fitted_on\n";
    for (Index c = 0; c < scaler.channels(); ++c) {
      f << names[static_cast<std::size_t>(c)] << ',' << csv::format_double(scaler.min[c]) << ','
        << csv::format_double(scaler.max[c]) << ',' << scaler.fitted_on << '\n';
    }
  }
  const auto faults = std::count(labels.begin(), labels.end(), true);
  std::ostringstream summary;
  summary << "rows: " << dense.rows() << '\n'
          << "channels_in: " << raw.channels() << '\n'
          << "channels_kept: " << dense.channels() << '\n'
          << "dropped_channels:";
  for (const auto& d : dropped) summary << ' ' << d;
  summary << '\n'
          << "missing_cells_before: " << missing_before << '\n'
          << "missing_cells_after: " << dense.missing_count() << '\n'
          << "fault_rows: " << faults << '\n'
          << "train_rows: " << plan.train.size() << '\n'
          << "val_rows: " << plan.validation.size() << '\n'
          << "test_rows: " << plan.test.size() << '\n'
          << "scaler_fitted_on: " << scaler.fitted_on << '\n';
  auto f = csv::open_output(dir / "prep_summary.txt");
  f << summary.str();
  out << summary.str();
}

void cmd_train(const RunConfig& config, std::ostream& out) {
  const PreparedData data = load_prepared(config.out_dir);
  const TrainConfig tc = config.train_config();
  const auto d = static_cast<Index>(data.channels.size());
  ModelBundle bundle;
  bundle.channel_names = data.channels;
  bundle.scaler = data.scaler;
  TrainResult result;
  if (config.architecture == Architecture::dense_ae) {
    auto model = DenseAE::create(d, config.seed);
    const auto train_items = make_snapshots(data.scaled, data.labels, data.plan.train, Partition::train);
    const auto val_items = make_snapshots(data.scaled, data.labels, data.plan.validation, Partition::validation);
    result = train(model, train_items, val_items, tc);
    bundle.network = std::move(model);
    bundle.covariance = result.covariance;
  } else {
    auto model = LstmAE::create(d, config.window.length, config.seed);
    auto [train_items, val_items] = lstm_fit_windows(data, config.window.length, config);
    result = train(model, train_items, val_items, tc);
    bundle.network = std::move(model);
  }
  save_model(bundle, config.model_path());
  write_train_report_csv(config.out_dir / "train_report.csv", result.report);
  out << "trained " << to_string(bundle.architecture()) << " (" << to_string(tc.loss) << ") for "
      << result.report.epochs.size() << " epochs, best epoch " << result.report.best_epoch
      << ", stop: " << result.report.stop_reason << '\n';
  for (const auto& e : result.report.epochs) {
    out << "  epoch " << e.epoch << " train " << e.train_loss << " val " << e.val_loss << " lr "
        << e.learning_rate << '\n';
  }
  out << "model written to " << config.model_path().string() << '\n';
}

void cmd_threshold(const RunConfig& config, std::ostream& out) {
  ModelBundle bundle = load_model(config.model_path());
  const PreparedData data = load_prepared(config.out_dir);
  const auto scores = score_partition(bundle, data, Partition::train, config);
  bundle.threshold = fit_threshold(scores, config.alpha);
  save_model(bundle, config.model_path());
  out << "threshold " << to_string(bundle.threshold->kind) << " alpha " << bundle.threshold->alpha
      << " tau " << csv::format_double(bundle.threshold->tau) << " from " << bundle.threshold->fitted_on
      << " training scores\n";
}

void cmd_detect(const RunConfig& config, std::ostream& out) {
  const ModelBundle bundle = load_model(config.model_path());
  if (!bundle.threshold) throw ValidationError("model has no fitted threshold; run 'threshold' first");
  const PreparedData data = load_prepared(config.out_dir);
  const auto scores = score_partition(bundle, data, Partition::test, config);
  const auto flags = detect(scores, *bundle.threshold);
  write_scores_csv(config.scores_path(), scores, flags, data.timestamps);
  out << "scored " << scores.size() << " test items, flagged "
      << std::count(flags.begin(), flags.end(), true) << '\n';
}

void cmd_eval(const RunConfig& config, std::ostream& out) {
  const ModelBundle bundle = load_model(config.model_path());
  const PreparedData data = load_prepared(config.out_dir);
  const auto path = config.scores_path();
  const auto table = read_table(path);
  if (table.header != std::vector<std::string>{"index", "timestamp", "score", "flagged"}) {
    throw ValidationError("'" + path.string() + "': unexpected header");
  }
  // Expected alignment of the test items.
  std::vector<Index> expected;
  Index window = 1;
  if (bundle.architecture() == Architecture::dense_ae) {
    expected = data.plan.test;
  } else {
    window = std::get<LstmAE>(bundle.network).window_length;
    expected = make_partition_windows(data.scaled, data.labels, data.plan.test,
                                      {window, config.window.stride})
                   .end_indices;
  }
  if (table.rows.size() != expected.size()) {
    throw ValidationError("scores file has " + std::to_string(table.rows.size()) + " rows, expected " +
                          std::to_string(expected.size()) + " test items");
  }
  LabelVector flags, truth;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const Index idx = field_index(table.rows[i][0], path);
    if (idx != expected[i]) throw ValidationError("scores file row " + std::to_string(i + 2) + " is misaligned");
    const auto& flag = table.rows[i][3];
    if (flag != "0" && flag != "1") throw ParseError("'" + path.string() + "': flagged must be 0 or 1");
    flags.push_back(flag == "1");
    bool any = false;
    for (Index r = idx - window + 1; r <= idx; ++r) any = any || data.labels.at(static_cast<std::size_t>(r));
    truth.push_back(any);
  }
  const auto report = metrics(confusion(flags, truth));
  const std::string title = std::string(to_string(bundle.architecture())) + " / " +
                            to_string(bundle.score_kind()) +
                            (window > 1 ? " (window-level)" : " (sample-level)");
  out << format_metrics_table(report, title);
  write_metrics_csv(config.out_dir / "metrics.csv", report);
}

void cmd_synth(const RunConfig& config, std::ostream& out) {
  PlantConfig pc;
  if (config.synth_profile == "default") {
    pc = PlantConfig::default_profile(config.seed);
  } else if (config.synth_profile == "healthy") {
    pc = PlantConfig::healthy_profile(config.seed);
  } else {
    throw ValidationError("synth.profile must be 'default' or 'healthy'");
  }
  if (config.synth_samples) pc.n_samples = *config.synth_samples;
  pc.gap_fraction = config.synth_gap_fraction;
  const auto plant = generate(pc);
  const fs::path sensor = config.sensor_csv.empty() ? config.out_dir / "sensor.csv" : config.sensor_csv;
  const fs::path faults = config.fault_csv.empty() ? config.out_dir / "faults.csv" : config.fault_csv;
  write_sensor_csv(sensor, plant.log);
  write_fault_intervals(faults, plant.schedule);
  out << "wrote " << plant.log.rows() << " samples x " << plant.log.channels() << " channels to "
      << sensor.string() << " and " << plant.schedule.intervals().size() << " fault intervals to "
      << faults.string() << '\n';
}

void cmd_export_latent(const RunConfig& config, std::ostream& out) {
  const ModelBundle bundle = load_model(config.model_path());
  const PreparedData data = load_prepared(config.out_dir);
  const auto which = config.latent_partition;
  Matrix latent;
  std::vector<Index> alignment;
  if (bundle.architecture() == Architecture::dense_ae) {
    const auto& rows = which == Partition::train        ? data.plan.train
                       : which == Partition::validation ? data.plan.validation
                                                        : data.plan.test;
    latent = extract_latent(std::get<DenseAE>(bundle.network), gather_rows(data.scaled, rows));
    alignment = rows;
  } else {
    const auto& lstm = std::get<LstmAE>(bundle.network);
    WindowSet windows;
    if (which == Partition::test) {
      windows = make_partition_windows(data.scaled, data.labels, data.plan.test,
                                       {lstm.window_length, config.window.stride});
    } else {
      auto fit = lstm_fit_windows(data, lstm.window_length, config);
      windows = which == Partition::train ? std::move(fit.first) : std::move(fit.second);
    }
    latent = extract_latent(lstm, windows);
    alignment = windows.end_indices;
  }
  write_latent_csv(config.latent_path(), latent, alignment, data.timestamps);
  out << "wrote " << latent.rows() << " latent vectors to " << config.latent_path().string() << '\n';
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Autoencoder fault detection for minute-resolution sensor logs", "faultae"};
  app.require_subcommand(1);
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  app.add_option("--config", config_file, "INI config file");
  app.add_option("--seed", seed, "Random seed (same as --run.seed)");
  app.add_option("--out-dir", out_dir, "Working directory for all stage files (same as --paths.out_dir)");
  std::map<std::string, std::string> overrides;
  for (const auto& key : RunConfig::keys()) app.add_option("--" + key, overrides[key]);

  using Command = void (*)(const RunConfig&, std::ostream&);
  const std::vector<std::pair<std::string, std::pair<Command, std::string>>> commands = {
      {"prepare", {cmd_prepare, "Clean, split and scale a sensor log"}},
      {"train", {cmd_train, "Train an autoencoder on healthy training rows"}},
      {"threshold", {cmd_threshold, "Fit the percentile threshold on training scores"}},
      {"detect", {cmd_detect, "Score the test partition and flag anomalies"}},
      {"eval", {cmd_eval, "Compare flags with fault labels"}},
      {"synth", {cmd_synth, "Generate a synthetic sensor log with faults"}},
      {"export-latent", {cmd_export_latent, "Write latent vectors of a partition"}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.second)->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    RunConfig config;
    if (!config_file.empty()) config.apply(load_ini(config_file));
    KeyValues flags;
    for (const auto& key : RunConfig::keys()) {
      if (app.count("--" + key) > 0) flags[key] = overrides[key];
    }
    config.apply(flags);
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.out_dir = out_dir;
    config.validate();

    for (const auto& [name, entry] : commands) {
      if (app.got_subcommand(name)) entry.first(config, out);
    }
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace faultae::cli
