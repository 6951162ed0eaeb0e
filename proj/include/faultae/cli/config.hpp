#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "faultae/model_io.hpp"
#include "faultae/preprocess.hpp"
#include "faultae/training.hpp"

namespace faultae::cli {

/// Flat "section.key" -> value map read from an INI file.
using KeyValues = std::map<std::string, std::string>;

/// Parses `[section]` headers and `key = value` lines; '#' and ';' start comments.
KeyValues parse_ini(const std::string& text);
KeyValues load_ini(const std::filesystem::path& path);

struct RunConfig {
  // [paths]
  std::filesystem::path sensor_csv;
  std::filesystem::path fault_csv;
  std::filesystem::path model;  // defaults to <out_dir>/model.json
  std::filesystem::path out_dir = "out";
  std::filesystem::path scores;  // defaults to <out_dir>/scores.csv
  std::filesystem::path latent;  // defaults to <out_dir>/latent.csv
  // [data]
  std::string timestamp_column;
  std::string missing_sentinel = "NaN";
  // [split]
  double train_ratio = 0.9;
  double validation_ratio = 0.2;
  // [window]
  WindowSpec window;
  // [model]
  Architecture architecture = Architecture::dense_ae;
  // [train]; learning rate left empty picks the architecture default
  int max_epochs = 25;
  std::optional<double> learning_rate;
  Index batch_size = 256;
  int es_patience = 10;
  int plateau_patience = 5;
  double plateau_factor = 0.2;
  LossKind loss = LossKind::mse;
  int warmup_epochs = 5;
  // [detect]
  double alpha = 95.0;
  // [synth]
  std::string synth_profile = "default";
  std::optional<Index> synth_samples;
  double synth_gap_fraction = 0.0;
  // [latent]
  Partition latent_partition = Partition::test;
  // [run]
  std::uint64_t seed = 0;

  std::filesystem::path model_path() const { return model.empty() ? out_dir / "model.json" : model; }
  std::filesystem::path scores_path() const { return scores.empty() ? out_dir / "scores.csv" : scores; }
  std::filesystem::path latent_path() const { return latent.empty() ? out_dir / "latent.csv" : latent; }

  TrainConfig train_config() const;

  /// Applies "section.key" values; unknown keys and bad values throw ValidationError.
  void apply(const KeyValues& values);
  /// Cross-field checks shared by every command.
  void validate() const;

  /// Every recognised key, for mirroring as --section.key flags.
  static const std::vector<std::string>& keys();
};

}  // namespace faultae::cli
