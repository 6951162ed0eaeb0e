#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "faultae/cli/config.hpp"
#include "faultae/dataset.hpp"

namespace faultae::cli {

enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitValidation = 2, kExitNumeric = 3 };

/// Parses argv (without the program name), runs one subcommand and maps
/// failures to exit codes. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Scaled matrix reassembled from a prepare run, plus its bookkeeping.
struct PreparedData {
  std::vector<std::string> channels;
  std::vector<std::string> timestamps;
  Eigen::MatrixXd scaled;  // N x d; every row belongs to exactly one partition
  LabelVector labels;
  SplitPlan plan;
  ScalerParams scaler;
};

PreparedData load_prepared(const std::filesystem::path& dir);

void cmd_prepare(const RunConfig& config, std::ostream& out);
void cmd_train(const RunConfig& config, std::ostream& out);
void cmd_threshold(const RunConfig& config, std::ostream& out);
void cmd_detect(const RunConfig& config, std::ostream& out);
void cmd_eval(const RunConfig& config, std::ostream& out);
void cmd_synth(const RunConfig& config, std::ostream& out);
void cmd_export_latent(const RunConfig& config, std::ostream& out);

}  // namespace faultae::cli
