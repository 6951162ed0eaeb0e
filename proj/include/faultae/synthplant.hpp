#pragma once

#include <cstdint>
#include <vector>

#include "faultae/dataset.hpp"
#include "faultae/models.hpp"

namespace faultae {

/// Deterministic part of one channel's source: amplitude * sin(2 pi t / period + phase).
struct ChannelSignal {
  double period = 60.0;
  double amplitude = 1.0;
  double phase = 0.0;
  double offset = 0.0;
  double noise_sigma = 0.1;
};

enum class FaultMode {
  mean_shift,      // add k * noise_sigma
  variance_burst,  // noise standard deviation multiplied by k
  decorrelate,     // deterministic part read at a channel-specific time lag
};

struct FaultSpec {
  Index start = 0;
  Index length = 0;
  FaultMode mode = FaultMode::mean_shift;
  double k = 3.0;
  std::vector<Index> channels;  // empty = every channel
};

/// Reading of channel c at sample t (healthy):
///   offset_c + sum_j mixing(c, j) * source_j(t) + noise_sigma_c * N(0, 1)
struct PlantConfig {
  Index n_channels = 8;
  Index n_samples = 20000;
  std::uint64_t seed = 0;
  std::vector<ChannelSignal> signals;
  Matrix mixing;
  std::vector<FaultSpec> faults;
  /// Probability of knocking out each cell after generation (for imputation tests).
  double gap_fraction = 0.0;
  Minute start = parse_minute("2018-04-01 00:00");

  /// 8 channels, 20 000 samples, three faults covering 2% of the samples:
  /// a 3-sigma mean shift on five channels, a x4 variance burst and a
  /// decorrelation episode.
  static PlantConfig default_profile(std::uint64_t seed);
  /// Same plant without faults.
  static PlantConfig healthy_profile(std::uint64_t seed, Index n_samples = 20000);

  void validate() const;
};

struct SyntheticPlant {
  SensorLog log;
  FaultSchedule schedule;
  LabelVector labels;
};

SyntheticPlant generate(const PlantConfig& config);

}  // namespace faultae
