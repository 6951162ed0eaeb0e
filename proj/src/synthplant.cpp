#include "faultae/synthplant.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "faultae/random.hpp"

namespace faultae {

namespace {

std::vector<ChannelSignal> default_signals(Index channels) {
  std::vector<ChannelSignal> s;
  for (Index c = 0; c < channels; ++c) {
    ChannelSignal sig;
    sig.period = (c % 2 == 0) ? 60.0 : 97.0;
    sig.amplitude = 2.0;
    sig.phase = 0.5 * std::numbers::pi * static_cast<double>(c);
    sig.offset = 50.0 + 10.0 * static_cast<double>(c);
    sig.noise_sigma = 0.2;
    s.push_back(sig);
  }
  return s;
}

// Identity plus half-weight coupling to both cyclic neighbours.
Matrix default_mixing(Index channels) {
  Matrix m = Matrix::Identity(channels, channels);
  if (channels > 1) {
    for (Index c = 0; c < channels; ++c) {
      m(c, (c + 1) % channels) += 0.5;
      m(c, (c + channels - 1) % channels) += 0.5;
    }
  }
  return m;
}

Index decorrelation_lag(Index channel) { return 97 * (channel + 1); }

}  // namespace

PlantConfig PlantConfig::healthy_profile(std::uint64_t seed, Index n_samples) {
  PlantConfig c;
  c.seed = seed;
  c.n_samples = n_samples;
  c.signals = default_signals(c.n_channels);
  c.mixing = default_mixing(c.n_channels);
  return c;
}

PlantConfig PlantConfig::default_profile(std::uint64_t seed) {
  PlantConfig c = healthy_profile(seed);
  c.faults = {
      {6000, 150, FaultMode::mean_shift, 3.0, {0, 1, 2, 3, 4}},
      {11000, 120, FaultMode::variance_burst, 4.0, {}},
      {16000, 130, FaultMode::decorrelate, 1.0, {}},
  };
  return c;
}

void PlantConfig::validate() const {
  if (n_channels < 1 || n_samples < 1) throw ValidationError("plant needs channels and samples");
  if (static_cast<Index>(signals.size()) != n_channels) {
    throw ValidationError("plant needs one signal spec per channel");
  }
  if (mixing.rows() != n_channels || mixing.cols() != n_channels) {
    throw ValidationError("mixing matrix must be n_channels x n_channels");
  }
  for (const auto& s : signals) {
    if (!(s.period > 0.0) || !(s.noise_sigma >= 0.0)) {
      throw ValidationError("signal period must be positive and noise sigma non-negative");
    }
  }
  for (const auto& f : faults) {
    if (f.start < 0 || f.length < 1 || f.start + f.length > n_samples) {
      throw ValidationError("fault interval lies outside [0, n_samples)");
    }
    if (!(f.k > 0.0)) throw ValidationError("fault magnitude k must be positive");
    for (Index c : f.channels) {
      if (c < 0 || c >= n_channels) throw ValidationError("fault channel out of range");
    }
  }
  if (!(gap_fraction >= 0.0 && gap_fraction < 1.0)) throw ValidationError("gap_fraction must lie in [0, 1)");
}

SyntheticPlant generate(const PlantConfig& config) {
  config.validate();
  const Index n = config.n_samples;
  const Index channels = config.n_channels;

  auto source = [&](Index j, double t) {
    const auto& s = config.signals[static_cast<std::size_t>(j)];
    return s.amplitude * std::sin(2.0 * std::numbers::pi * t / s.period + s.phase);
  };
  auto deterministic = [&](Index c, double t) {
    double v = config.signals[static_cast<std::size_t>(c)].offset;
    for (Index j = 0; j < channels; ++j) {
      if (config.mixing(c, j) != 0.0) v += config.mixing(c, j) * source(j, t);
    }
    return v;
  };
  auto affects = [](const FaultSpec& f, Index c) {
    if (f.channels.empty()) return true;
    for (Index k : f.channels)
      if (k == c) return true;
    return false;
  };

  Matrix values(n, channels);
  for (Index c = 0; c < channels; ++c) {
    Rng noise(substream_seed(config.seed, static_cast<std::uint64_t>(c)));
    const auto& sig = config.signals[static_cast<std::size_t>(c)];
    for (Index t = 0; t < n; ++t) {
      double time = static_cast<double>(t);
      double noise_scale = 1.0;
      double shift = 0.0;
      for (const auto& f : config.faults) {
        if (t < f.start || t >= f.start + f.length || !affects(f, c)) continue;
        switch (f.mode) {
          case FaultMode::mean_shift:
            shift += f.k * sig.noise_sigma;
            break;
          case FaultMode::variance_burst:
            noise_scale *= f.k;
            break;
          case FaultMode::decorrelate:
            time += static_cast<double>(decorrelation_lag(c));
            break;
        }
      }
      values(t, c) = deterministic(c, time) + shift + noise_scale * sig.noise_sigma * noise.normal();
    }
  }
  if (config.gap_fraction > 0.0) {
    for (Index c = 0; c < channels; ++c) {
      Rng gaps(substream_seed(config.seed, 0x10000 + static_cast<std::uint64_t>(c)));
      for (Index t = 0; t < n; ++t) {
        if (gaps.uniform() < config.gap_fraction) values(t, c) = kMissing;
      }
    }
  }

  std::vector<Minute> stamps;
  stamps.reserve(static_cast<std::size_t>(n));
  for (Index t = 0; t < n; ++t) stamps.push_back(config.start + t);
  std::vector<std::string> names;
  for (Index c = 0; c < channels; ++c) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%02ld", static_cast<long>(c + 1));
    names.emplace_back(buf);
  }
  std::vector<FaultInterval> intervals;
  for (const auto& f : config.faults) intervals.push_back({config.start + f.start, f.length});

  SyntheticPlant plant{SensorLog(std::move(stamps), std::move(names), std::move(values)),
                       FaultSchedule(std::move(intervals)), {}};
  plant.labels = label_samples(plant.log, plant.schedule);
  return plant;
}

}  // namespace faultae
