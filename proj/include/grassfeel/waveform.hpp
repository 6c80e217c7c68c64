#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "grassfeel/param_space.hpp"

namespace grassfeel {

inline constexpr std::size_t kBandCount = 3;

struct Band {
  double freq_hz = 0.0;
  double amp = 0.0;

  bool operator==(const Band&) const = default;
};

/// Low, mid and high vibration components.
struct WaveformSpec {
  std::array<Band, kBandCount> bands{};

  bool operator==(const WaveformSpec&) const = default;
};

struct RenderConfig {
  double sample_rate_hz = 4000.0;
  std::size_t block_size = 64;
};

struct SampleBlock {
  std::int64_t start_index = 0;
  std::vector<double> samples;
};

/// Accumulated per-band phases in radians, each kept in [0, 2π).
using PhaseState = std::array<double, kBandCount>;

WaveformSpec spec_from_params(const HapticParams& p);

/// max(1, Σ amp). Dividing by it keeps the sum in [-1, 1] without boosting
/// quiet settings.
double normalization(const WaveformSpec& spec);

/// Sum of the three sines at absolute time t, normalized to [-1, 1].
double sample(const WaveformSpec& spec, double t);

/// Unipolar drive amplitude (1 + s) / 2 in [0, 1].
double envelope(const WaveformSpec& spec, double t);
double envelope_from_sample(double s);

/// Throws std::invalid_argument when the rate cannot carry every band.
void validate(const RenderConfig& cfg, const WaveformSpec& spec);

/// Renders cfg.block_size samples starting at `start_index` from the phase
/// accumulators and advances them. Sample n uses the phases before the n-th
/// advance, so a fresh accumulator reproduces sample(spec, n / rate).
SampleBlock render_block(const WaveformSpec& spec, const RenderConfig& cfg, PhaseState& phases,
                         std::int64_t start_index = 0);

/// `count` samples from zero phase, the form shipped as the UI preview.
std::vector<double> render_preview(const WaveformSpec& spec, double sample_rate_hz,
                                   std::size_t count);

}  // namespace grassfeel
