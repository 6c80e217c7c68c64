#include "grassfeel/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace grassfeel {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

WaveformSpec spec_from_params(const HapticParams& p) {
  return WaveformSpec{{{{p.f_low_hz, p.a_low}, {p.f_mid_hz, p.a_mid}, {p.f_high_hz, p.a_high}}}};
}

double normalization(const WaveformSpec& spec) {
  double total = 0.0;
  for (const auto& b : spec.bands) total += b.amp;
  return std::max(1.0, total);
}

double sample(const WaveformSpec& spec, double t) {
  double s = 0.0;
  for (const auto& b : spec.bands) s += b.amp * std::sin(kTwoPi * b.freq_hz * t);
  return s / normalization(spec);
}

double envelope_from_sample(double s) { return 0.5 * (1.0 + s); }

double envelope(const WaveformSpec& spec, double t) {
  return envelope_from_sample(sample(spec, t));
}

void validate(const RenderConfig& cfg, const WaveformSpec& spec) {
  if (cfg.block_size == 0) throw std::invalid_argument("block size must be positive");
  for (const auto& b : spec.bands) {
    if (!(cfg.sample_rate_hz > 2.0 * b.freq_hz)) {
      throw std::invalid_argument("sample rate below Nyquist for a waveform band");
    }
  }
}

SampleBlock render_block(const WaveformSpec& spec, const RenderConfig& cfg, PhaseState& phases,
                         std::int64_t start_index) {
  validate(cfg, spec);
  std::array<double, kBandCount> increments{};
  for (std::size_t i = 0; i < kBandCount; ++i) {
    increments[i] = kTwoPi * spec.bands[i].freq_hz / cfg.sample_rate_hz;
  }
  const double norm = normalization(spec);

  SampleBlock block;
  block.start_index = start_index;
  block.samples.resize(cfg.block_size);
  for (auto& out : block.samples) {
    double s = 0.0;
    for (std::size_t i = 0; i < kBandCount; ++i) {
      s += spec.bands[i].amp * std::sin(phases[i]);
      phases[i] += increments[i];
      if (phases[i] >= kTwoPi) phases[i] -= kTwoPi;
    }
    out = std::clamp(s / norm, -1.0, 1.0);
  }
  return block;
}

std::vector<double> render_preview(const WaveformSpec& spec, double sample_rate_hz,
                                   std::size_t count) {
  PhaseState phases{};
  return render_block(spec, RenderConfig{sample_rate_hz, count}, phases).samples;
}

}  // namespace grassfeel
