#pragma once

#include <array>
#include <string_view>

#include <json.hpp>

#include "grassfeel/param_space.hpp"

namespace grassfeel {

enum class ColorTag { band_low, band_mid, band_high };

std::string_view to_string(ColorTag tag);

struct GrassBandSpec {
  ColorTag color_tag = ColorTag::band_low;
  int blade_count = 20;
  double blade_scale = 0.2;

  bool operator==(const GrassBandSpec&) const = default;
};

/// What the UI draws: one grass group per waveform band (blade count from
/// frequency, blade size from amplitude) plus a global wind speed.
struct GrassSceneSpec {
  std::array<GrassBandSpec, 3> bands{};
  double wind_speed_norm = 0.0;

  bool operator==(const GrassSceneSpec&) const = default;
};

inline constexpr int kMinBlades = 20;
inline constexpr int kMaxBlades = 120;
inline constexpr double kMinBladeScale = 0.2;
inline constexpr double kMaxBladeScale = 1.0;

/// Throws DomainError when p lies outside the domain.
GrassSceneSpec scene_from_params(const ParamDomain& domain, const HapticParams& p);

nlohmann::json scene_to_json(const GrassSceneSpec& scene);

}  // namespace grassfeel
