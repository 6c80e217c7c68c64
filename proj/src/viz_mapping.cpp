#include "grassfeel/viz_mapping.hpp"

#include <cmath>

namespace grassfeel {

std::string_view to_string(ColorTag tag) {
  switch (tag) {
    case ColorTag::band_low: return "band_low";
    case ColorTag::band_mid: return "band_mid";
    case ColorTag::band_high: return "band_high";
  }
  return "band_low";
}

GrassSceneSpec scene_from_params(const ParamDomain& domain, const HapticParams& p) {
  const ParamVector v = to_normalized(domain, p);
  constexpr std::array<ColorTag, 3> tags{ColorTag::band_low, ColorTag::band_mid,
                                         ColorTag::band_high};
  GrassSceneSpec scene;
  for (std::size_t band = 0; band < 3; ++band) {
    const double freq = v[2 * band];
    const double amp = v[2 * band + 1];
    scene.bands[band].color_tag = tags[band];
    scene.bands[band].blade_count =
        static_cast<int>(std::lround(kMinBlades + (kMaxBlades - kMinBlades) * freq));
    scene.bands[band].blade_scale = std::lerp(kMinBladeScale, kMaxBladeScale, amp);
  }
  scene.wind_speed_norm = v[static_cast<std::size_t>(ParamAxis::move_freq)];
  return scene;
}

nlohmann::json scene_to_json(const GrassSceneSpec& scene) {
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& b : scene.bands) {
    bands.push_back({{"color_tag", std::string(to_string(b.color_tag))},
                     {"blade_count", b.blade_count},
                     {"blade_scale", b.blade_scale}});
  }
  return {{"bands", bands}, {"wind_speed_norm", scene.wind_speed_norm}};
}

}  // namespace grassfeel
