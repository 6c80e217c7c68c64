#include "grassfeel/array_field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include <Eigen/Geometry>

#include "grassfeel/hash.hpp"

namespace grassfeel {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

constexpr double kDefaultTiltDeg = 15.0;
// Board centers sit on a 160 mm circle; closer than ~150 mm the tangential
// edges of neighbouring boards would overlap.
constexpr double kDefaultRingRadiusMm = 160.0;

void check_omitted(const ArrayConfig& cfg) {
  if (cfg.columns <= 0 || cfg.rows <= 0 || !(cfg.pitch_mm > 0.0)) {
    throw GeometryError("array grid needs positive columns, rows and pitch");
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& cell : cfg.omitted) {
    if (cell.column < 0 || cell.column >= cfg.columns || cell.row < 0 || cell.row >= cfg.rows) {
      throw GeometryError("omitted cell outside the transducer grid");
    }
    if (!seen.emplace(cell.column, cell.row).second) {
      throw GeometryError("omitted cell listed twice");
    }
  }
}

bool is_omitted(const ArrayConfig& cfg, int column, int row) {
  return std::any_of(cfg.omitted.begin(), cfg.omitted.end(),
                     [&](const GridCell& c) { return c.column == column && c.row == row; });
}

}  // namespace

double AcousticConfig::wavenumber_per_mm() const { return kTwoPi / wavelength_mm(); }

Eigen::Matrix3d UnitPlacement::rotation() const {
  return (Eigen::AngleAxisd(deg_to_rad(azimuth_deg), Vec3::UnitZ()) *
          Eigen::AngleAxisd(deg_to_rad(tilt_deg), Vec3::UnitX()))
      .toRotationMatrix();
}

ArrayConfig default_array_config() {
  ArrayConfig cfg;
  const Vec3 local_center(0.5 * (cfg.columns - 1) * cfg.pitch_mm,
                          0.5 * (cfg.rows - 1) * cfg.pitch_mm, 0.0);
  for (int k = 0; k < 4; ++k) {
    const double ring_angle = 90.0 * k;
    UnitPlacement unit;
    unit.tilt_deg = kDefaultTiltDeg;
    // Local +y is turned to face the axis so the tilt leans the board inward.
    unit.azimuth_deg = ring_angle - 90.0;
    const double a = deg_to_rad(ring_angle);
    const Vec3 world_center(kDefaultRingRadiusMm * std::cos(a),
                            kDefaultRingRadiusMm * std::sin(a), 0.0);
    unit.origin = world_center - unit.rotation() * local_center;
    cfg.units.push_back(unit);
  }
  return cfg;
}

ArrayConfig single_unit_config(double tilt_deg) {
  ArrayConfig cfg;
  cfg.units.push_back(UnitPlacement{Vec3::Zero(), tilt_deg, 0.0});
  return cfg;
}

std::vector<Transducer> build_array(const ArrayConfig& cfg) {
  check_omitted(cfg);
  std::vector<Transducer> out;
  out.reserve(cfg.units.size() * static_cast<std::size_t>(cfg.transducers_per_unit()));
  for (const auto& unit : cfg.units) {
    const Eigen::Matrix3d rot = unit.rotation();
    const Vec3 normal = rot.col(2).normalized();
    for (int row = 0; row < cfg.rows; ++row) {
      for (int column = 0; column < cfg.columns; ++column) {
        if (is_omitted(cfg, column, row)) continue;
        const Vec3 local(column * cfg.pitch_mm, row * cfg.pitch_mm, 0.0);
        out.push_back(Transducer{unit.origin + rot * local, normal});
      }
    }
  }
  return out;
}

PhaseSet focus_phases(const std::vector<Transducer>& array, const AcousticConfig& acoustic,
                      const Vec3& target) {
  const double k = acoustic.wavenumber_per_mm();
  PhaseSet set;
  set.phases.reserve(array.size());
  for (const auto& tr : array) {
    const double d = (target - tr.position).norm();
    if (d < kMinDistanceMm) throw GeometryError("focus target coincides with a transducer");
    double phi = std::fmod(k * d, kTwoPi);
    if (phi >= kTwoPi) phi -= kTwoPi;
    set.phases.push_back(phi);
  }
  return set;
}

std::complex<double> pressure_at(const std::vector<Transducer>& array,
                                 const AcousticConfig& acoustic, const PhaseSet& phases,
                                 const Vec3& point, double drive_amp) {
  if (phases.phases.size() != array.size()) {
    throw GeometryError("phase set does not match the array");
  }
  const double k = acoustic.wavenumber_per_mm();
  std::complex<double> p{0.0, 0.0};
  for (std::size_t i = 0; i < array.size(); ++i) {
    const double d = (point - array[i].position).norm();
    if (d < kMinDistanceMm) throw GeometryError("field point coincides with a transducer");
    p += std::polar(drive_amp / d, phases.phases[i] - k * d);
  }
  return p;
}

int ScanGrid::nodes_per_axis() const {
  if (!(resolution_mm > 0.0) || extent_mm < 0.0) {
    throw GeometryError("scan grid needs a positive resolution and non-negative extent");
  }
  return static_cast<int>(std::floor(extent_mm / resolution_mm + 1e-9)) + 1;
}

Vec3 ScanGrid::node(int iu, int iv) const {
  const int n = nodes_per_axis();
  const double half = 0.5 * (n - 1);
  return center + (iu - half) * resolution_mm * u_axis + (iv - half) * resolution_mm * v_axis;
}

std::pair<int, int> FieldMap::argmax() const {
  const auto it = std::max_element(values.begin(), values.end());
  const auto idx = static_cast<int>(std::distance(values.begin(), it));
  return {idx % nodes_u, idx / nodes_u};
}

FieldMap field_scan(const std::vector<Transducer>& array, const AcousticConfig& acoustic,
                    const PhaseSet& phases, const ScanGrid& grid, double drive_amp) {
  FieldMap map;
  map.grid = grid;
  map.nodes_u = map.nodes_v = grid.nodes_per_axis();
  map.values.resize(static_cast<std::size_t>(map.nodes_u) * map.nodes_v);
  // Nodes are independent; rows could be split across workers as-is.
  for (int iv = 0; iv < map.nodes_v; ++iv) {
    for (int iu = 0; iu < map.nodes_u; ++iu) {
      map.values[static_cast<std::size_t>(iv) * map.nodes_u + iu] =
          std::abs(pressure_at(array, acoustic, phases, grid.node(iu, iv), drive_amp));
    }
  }
  return map;
}

std::string field_to_csv(const FieldMap& map) {
  std::string out = "x_mm,y_mm,magnitude\n";
  const double half = 0.5 * (map.nodes_u - 1);
  char line[128];
  for (int iv = 0; iv < map.nodes_v; ++iv) {
    for (int iu = 0; iu < map.nodes_u; ++iu) {
      std::snprintf(line, sizeof line, "%.6f,%.6f,%.12g\n", (iu - half) * map.grid.resolution_mm,
                    (iv - half) * map.grid.resolution_mm, map.at(iu, iv));
      out += line;
    }
  }
  return out;
}

nlohmann::json field_metadata(const FieldMap& map, const Vec3& target,
                              const AcousticConfig& acoustic, const ArrayConfig& cfg) {
  const auto vec = [](const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); };
  const auto [iu, iv] = map.argmax();
  return {
      {"grid",
       {{"center_mm", vec(map.grid.center)},
        {"u_axis", vec(map.grid.u_axis)},
        {"v_axis", vec(map.grid.v_axis)},
        {"extent_mm", map.grid.extent_mm},
        {"resolution_mm", map.grid.resolution_mm},
        {"nodes_u", map.nodes_u},
        {"nodes_v", map.nodes_v}}},
      {"target_mm", vec(target)},
      {"argmax_mm", vec(map.grid.node(iu, iv))},
      {"acoustic",
       {{"drive_freq_hz", acoustic.drive_freq_hz},
        {"speed_of_sound_mps", acoustic.speed_of_sound_mps},
        {"wavelength_mm", acoustic.wavelength_mm()}}},
      {"config_hash", hash_hex(config_hash(cfg))},
  };
}

nlohmann::json array_config_to_json(const ArrayConfig& cfg) {
  nlohmann::json units = nlohmann::json::array();
  for (const auto& u : cfg.units) {
    units.push_back({{"origin_mm", {u.origin.x(), u.origin.y(), u.origin.z()}},
                     {"tilt_deg", u.tilt_deg},
                     {"azimuth_deg", u.azimuth_deg}});
  }
  nlohmann::json omitted = nlohmann::json::array();
  for (const auto& c : cfg.omitted) omitted.push_back({c.column, c.row});
  return {{"units", units},
          {"columns", cfg.columns},
          {"rows", cfg.rows},
          {"pitch_mm", cfg.pitch_mm},
          {"omitted", omitted}};
}

ArrayConfig array_config_from_json(const nlohmann::json& j) {
  ArrayConfig cfg;
  cfg.units.clear();
  for (const auto& u : j.at("units")) {
    const auto o = u.at("origin_mm").get<std::array<double, 3>>();
    cfg.units.push_back(UnitPlacement{Vec3(o[0], o[1], o[2]), u.at("tilt_deg").get<double>(),
                                      u.value("azimuth_deg", 0.0)});
  }
  cfg.columns = j.value("columns", cfg.columns);
  cfg.rows = j.value("rows", cfg.rows);
  cfg.pitch_mm = j.value("pitch_mm", cfg.pitch_mm);
  if (j.contains("omitted")) {
    cfg.omitted.clear();
    for (const auto& c : j.at("omitted")) {
      cfg.omitted.push_back(GridCell{c.at(0).get<int>(), c.at(1).get<int>()});
    }
  }
  check_omitted(cfg);
  return cfg;
}

std::uint64_t config_hash(const ArrayConfig& cfg) {
  return fnv1a64(array_config_to_json(cfg).dump());
}

}  // namespace grassfeel
