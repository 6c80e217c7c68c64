#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

namespace grassfeel {

using Vec3 = Eigen::Vector3d;

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AcousticConfig {
  double drive_freq_hz = 40000.0;
  double speed_of_sound_mps = 340.0;

  double wavelength_mm() const { return 1000.0 * speed_of_sound_mps / drive_freq_hz; }
  double wavenumber_per_mm() const;
};

struct GridCell {
  int column = 0;
  int row = 0;

  bool operator==(const GridCell&) const = default;
};

/// One tilted board. Local transducer (c, r) sits at (c·pitch, r·pitch, 0);
/// the board is rotated by Rz(azimuth)·Rx(tilt) about its local origin and
/// that origin is then moved to `origin`.
struct UnitPlacement {
  Vec3 origin = Vec3::Zero();
  double tilt_deg = 0.0;
  double azimuth_deg = 0.0;

  Eigen::Matrix3d rotation() const;
};

struct ArrayConfig {
  std::vector<UnitPlacement> units;
  int columns = 18;
  int rows = 14;
  double pitch_mm = 10.16;
  std::vector<GridCell> omitted{{1, 1}, {2, 1}, {16, 1}};

  int transducers_per_unit() const {
    return columns * rows - static_cast<int>(omitted.size());
  }
};

/// Four boards around the z axis, 90° apart, each tilted 15° toward the axis
/// and pointing at a focal region about 200 mm above the z = 0 plane.
ArrayConfig default_array_config();

/// Single flat board at the world origin.
ArrayConfig single_unit_config(double tilt_deg = 0.0);

struct Transducer {
  Vec3 position = Vec3::Zero();
  Vec3 normal{0.0, 0.0, 1.0};
};

/// Throws GeometryError for an omitted-cell list that is out of range or
/// repeats a cell.
std::vector<Transducer> build_array(const ArrayConfig& cfg);

/// Per-transducer drive phases in [0, 2π).
struct PhaseSet {
  std::vector<double> phases;
};

/// Distances below this are treated as coincident with a transducer.
inline constexpr double kMinDistanceMm = 1.0;

PhaseSet focus_phases(const std::vector<Transducer>& array, const AcousticConfig& acoustic,
                      const Vec3& target);

/// Monopole superposition Σ (a / d) exp(j(φ - k d)), d in mm.
std::complex<double> pressure_at(const std::vector<Transducer>& array,
                                 const AcousticConfig& acoustic, const PhaseSet& phases,
                                 const Vec3& point, double drive_amp);

/// Scan plane through `center` spanned by `u_axis` and `v_axis`.
/// Nodes per axis: floor(extent / resolution) + 1, centered on `center`.
struct ScanGrid {
  Vec3 center = Vec3::Zero();
  Vec3 u_axis{1.0, 0.0, 0.0};
  Vec3 v_axis{0.0, 1.0, 0.0};
  double extent_mm = 40.0;
  double resolution_mm = 1.0;

  int nodes_per_axis() const;
  Vec3 node(int iu, int iv) const;
};

struct FieldMap {
  ScanGrid grid;
  int nodes_u = 0;
  int nodes_v = 0;
  /// Row-major: magnitude(iu, iv) = values[iv * nodes_u + iu].
  std::vector<double> values;

  double at(int iu, int iv) const { return values[static_cast<std::size_t>(iv) * nodes_u + iu]; }
  std::pair<int, int> argmax() const;
};

FieldMap field_scan(const std::vector<Transducer>& array, const AcousticConfig& acoustic,
                    const PhaseSet& phases, const ScanGrid& grid, double drive_amp = 1.0);

/// CSV rows u_mm,v_mm,magnitude with in-plane coordinates relative to the
/// grid center (named x_mm,y_mm for the usual horizontal scan).
std::string field_to_csv(const FieldMap& map);

/// Sidecar describing the scan: grid, target, acoustic constants and a
/// hash of the array geometry.
nlohmann::json field_metadata(const FieldMap& map, const Vec3& target,
                              const AcousticConfig& acoustic, const ArrayConfig& cfg);

std::uint64_t config_hash(const ArrayConfig& cfg);

nlohmann::json array_config_to_json(const ArrayConfig& cfg);
ArrayConfig array_config_from_json(const nlohmann::json& j);

}  // namespace grassfeel
