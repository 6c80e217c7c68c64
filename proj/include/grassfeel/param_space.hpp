#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace grassfeel {

inline constexpr std::size_t kParamCount = 7;

// Axis order is fixed across the whole engine.
enum class ParamAxis : std::size_t {
  f_low = 0,
  a_low = 1,
  f_mid = 2,
  a_mid = 3,
  f_high = 4,
  a_high = 5,
  move_freq = 6,
};

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ParamDescriptor {
  std::string name;
  std::string unit;
  double min = 0.0;
  double max = 1.0;

  bool operator==(const ParamDescriptor&) const = default;
};

/// Point of the normalized search cube [0,1]^7.
struct ParamVector {
  std::array<double, kParamCount> values{};

  static ParamVector filled(double v);

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  bool in_unit_cube() const;
  bool operator==(const ParamVector&) const = default;
};

double distance(const ParamVector& a, const ParamVector& b);

struct HapticParams {
  double f_low_hz = 10.0;
  double a_low = 0.0;
  double f_mid_hz = 30.0;
  double a_mid = 0.0;
  double f_high_hz = 100.0;
  double a_high = 0.0;
  double move_freq_hz = 0.2;

  /// Fields in axis order.
  std::array<double, kParamCount> as_array() const;
  static HapticParams from_array(const std::array<double, kParamCount>& a);

  bool operator==(const HapticParams&) const = default;
};

class ParamDomain {
 public:
  /// Throws DomainError unless every descriptor has min < max.
  explicit ParamDomain(std::array<ParamDescriptor, kParamCount> descriptors);

  const std::array<ParamDescriptor, kParamCount>& descriptors() const { return descriptors_; }
  const ParamDescriptor& operator[](std::size_t i) const { return descriptors_[i]; }
  const ParamDescriptor& operator[](ParamAxis axis) const {
    return descriptors_[static_cast<std::size_t>(axis)];
  }

  bool contains(const HapticParams& p) const;
  bool operator==(const ParamDomain&) const = default;

 private:
  std::array<ParamDescriptor, kParamCount> descriptors_;
};

/// Low / mid / high bands, unit amplitudes, 0.2-1 Hz lateral movement.
ParamDomain default_domain();

/// Affine de-normalization. Throws DomainError for points outside the cube.
HapticParams to_physical(const ParamDomain& domain, const ParamVector& v);

/// Inverse of to_physical. Throws DomainError for out-of-range parameters.
ParamVector to_normalized(const ParamDomain& domain, const HapticParams& p);

// JSON forms: descriptors as an array of {name, unit, min, max}; vectors as
// plain arrays; params as an object keyed by field name.
void to_json(nlohmann::json& j, const ParamDescriptor& d);
void from_json(const nlohmann::json& j, ParamDescriptor& d);
nlohmann::json domain_to_json(const ParamDomain& domain);
ParamDomain domain_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const ParamVector& v);
void from_json(const nlohmann::json& j, ParamVector& v);
void to_json(nlohmann::json& j, const HapticParams& p);
void from_json(const nlohmann::json& j, HapticParams& p);

}  // namespace grassfeel
