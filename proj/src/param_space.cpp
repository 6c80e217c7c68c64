#include "grassfeel/param_space.hpp"

#include <cmath>
#include <utility>

namespace grassfeel {

ParamVector ParamVector::filled(double v) {
  ParamVector out;
  out.values.fill(v);
  return out;
}

bool ParamVector::in_unit_cube() const {
  for (double v : values) {
    // NaN fails both comparisons.
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return true;
}

double distance(const ParamVector& a, const ParamVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

std::array<double, kParamCount> HapticParams::as_array() const {
  return {f_low_hz, a_low, f_mid_hz, a_mid, f_high_hz, a_high, move_freq_hz};
}

HapticParams HapticParams::from_array(const std::array<double, kParamCount>& a) {
  return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]};
}

ParamDomain::ParamDomain(std::array<ParamDescriptor, kParamCount> descriptors)
    : descriptors_(std::move(descriptors)) {
  for (const auto& d : descriptors_) {
    if (!(d.min < d.max)) {
      throw DomainError("parameter '" + d.name + "' needs min < max");
    }
  }
}

bool ParamDomain::contains(const HapticParams& p) const {
  const auto values = p.as_array();
  for (std::size_t i = 0; i < kParamCount; ++i) {
    if (!(values[i] >= descriptors_[i].min && values[i] <= descriptors_[i].max)) return false;
  }
  return true;
}

ParamDomain default_domain() {
  return ParamDomain({{
      {"f_low", "Hz", 10.0, 30.0},
      {"a_low", "", 0.0, 1.0},
      {"f_mid", "Hz", 30.0, 100.0},
      {"a_mid", "", 0.0, 1.0},
      {"f_high", "Hz", 100.0, 300.0},
      {"a_high", "", 0.0, 1.0},
      {"move_freq", "Hz", 0.2, 1.0},
  }});
}

HapticParams to_physical(const ParamDomain& domain, const ParamVector& v) {
  if (!v.in_unit_cube()) throw DomainError("parameter vector outside the unit cube");
  std::array<double, kParamCount> out{};
  for (std::size_t i = 0; i < kParamCount; ++i) {
    // std::lerp is exact at t = 0 and t = 1 and monotone in t.
    out[i] = std::lerp(domain[i].min, domain[i].max, v[i]);
  }
  return HapticParams::from_array(out);
}

ParamVector to_normalized(const ParamDomain& domain, const HapticParams& p) {
  if (!domain.contains(p)) throw DomainError("haptic parameters outside the domain");
  const auto values = p.as_array();
  ParamVector out;
  for (std::size_t i = 0; i < kParamCount; ++i) {
    const auto& d = domain[i];
    if (values[i] == d.max) {
      out[i] = 1.0;
    } else {
      out[i] = (values[i] - d.min) / (d.max - d.min);
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const ParamDescriptor& d) {
  j = nlohmann::json{{"name", d.name}, {"unit", d.unit}, {"min", d.min}, {"max", d.max}};
}

void from_json(const nlohmann::json& j, ParamDescriptor& d) {
  j.at("name").get_to(d.name);
  j.at("unit").get_to(d.unit);
  j.at("min").get_to(d.min);
  j.at("max").get_to(d.max);
}

nlohmann::json domain_to_json(const ParamDomain& domain) {
  return nlohmann::json(domain.descriptors());
}

ParamDomain domain_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != kParamCount) {
    throw DomainError("domain must be an array of 7 descriptors");
  }
  return ParamDomain(j.get<std::array<ParamDescriptor, kParamCount>>());
}

void to_json(nlohmann::json& j, const ParamVector& v) { j = v.values; }

void from_json(const nlohmann::json& j, ParamVector& v) {
  if (!j.is_array() || j.size() != kParamCount) {
    throw DomainError("parameter vector must have 7 entries");
  }
  v.values = j.get<std::array<double, kParamCount>>();
}

void to_json(nlohmann::json& j, const HapticParams& p) {
  j = nlohmann::json{{"f_low_hz", p.f_low_hz},   {"a_low", p.a_low},
                     {"f_mid_hz", p.f_mid_hz},   {"a_mid", p.a_mid},
                     {"f_high_hz", p.f_high_hz}, {"a_high", p.a_high},
                     {"move_freq_hz", p.move_freq_hz}};
}

void from_json(const nlohmann::json& j, HapticParams& p) {
  j.at("f_low_hz").get_to(p.f_low_hz);
  j.at("a_low").get_to(p.a_low);
  j.at("f_mid_hz").get_to(p.f_mid_hz);
  j.at("a_mid").get_to(p.a_mid);
  j.at("f_high_hz").get_to(p.f_high_hz);
  j.at("a_high").get_to(p.a_high);
  j.at("move_freq_hz").get_to(p.move_freq_hz);
}

}  // namespace grassfeel
