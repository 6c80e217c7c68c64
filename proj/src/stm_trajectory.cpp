#include "grassfeel/stm_trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>

namespace grassfeel {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Absorbs rounding in t·f·N so a timestamp on a hop boundary lands on the
// new hop instead of the previous one.
constexpr double kHopTolerance = 1e-9;

bool is_unit(const Vec3& v) { return std::abs(v.norm() - 1.0) <= 1e-9; }

}  // namespace

void validate(const StmConfig& cfg) {
  if (!(cfg.circle_radius_mm > 0.0 && cfg.stm_freq_hz > 0.0 && cfg.step_mm > 0.0 &&
        cfg.path_length_mm > 0.0)) {
    throw std::invalid_argument("STM radius, frequency, step and path length must be positive");
  }
  if (!is_unit(cfg.path_axis) || !is_unit(cfg.plane_normal)) {
    throw std::invalid_argument("STM path axis and plane normal must be unit vectors");
  }
  if (std::abs(cfg.path_axis.dot(cfg.plane_normal)) > 1e-9) {
    throw std::invalid_argument("STM path axis must lie in the focal plane");
  }
}

int points_per_revolution(const StmConfig& cfg) {
  const double circumference = kTwoPi * cfg.circle_radius_mm;
  return std::max(3, static_cast<int>(std::lround(circumference / cfg.step_mm)));
}

double effective_step_mm(const StmConfig& cfg) {
  return kTwoPi * cfg.circle_radius_mm / points_per_revolution(cfg);
}

double chord_step_mm(const StmConfig& cfg) {
  return 2.0 * cfg.circle_radius_mm * std::sin(std::numbers::pi / points_per_revolution(cfg));
}

double frame_interval_s(const StmConfig& cfg) {
  return 1.0 / (cfg.stm_freq_hz * points_per_revolution(cfg));
}

double center_offset(const StmConfig& cfg, double move_freq_hz, double t) {
  return 0.5 * cfg.path_length_mm * std::sin(kTwoPi * move_freq_hz * t);
}

double center_offset(double move_freq_hz, double t) {
  return center_offset(StmConfig{}, move_freq_hz, t);
}

int hop_index(const StmConfig& cfg, double t) {
  const int n = points_per_revolution(cfg);
  const auto hop = static_cast<long long>(std::floor(t * cfg.stm_freq_hz * n + kHopTolerance));
  const auto k = static_cast<int>(hop % n);
  return k < 0 ? k + n : k;
}

FocusFrame focus_at(const StmConfig& cfg, const HapticParams& p, const WaveformSpec& spec,
                    double t) {
  const Vec3 e1 = cfg.path_axis;
  const Vec3 e2 = cfg.plane_normal.cross(e1);
  const double angle = kTwoPi * hop_index(cfg, t) / points_per_revolution(cfg);

  FocusFrame frame;
  frame.t = t;
  frame.position = cfg.workspace_origin + center_offset(cfg, p.move_freq_hz, t) * e1 +
                   cfg.circle_radius_mm * (std::cos(angle) * e1 + std::sin(angle) * e2);
  frame.amplitude = envelope(spec, t);
  return frame;
}

std::vector<FocusFrame> schedule(const StmConfig& cfg, const HapticParams& p,
                                 const WaveformSpec& spec, double t0, double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("schedule duration must be positive");
  validate(cfg);
  const double dt = frame_interval_s(cfg);
  const auto count = static_cast<std::size_t>(std::ceil(duration / dt - kHopTolerance));

  std::vector<FocusFrame> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    frames.push_back(focus_at(cfg, p, spec, t0 + static_cast<double>(i) * dt));
  }
  return frames;
}

std::string schedule_to_csv(const std::vector<FocusFrame>& frames) {
  std::string out = "t_s,x_mm,y_mm,z_mm,amplitude\n";
  char line[160];
  for (const auto& f : frames) {
    std::snprintf(line, sizeof line, "%.9f,%.6f,%.6f,%.6f,%.9f\n", f.t, f.position.x(),
                  f.position.y(), f.position.z(), f.amplitude);
    out += line;
  }
  return out;
}

}  // namespace grassfeel
