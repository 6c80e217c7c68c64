#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "grassfeel/param_space.hpp"
#include "grassfeel/waveform.hpp"

namespace grassfeel {

using Vec3 = Eigen::Vector3d;

/// Focal path: a circle of `circle_radius_mm` traced at `stm_freq_hz` in a
/// plane normal to `plane_normal`, its center swinging along `path_axis`.
struct StmConfig {
  double circle_radius_mm = 8.0;
  double stm_freq_hz = 10.0;
  double step_mm = 5.0;
  double path_length_mm = 30.0;
  Vec3 workspace_origin{0.0, 0.0, 200.0};
  Vec3 path_axis{1.0, 0.0, 0.0};
  Vec3 plane_normal{0.0, 0.0, 1.0};
};

/// Throws std::invalid_argument on non-positive sizes, non-unit axes or a
/// path axis that leaves the focal plane.
void validate(const StmConfig& cfg);

struct FocusFrame {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  double amplitude = 0.0;
};

int points_per_revolution(const StmConfig& cfg);
double effective_step_mm(const StmConfig& cfg);
/// Distance between consecutive circle points, 2 r sin(π / N).
double chord_step_mm(const StmConfig& cfg);
/// Spacing of the focus schedule, 1 / (stm_freq · N).
double frame_interval_s(const StmConfig& cfg);

double center_offset(const StmConfig& cfg, double move_freq_hz, double t);
/// Same, with the default 30 mm path.
double center_offset(double move_freq_hz, double t);

/// Index of the circle point active at time t.
int hop_index(const StmConfig& cfg, double t);

FocusFrame focus_at(const StmConfig& cfg, const HapticParams& p, const WaveformSpec& spec, double t);

/// Frames at t0 + i·Δt covering [t0, t0 + duration).
std::vector<FocusFrame> schedule(const StmConfig& cfg, const HapticParams& p,
                                 const WaveformSpec& spec, double t0, double duration);

/// CSV with header t_s,x_mm,y_mm,z_mm,amplitude.
std::string schedule_to_csv(const std::vector<FocusFrame>& frames);

}  // namespace grassfeel
