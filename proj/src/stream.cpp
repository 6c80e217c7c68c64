#include "grassfeel/stream.hpp"

#include <algorithm>
#include <cmath>

namespace grassfeel {

StimulusStreamer::StimulusStreamer(StmConfig stm, RenderConfig render)
    : stm_(std::move(stm)), render_(render) {
  validate(stm_);
}

double StimulusStreamer::time_s() const {
  return static_cast<double>(next_sample_) / render_.sample_rate_hz;
}

TickOutput StimulusStreamer::tick(const StimulusSnapshot& snap) {
  TickOutput out;
  const std::int64_t first = next_sample_;
  out.block = render_block(snap.spec, render_, phases_, first);
  next_sample_ += static_cast<std::int64_t>(render_.block_size);

  const double frame_dt = frame_interval_s(stm_);
  const double block_end_s = static_cast<double>(next_sample_) / render_.sample_rate_hz;
  while (static_cast<double>(next_frame_) * frame_dt < block_end_s - 1e-12) {
    const double t = static_cast<double>(next_frame_) * frame_dt;
    FocusFrame frame = focus_at(stm_, snap.params, snap.spec, t);
    const auto local = std::clamp<std::int64_t>(
        std::llround(t * render_.sample_rate_hz) - first, 0,
        static_cast<std::int64_t>(out.block.samples.size()) - 1);
    frame.amplitude =
        snap.active ? envelope_from_sample(out.block.samples[static_cast<std::size_t>(local)]) : 0.0;
    out.frames.push_back(frame);
    ++next_frame_;
  }
  return out;
}

}  // namespace grassfeel
