#pragma once

#include <cstdint>
#include <vector>

#include "grassfeel/session.hpp"
#include "grassfeel/stm_trajectory.hpp"
#include "grassfeel/waveform.hpp"

namespace grassfeel {

struct TickOutput {
  /// Focus frames whose timestamps fall inside this block, on the global
  /// 1 / (stm_freq · N) grid.
  std::vector<FocusFrame> frames;
  SampleBlock block;
};

/// Streaming side of a session. Each tick renders one waveform block from a
/// single snapshot, so a parameter change never lands mid-block, and emits
/// the focus frames that fall inside that block. Frame amplitude is the
/// rendered envelope at the frame's sample, forced to 0 while the stimulus
/// is gated off; the trajectory keeps advancing either way.
class StimulusStreamer {
 public:
  StimulusStreamer(StmConfig stm, RenderConfig render);

  TickOutput tick(const StimulusSnapshot& snap);

  /// Time of the first sample of the next block.
  double time_s() const;
  std::int64_t next_sample() const { return next_sample_; }
  const PhaseState& phases() const { return phases_; }

 private:
  StmConfig stm_;
  RenderConfig render_;
  PhaseState phases_{};
  std::int64_t next_sample_ = 0;
  std::int64_t next_frame_ = 0;
};

}  // namespace grassfeel
